#include "harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <exception>
#include <set>
#include <string>

namespace mhc::acceptance {

std::vector<Criterion>& registry() {
  static std::vector<Criterion> r;
  return r;
}

}  // namespace mhc::acceptance

// Usage: mhc_acceptance [--list] [id...]. Runs every criterion (or the named
// ones) and prints one PASS/FAIL line each; exits 1 if any failed.
int main(int argc, char** argv) {
  using namespace mhc::acceptance;
  std::sort(registry().begin(), registry().end(),
            [](const Criterion& a, const Criterion& b) { return a.order < b.order; });
  std::set<std::string> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--list") {
      for (const auto& c : registry()) std::printf("%s  %s\n", c.id.c_str(), c.title.c_str());
      return 0;
    }
    only.insert(a);
  }
  for (const auto& id : only) {
    bool known = false;
    for (const auto& c : registry()) known = known || c.id == id;
    if (!known) {
      std::fprintf(stderr, "unknown criterion '%s' (see --list)\n", id.c_str());
      return 2;
    }
  }

  int failed = 0;
  for (const auto& c : registry()) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = fmt("%.1f s", secs);
    if (c.budget_s > 0.0) {
      timing += fmt(" of %.0f s", c.budget_s);
      if (secs > c.budget_s) {
        o.pass = false;
        o.detail += "; over the runtime bound";
      }
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %s: %s | %s (%s)\n", o.pass ? "PASS" : "FAIL", c.id.c_str(), c.title.c_str(), o.detail.c_str(),
                timing.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
