#include "cli_common.hpp"

#include <cxxabi.h>

#include <cstdlib>
#include <iostream>
#include <memory>
#include <typeinfo>

namespace {

std::string type_name(const std::exception& e) {
  int status = 0;
  std::unique_ptr<char, void (*)(void*)> name(abi::__cxa_demangle(typeid(e).name(), nullptr, nullptr, &status),
                                              std::free);
  std::string s = status == 0 ? name.get() : typeid(e).name();
  const auto colon = s.rfind("::");
  return colon == std::string::npos ? s : s.substr(colon + 2);
}

// One JSON object per line on stderr.
int diagnose(const std::string& kind, const std::string& message, int code) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}, {"exit", code}}.dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Masked humanoid controller toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mhc 1.0");
  mhc::cli::add_data_commands(app);
  mhc::cli::add_run_commands(app);
  mhc::cli::add_plan_commands(app);
  mhc::cli::add_serve_command(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return diagnose("UsageError", e.what(), 2);
  } catch (const mhc::cli::UsageError& e) {
    return diagnose("UsageError", e.what(), 2);
  } catch (const std::invalid_argument& e) {
    return diagnose("InvalidArgument", e.what(), 2);
  } catch (const mhc::Error& e) {
    return diagnose(type_name(e), e.what(), 1);
  } catch (const std::exception& e) {
    return diagnose(type_name(e), e.what(), 1);
  }
  return 0;
}
