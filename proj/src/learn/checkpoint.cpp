#include "mhc/learn/checkpoint.hpp"

#include "mhc/errors.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace mhc::learn {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

const VecX& TensorFile::at(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw SchemaError("checkpoint has no tensor '" + name + "'");
  return it->second;
}

void write_tensor_file(const TensorFile& f, const std::filesystem::path& path) {
  nlohmann::json header{{"meta", f.meta}, {"tensors", nlohmann::json::array()}};
  for (const auto& [name, t] : f.tensors) header["tensors"].push_back({{"name", name}, {"size", t.size()}});
  const std::string h = header.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(kCheckpointMagic, std::strlen(kCheckpointMagic));
  const std::uint64_t len = h.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  for (const auto& [name, t] : f.tensors)
    out.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
  if (!out) throw Error("failed writing " + path.string());
}

TensorFile read_tensor_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::string magic(std::strlen(kCheckpointMagic), '\0');
  in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
  if (!in || magic != kCheckpointMagic) throw SchemaError(path.string() + ": not an MHC checkpoint");
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || len > (1u << 26)) throw SchemaError(path.string() + ": bad header length");
  std::string h(len, '\0');
  in.read(h.data(), static_cast<std::streamsize>(len));
  if (!in) throw SchemaError(path.string() + ": truncated header");
  TensorFile f;
  try {
    const auto header = nlohmann::json::parse(h);
    f.meta = header.at("meta");
    for (const auto& t : header.at("tensors")) {
      VecX v(t.at("size").get<long>());
      in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
      if (!in) throw SchemaError(path.string() + ": truncated tensor data");
      f.tensors[t.at("name").get<std::string>()] = std::move(v);
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  if (in.peek() != std::char_traits<char>::eof()) throw SchemaError(path.string() + ": trailing bytes");
  return f;
}

}  // namespace mhc::learn
