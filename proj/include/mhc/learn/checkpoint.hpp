#pragma once

#include "mhc/types.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>

namespace mhc::learn {

/// Binary parameter file: magic line, little-endian u64 header length, a
/// JSON header (meta plus tensor names and sizes), then raw float64 data in
/// header order.
struct TensorFile {
  nlohmann::json meta = nlohmann::json::object();
  std::map<std::string, VecX> tensors;

  const VecX& at(const std::string& name) const;
};

inline constexpr const char* kCheckpointMagic = "MHC-CKPT/1\n";

void write_tensor_file(const TensorFile& f, const std::filesystem::path& path);
/// Throws SchemaError on a bad magic, truncated data or malformed header.
TensorFile read_tensor_file(const std::filesystem::path& path);

}  // namespace mhc::learn
