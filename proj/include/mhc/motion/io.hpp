#pragma once

#include "mhc/motion/pose.hpp"
#include "mhc/motion/skeleton.hpp"

#include <json.hpp>

#include <filesystem>

namespace mhc::motion {

inline constexpr const char* kClipSchema = "mhc-clip/1";
inline constexpr const char* kSkeletonSchema = "mhc-skel/1";

nlohmann::json to_json(const SkeletonSpec& skel);
SkeletonSpec skeleton_from_json(const nlohmann::json& j);

nlohmann::json root_to_json(const RootState& root);
RootState root_from_json(const nlohmann::json& j);

nlohmann::json to_json(const MotionClip& clip);
/// Parses and validates a clip; missing q^l/q^g are recomputed by FK.
MotionClip clip_from_json(const nlohmann::json& j, const SkeletonSpec& skel);

SkeletonSpec load_skeleton(const std::filesystem::path& path);
void save_skeleton(const SkeletonSpec& skel, const std::filesystem::path& path);
MotionClip load_clip(const std::filesystem::path& path, const SkeletonSpec& skel);
void save_clip(const MotionClip& clip, const std::filesystem::path& path);

// Shared helpers for the other file formats.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const nlohmann::json& j, const std::filesystem::path& path);
Vec3 vec3_from_json(const nlohmann::json& j, const char* what);
Rot6 rot6_from_json(const nlohmann::json& j, const char* what);
nlohmann::json to_json(const Vec3& v);
nlohmann::json to_json(const Rot6& r);
void expect_schema(const nlohmann::json& j, const char* schema);

}  // namespace mhc::motion
