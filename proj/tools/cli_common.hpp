#pragma once

#include "mhc/dataset/dataset.hpp"
#include "mhc/errors.hpp"
#include "mhc/motion/skeleton.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace mhc::cli {

/// Bad command-line input that CLI11 cannot catch (e.g. conflicting flags).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Explicit flag, else MHC_SEED, else the configured value.
std::uint64_t resolve_seed(std::uint64_t configured, const std::optional<std::uint64_t>& flag);

motion::SkeletonSpec skeleton_or_default(const std::string& path);

/// The dataset directory when given, else `clips` synthetic clips.
dataset::MotionDataset dataset_or_synthetic(const std::string& dir, const motion::SkeletonSpec& skel, int clips,
                                            int frames);

/// "x,y" in metres.
Vec2 parse_xy(const std::string& s);

/// Reads a JSON file and applies it as a merge patch over `base`.
nlohmann::json merge_config(nlohmann::json base, const std::string& path);

/// Standing rest pose with its feet on the ground.
motion::Pose standing_pose(const motion::SkeletonSpec& skel);

void print_json(const nlohmann::json& j);

void add_data_commands(CLI::App& app);   // dataset, convert
void add_run_commands(CLI::App& app);    // sim, reward, train, eval
void add_plan_commands(CLI::App& app);   // plan, fsm
void add_serve_command(CLI::App& app);   // serve

}  // namespace mhc::cli
