#include "mhc/motion/io.hpp"

#include "mhc/errors.hpp"
#include "mhc/motion/clip_ops.hpp"

#include <fstream>

namespace mhc::motion {

using nlohmann::json;

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json to_json(const Rot6& r) {
  json a = json::array();
  for (int i = 0; i < 6; ++i) a.push_back(r[i]);
  return a;
}

namespace {

template <int N>
Eigen::Matrix<double, N, 1> fixed_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != N)
    throw SchemaError(std::string(what) + ": expected an array of " + std::to_string(N) + " numbers");
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) {
    if (!j[i].is_number()) throw SchemaError(std::string(what) + ": expected numbers");
    out[i] = j[i].get<double>();
  }
  return out;
}

}  // namespace

Vec3 vec3_from_json(const json& j, const char* what) { return fixed_from_json<3>(j, what); }
Rot6 rot6_from_json(const json& j, const char* what) { return fixed_from_json<6>(j, what); }

void expect_schema(const json& j, const char* schema) {
  if (!j.is_object() || !j.contains("schema") || j["schema"] != schema)
    throw SchemaError(std::string("expected schema \"") + schema + "\"");
}

json to_json(const SkeletonSpec& skel) {
  json joints = json::array();
  json labels = json::object();
  for (const auto& jd : skel.joints()) {
    joints.push_back({{"name", jd.name}, {"parent", jd.parent}, {"offset", to_json(jd.offset)},
                      {"limit", jd.limit}});
    labels[jd.name] = std::string(to_string(jd.label));
  }
  return {{"schema", kSkeletonSchema}, {"name", skel.name()}, {"joints", joints},
          {"part_labels", labels}};
}

SkeletonSpec skeleton_from_json(const json& j) {
  expect_schema(j, kSkeletonSchema);
  try {
    std::vector<JointDef> joints;
    const auto& labels = j.at("part_labels");
    for (const auto& e : j.at("joints")) {
      JointDef d;
      d.name = e.at("name").get<std::string>();
      d.parent = e.at("parent").get<int>();
      d.offset = vec3_from_json(e.at("offset"), "joint offset");
      d.limit = e.value("limit", 2.8);
      if (!labels.contains(d.name)) throw SchemaError("joint " + d.name + " has no part label");
      d.label = part_label_from_string(labels.at(d.name).get<std::string>());
      joints.push_back(std::move(d));
    }
    return SkeletonSpec(j.at("name").get<std::string>(), std::move(joints));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("skeleton: ") + e.what());
  }
}

json root_to_json(const RootState& root) {
  return {{"pos", to_json(root.position)},
          {"rot6d", to_json(root.orientation)},
          {"lin_vel", to_json(root.linear_velocity)},
          {"ang_vel", to_json(root.angular_velocity)}};
}

RootState root_from_json(const json& j) {
  RootState r;
  r.position = vec3_from_json(j.at("pos"), "root.pos");
  r.orientation = rot6_from_json(j.at("rot6d"), "root.rot6d");
  r.linear_velocity = vec3_from_json(j.at("lin_vel"), "root.lin_vel");
  r.angular_velocity = vec3_from_json(j.at("ang_vel"), "root.ang_vel");
  return r;
}

json to_json(const MotionClip& clip) {
  json frames = json::array();
  for (const auto& f : clip.frames) {
    json fr = {{"root", root_to_json(f.root)}};
    json rots = json::array();
    for (const auto& r : f.joint_rot) rots.push_back(to_json(r));
    fr["joint_rot6d"] = rots;
    if (!f.joint_local.empty()) {
      json a = json::array();
      for (const auto& p : f.joint_local) a.push_back(to_json(p));
      fr["joint_local_pos"] = a;
    }
    if (!f.joint_global.empty()) {
      json a = json::array();
      for (const auto& p : f.joint_global) a.push_back(to_json(p));
      fr["joint_global_pos"] = a;
    }
    frames.push_back(std::move(fr));
  }
  return {{"schema", kClipSchema}, {"name", clip.name},   {"fps", clip.fps},
          {"skeleton", clip.skeleton}, {"source", to_string(clip.source)}, {"frames", frames}};
}

MotionClip clip_from_json(const json& j, const SkeletonSpec& skel) {
  expect_schema(j, kClipSchema);
  MotionClip clip;
  try {
    clip.name = j.at("name").get<std::string>();
    clip.fps = j.at("fps").get<double>();
    clip.skeleton = j.at("skeleton").get<std::string>();
    clip.source = clip_source_from_string(j.value("source", std::string("raw")));
    if (clip.skeleton != skel.name())
      throw SchemaError("clip " + clip.name + " uses skeleton " + clip.skeleton + ", expected " +
                        skel.name());
    const auto& frames = j.at("frames");
    clip.frames.reserve(frames.size());
    for (std::size_t t = 0; t < frames.size(); ++t) {
      const auto& fr = frames[t];
      Pose p;
      p.root = root_from_json(fr.at("root"));
      for (const auto& r : fr.at("joint_rot6d")) p.joint_rot.push_back(rot6_from_json(r, "joint_rot6d"));
      const bool has_local = fr.contains("joint_local_pos");
      const bool has_global = fr.contains("joint_global_pos");
      // Both channels are recomputed when either is missing.
      if (has_local && has_global) {
        for (const auto& v : fr["joint_local_pos"]) p.joint_local.push_back(vec3_from_json(v, "joint_local_pos"));
        for (const auto& v : fr["joint_global_pos"]) p.joint_global.push_back(vec3_from_json(v, "joint_global_pos"));
      }
      clip.frames.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw SchemaError("clip: " + std::string(e.what()));
  }
  validate_clip(skel, clip);
  return clip;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void write_json_file(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write " + path.string());
  out << j.dump(1) << '\n';
}

SkeletonSpec load_skeleton(const std::filesystem::path& path) {
  return skeleton_from_json(read_json_file(path));
}

void save_skeleton(const SkeletonSpec& skel, const std::filesystem::path& path) {
  write_json_file(to_json(skel), path);
}

MotionClip load_clip(const std::filesystem::path& path, const SkeletonSpec& skel) {
  return clip_from_json(read_json_file(path), skel);
}

void save_clip(const MotionClip& clip, const std::filesystem::path& path) {
  write_json_file(to_json(clip), path);
}

}  // namespace mhc::motion
