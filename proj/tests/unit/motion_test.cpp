#include "mhc/errors.hpp"
#include "mhc/motion/clip_ops.hpp"
#include "mhc/motion/io.hpp"
#include "mhc/motion/kinematics.hpp"
#include "mhc/motion/rotation.hpp"
#include "mhc/motion/skeleton.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <numbers>

using namespace mhc;
using namespace mhc::motion;

TEST_CASE("sixd_to_matrix decodes the identity and a permutation") {
  Rot6 id;
  id << 1, 0, 0, 0, 1, 0;
  CHECK((sixd_to_matrix(id) - Mat3::Identity()).norm() == 0.0);

  Rot6 rep;
  rep << 0, 0, 1, 1, 0, 0;
  const Mat3 r = sixd_to_matrix(rep);
  CHECK((r.col(0) - Vec3(0, 0, 1)).norm() < 1e-15);
  CHECK((r.col(1) - Vec3(1, 0, 0)).norm() < 1e-15);
  CHECK((r.col(2) - Vec3(0, 1, 0)).norm() < 1e-15);
}

TEST_CASE("sixd_to_matrix is orthonormal for arbitrary inputs") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    Rot6 rep;
    for (int k = 0; k < 6; ++k) rep[k] = n(rng);
    const Mat3 r = sixd_to_matrix(rep);
    CHECK((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    // Gram-Schmidt: first column is the normalized first triple.
    CHECK((r.col(0) - rep.head<3>().normalized()).norm() < 1e-12);
    // Encode after decode is an idempotent projection.
    const Rot6 once = matrix_to_sixd(r);
    const Rot6 twice = matrix_to_sixd(sixd_to_matrix(once));
    CHECK((once - twice).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("sixd_to_matrix rejects degenerate input") {
  Rot6 zero = Rot6::Zero();
  CHECK_THROWS_AS(sixd_to_matrix(zero), DegenerateRotation);
  Rot6 parallel;
  parallel << 1, 0, 0, 2, 0, 0;
  CHECK_THROWS_AS(sixd_to_matrix(parallel), DegenerateRotation);
}

TEST_CASE("matrix_to_sixd returns the first two columns") {
  CHECK((matrix_to_sixd(Mat3::Identity()) - identity_sixd()).norm() == 0.0);
  Rot6 expected;
  expected << 0, 1, 0, -1, 0, 0;
  CHECK((matrix_to_sixd(yaw_matrix(std::numbers::pi / 2)) - expected).cwiseAbs().maxCoeff() < 1e-15);

  Mat3 scaled = 2.0 * Mat3::Identity();
  CHECK_THROWS_AS(matrix_to_sixd(scaled), NotARotation);
  Mat3 reflection = Mat3::Identity();
  reflection(2, 2) = -1;
  CHECK_THROWS_AS(matrix_to_sixd(reflection), NotARotation);
}

TEST_CASE("6D round trip over random rotations") {
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Mat3 r = test::random_rotation(rng);
    worst = std::max(worst, (sixd_to_matrix(matrix_to_sixd(r)) - r).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("exponential map round trip") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Vec3 w = test::random_vec3(rng, 1.5);
    CHECK((matrix_to_expmap(expmap_to_matrix(w)) - w).norm() < 1e-9);
  }
  CHECK((expmap_to_matrix(Vec3::Zero()) - Mat3::Identity()).norm() == 0.0);
}

TEST_CASE("yaw helpers") {
  CHECK(yaw_of(yaw_matrix(0.7)) == doctest::Approx(0.7));
  CHECK(wrap_angle(3 * std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(-0.5) == doctest::Approx(-0.5));
  const Mat3 r = yaw_matrix(1.2) * Eigen::AngleAxisd(0.3, Vec3::UnitY()).toRotationMatrix();
  CHECK(std::abs(yaw_of(remove_yaw(r))) < 1e-12);
  CHECK(tilt_angle(r) == doctest::Approx(0.3));
  CHECK(geodesic_angle(Mat3::Identity(), yaw_matrix(0.4)) == doctest::Approx(0.4));
}

TEST_CASE("sim13 skeleton layout") {
  const auto skel = sim13();
  CHECK(skel.joint_count() == 14);
  CHECK(skel.part_channels(BodyPart::kFullBody).size() == 14);
  CHECK(skel.part_channels(BodyPart::kUpperRight).size() == 3);
  CHECK(skel.part_channels(BodyPart::kUpperLeft).size() == 3);
  CHECK(skel.part_channels(BodyPart::kRoot).size() == 2);
  CHECK(skel.part_channels(BodyPart::kLower).size() == 6);
  CHECK(skel.foot_channels().size() == 2);
  const auto upper = skel.upper_body_mask();
  CHECK(std::count(upper.begin(), upper.end(), true) == 8);

  std::vector<JointDef> bad = {{"root", -1, Vec3::Zero(), PartLabel::kRootGroup, 1.0},
                               {"a", 2, Vec3::Zero(), PartLabel::kLower, 1.0},
                               {"b", 0, Vec3::Zero(), PartLabel::kLower, 1.0}};
  CHECK_THROWS_AS(SkeletonSpec("bad", bad), InvalidSkeleton);
}

TEST_CASE("identity pose FK gives cumulative offsets") {
  const auto skel = sim13();
  Pose p = rest_pose(skel.joint_count(), 0.0);
  refresh_positions(skel, p);
  const int head = skel.channel_of("head");
  const int foot = skel.channel_of("left_foot");
  CHECK((p.joint_global[head] - Vec3(0, 0, 0.7)).norm() < 1e-12);
  CHECK((p.joint_global[foot] - Vec3(0, 0.1, -0.9)).norm() < 1e-12);

  Pose moved = p;
  moved.root.position = Vec3(1, 2, 0);
  refresh_positions(skel, moved);
  for (int c = 0; c < skel.joint_count(); ++c) {
    CHECK((moved.joint_global[c] - p.joint_global[c] - Vec3(1, 2, 0)).norm() < 1e-12);
    CHECK((moved.joint_local[c] - p.joint_local[c]).norm() < 1e-12);
  }
}

namespace {

// Independent oracle: homogeneous 4x4 transforms multiplied along the chain.
std::vector<Vec3> matrix_chain_oracle(const SkeletonSpec& skel, const Vec3& root_pos, const Mat3& root_rot,
                                      const std::vector<Mat3>& local) {
  const auto& joints = skel.joints();
  std::vector<Eigen::Matrix4d> world(joints.size());
  world[0].setIdentity();
  world[0].topLeftCorner<3, 3>() = root_rot;
  world[0].topRightCorner<3, 1>() = root_pos;
  std::vector<Vec3> out;
  for (std::size_t i = 1; i < joints.size(); ++i) {
    Eigen::Matrix4d link = Eigen::Matrix4d::Identity();
    link.topLeftCorner<3, 3>() = local[i - 1];
    link.topRightCorner<3, 1>() = joints[i].offset;
    world[i] = world[joints[i].parent] * link;
    out.push_back(world[i].topRightCorner<3, 1>());
  }
  return out;
}

}  // namespace

TEST_CASE("two-joint chain rotated about x") {
  std::vector<JointDef> j = {{"root", -1, Vec3::Zero(), PartLabel::kRootGroup, 3.0},
                             {"mid", 0, Vec3(0, 0, 0.5), PartLabel::kLower, 3.0},
                             {"tip", 1, Vec3(0, 0, 0.5), PartLabel::kLower, 3.0}};
  const SkeletonSpec skel("chain", j);
  std::vector<Mat3> local = {Eigen::AngleAxisd(std::numbers::pi / 2, Vec3::UnitX()).toRotationMatrix(),
                             Mat3::Identity()};
  const auto fk = forward_kinematics(skel, Vec3::Zero(), Mat3::Identity(), local);
  CHECK((fk.global[1] - (fk.global[0] + Vec3(0, -0.5, 0))).norm() < 1e-12);
  const auto oracle = matrix_chain_oracle(skel, Vec3::Zero(), Mat3::Identity(), local);
  CHECK((fk.global[1] - oracle[1]).norm() < 1e-12);
}

TEST_CASE("FK matches the matrix-chain oracle on random 5-joint chains") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> coin(0, 1);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<JointDef> j = {{"root", -1, Vec3::Zero(), PartLabel::kRootGroup, 3.0}};
    for (int i = 1; i <= 5; ++i) {
      const int parent = coin(rng) ? i - 1 : std::uniform_int_distribution<int>(0, i - 1)(rng);
      j.push_back({"j" + std::to_string(i), parent, test::random_vec3(rng, 0.5), PartLabel::kLower, 3.0});
    }
    const SkeletonSpec skel("rand", j);
    std::vector<Mat3> local;
    for (int i = 0; i < 5; ++i) local.push_back(test::random_rotation(rng));
    const Vec3 root_pos = test::random_vec3(rng, 2.0);
    const Mat3 root_rot = test::random_rotation(rng);
    const auto fk = forward_kinematics(skel, root_pos, root_rot, local);
    const auto oracle = matrix_chain_oracle(skel, root_pos, root_rot, local);
    for (int c = 0; c < 5; ++c) {
      worst = std::max(worst, (fk.global[c] - oracle[c]).norm());
      const Vec3 local_oracle = root_rot.transpose() * (oracle[c] - root_pos);
      worst = std::max(worst, (fk.local[c] - local_oracle).norm());
    }
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("FK is deterministic") {
  std::mt19937_64 rng(9);
  const auto skel = sim13();
  Pose p = rest_pose(skel.joint_count(), 0.9);
  for (auto& r : p.joint_rot) r = test::random_rot6(rng);
  const auto a = forward_kinematics(skel, p.root, p.joint_rot);
  const auto b = forward_kinematics(skel, p.root, p.joint_rot);
  for (int c = 0; c < skel.joint_count(); ++c) CHECK(a.global[c] == b.global[c]);
}

namespace {

MotionClip random_clip(const SkeletonSpec& skel, std::mt19937_64& rng, int frames) {
  MotionClip clip;
  clip.name = "random";
  clip.skeleton = skel.name();
  for (int t = 0; t < frames; ++t) {
    Pose p = rest_pose(skel.joint_count(), 0.9);
    p.root.position = test::random_vec3(rng, 3.0);
    p.root.orientation = test::random_rot6(rng);
    p.root.linear_velocity = test::random_vec3(rng);
    p.root.angular_velocity = test::random_vec3(rng);
    for (auto& r : p.joint_rot) r = test::random_rot6(rng);
    refresh_positions(skel, p);
    clip.frames.push_back(p);
  }
  return clip;
}

}  // namespace

TEST_CASE("apply_inplane_rotation") {
  std::mt19937_64 rng(21);
  const auto skel = sim13();
  const MotionClip clip = random_clip(skel, rng, 4);

  SUBCASE("zero yaw is a bitwise copy") {
    const auto out = apply_inplane_rotation(clip, 0.0, Vec2(0.3, -1.0));
    for (int t = 0; t < clip.length(); ++t) {
      CHECK(out.frames[t].root.position == clip.frames[t].root.position);
      CHECK(out.frames[t].root.orientation == clip.frames[t].root.orientation);
      CHECK(out.frames[t].joint_global == clip.frames[t].joint_global);
    }
  }
  SUBCASE("half turn about the first root reverses facing") {
    const Vec2 pivot = clip.frames[0].root.position.head<2>();
    const auto out = apply_inplane_rotation(clip, std::numbers::pi, pivot);
    CHECK((out.frames[0].root.position - clip.frames[0].root.position).norm() < 1e-12);
    const Mat3 before = clip.frames[0].root.rotation();
    const Mat3 after = out.frames[0].root.rotation();
    CHECK(after.col(0).head<2>().dot(before.col(0).head<2>()) ==
          doctest::Approx(-before.col(0).head<2>().squaredNorm()));
    for (int t = 0; t < clip.length(); ++t) {
      CHECK(out.frames[t].height() == doctest::Approx(clip.frames[t].height()));
      CHECK(out.frames[t].joint_rot == clip.frames[t].joint_rot);
      CHECK(out.frames[t].joint_local == clip.frames[t].joint_local);
      CHECK(fk_consistency_error(skel, out.frames[t]) < 1e-9);
    }
  }
  SUBCASE("composition adds yaw angles") {
    const Vec2 pivot(0.5, 0.25);
    const auto ab = apply_inplane_rotation(apply_inplane_rotation(clip, 0.4, pivot), 1.1, pivot);
    const auto sum = apply_inplane_rotation(clip, 1.5, pivot);
    for (int t = 0; t < clip.length(); ++t) {
      CHECK((ab.frames[t].root.position - sum.frames[t].root.position).norm() < 1e-9);
      CHECK((ab.frames[t].root.rotation() - sum.frames[t].root.rotation()).norm() < 1e-9);
      CHECK((ab.frames[t].root.linear_velocity - sum.frames[t].root.linear_velocity).norm() < 1e-9);
      for (int c = 0; c < skel.joint_count(); ++c)
        CHECK((ab.frames[t].joint_global[c] - sum.frames[t].joint_global[c]).norm() < 1e-9);
    }
  }
  SUBCASE("root-relative positions are invariant for any yaw") {
    std::uniform_real_distribution<double> yaw(-10.0, 10.0);
    for (int k = 0; k < 20; ++k) {
      auto out = apply_inplane_rotation(clip, yaw(rng), Vec2(1.0, 2.0));
      for (int t = 0; t < clip.length(); ++t) {
        refresh_positions(skel, out.frames[t]);
        for (int c = 0; c < skel.joint_count(); ++c)
          CHECK((out.frames[t].joint_local[c] - clip.frames[t].joint_local[c]).norm() < 1e-9);
      }
    }
  }
}

TEST_CASE("clip JSON round trip and validation") {
  std::mt19937_64 rng(2);
  const auto skel = sim13();
  MotionClip clip = random_clip(skel, rng, 5);
  recompute_root_velocities(clip);
  const auto j = to_json(clip);
  const auto back = clip_from_json(j, skel);
  REQUIRE(back.length() == clip.length());
  CHECK(to_json(back) == j);

  auto stripped = j;
  for (auto& f : stripped["frames"]) {
    f.erase("joint_local_pos");
    f.erase("joint_global_pos");
  }
  const auto rebuilt = clip_from_json(stripped, skel);
  CHECK(fk_consistency_error(skel, rebuilt.frames[2]) < 1e-12);

  auto drifted = j;
  drifted["frames"][1]["joint_global_pos"][0][0] = 99.0;
  CHECK_THROWS_AS(clip_from_json(drifted, skel), InvalidClip);

  auto wrong_schema = j;
  wrong_schema["schema"] = "mhc-clip/0";
  CHECK_THROWS_AS(clip_from_json(wrong_schema, skel), SchemaError);

  const auto sj = to_json(skel);
  const auto skel2 = skeleton_from_json(sj);
  CHECK(to_json(skel2) == sj);
}
