#include "mhc/directive/observation.hpp"

#include "mhc/motion/rotation.hpp"

namespace mhc::directive {

namespace {

class Writer {
 public:
  explicit Writer(VecX& v) : v_(v) {}
  void put(double x) { v_[i_++] = x; }
  template <typename D>
  void put(const Eigen::MatrixBase<D>& x) {
    v_.segment(i_, x.size()) = x;
    i_ += static_cast<int>(x.size());
  }
  void skip(int n) { i_ += n; }
  int pos() const { return i_; }

 private:
  VecX& v_;
  int i_ = 0;
};

Mat3 heading_of(const Pose& p) { return motion::yaw_matrix(motion::yaw_of(p.root.rotation())); }

void write_pose(Writer& w, const Pose& p, const Mat3& heading) {
  const Mat3 R = p.root.rotation();
  w.put(p.height());
  w.put(motion::matrix_to_sixd(heading.transpose() * R));
  w.put(heading.transpose() * p.root.linear_velocity);
  w.put(heading.transpose() * p.root.angular_velocity);
  for (const auto& r : p.joint_rot) w.put(r);
  for (const auto& l : p.joint_local) w.put(l);
}

void write_target(Writer& w, const Pose& cur, const Mat3& heading, const Pose& tgt, const DirectiveMask& m) {
  const int J = cur.joint_count();
  const Mat3 Ht = heading.transpose();
  if (m.root_full()) w.put(Ht * (tgt.root.position - cur.root.position));
  else w.skip(3);
  if (m.root_field(RootField::kHeight)) w.put(tgt.height() - cur.height());
  else w.skip(1);
  if (m.root_field(RootField::kOrientation)) w.put(motion::matrix_to_sixd(Ht * tgt.root.rotation()));
  else w.skip(6);
  if (m.root_field(RootField::kVelocity)) {
    w.put(Ht * (tgt.root.linear_velocity - cur.root.linear_velocity));
    w.put(Ht * (tgt.root.angular_velocity - cur.root.angular_velocity));
  } else {
    w.skip(6);
  }
  if (m.has(Channel::kTheta)) {
    for (const auto& r : tgt.joint_rot) w.put(r);
  } else {
    w.skip(6 * J);
  }
  const bool local = m.has(Channel::kLocal), global = m.has(Channel::kGlobal);
  for (int c = 0; c < J; ++c) {
    if (local && m.joint_mask[c]) w.put(tgt.joint_local[c] - cur.joint_local[c]);
    else w.skip(3);
  }
  for (int c = 0; c < J; ++c) {
    if (global && m.joint_mask[c]) w.put(Ht * (tgt.joint_global[c] - cur.joint_global[c]));
    else w.skip(3);
  }
}

}  // namespace

VecX mask_bits(const DirectiveMask& m) {
  const int J = static_cast<int>(m.joint_mask.size());
  VecX bits = VecX::Zero(ObservationLayout{J}.mask_bits());
  for (int c = 0; c < kNumChannels; ++c) bits[c] = m.channels[c] ? 1.0 : 0.0;
  bits[kNumChannels] = m.root_full() ? 1.0 : 0.0;
  for (int f = 0; f < kNumRootFields; ++f)
    bits[kNumChannels + 1 + f] = m.root_field(static_cast<RootField>(f)) ? 1.0 : 0.0;
  for (int c = 0; c < J; ++c) bits[kNumChannels + 1 + kNumRootFields + c] = m.joint_selected(c) ? 1.0 : 0.0;
  return bits;
}

VecX encode_pose(const Pose& current) {
  VecX out = VecX::Zero(ObservationLayout{current.joint_count()}.pose_dim());
  Writer w(out);
  write_pose(w, current, heading_of(current));
  return out;
}

VecX encode_observation(const Pose& current, const Directive& directive, int t) {
  const ObservationLayout layout{current.joint_count()};
  VecX out = VecX::Zero(layout.total());
  Writer w(out);
  const Mat3 heading = heading_of(current);
  write_pose(w, current, heading);
  const VecX bits = mask_bits(directive.mask);
  for (int offset : {1, directive.horizon}) {
    const int start = w.pos();
    write_target(w, current, heading, directive.at(t + offset), directive.mask);
    w.skip(start + layout.target_features() - w.pos());
    w.put(bits);
  }
  return out;
}

}  // namespace mhc::directive
