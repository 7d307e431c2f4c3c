#pragma once

// Term-by-term dynamics approximator built from cerebellar elementary
// processing units (CePUs).
//
// Every CePU is a Purkinje-cell style weighted sum over the sparse position
// code B(q), scaled by one signed modulation channel:
//   inertial(k, m)   -> qdd_m
//   coriolis(k, i)   -> qd_i times the basket-cell sum for row k
//   gravity(k, c)    -> g_c, c in {x, y}
//   external(k, c)   -> w_c, c in {fx, fy, mz}
// Friction runs through stellate cells: the dynamic one rescales a fixed
// reconstruction of qd_k by a trainable gain, the static one learns weights over
// a 1-D speed code.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cerebellum/dynamics.hpp"
#include "cerebellum/encoding.hpp"
#include "cerebellum/golgi.hpp"

namespace cerebellum {

enum class TermFamily { inertial, coriolis, gravity, external, fric_dyn, fric_stat };

inline constexpr std::array<TermFamily, 6> kTermFamilies{
    TermFamily::inertial, TermFamily::coriolis, TermFamily::gravity,
    TermFamily::external, TermFamily::fric_dyn, TermFamily::fric_stat};

std::string to_string(TermFamily f);
TermFamily parse_term_family(const std::string& s);

enum class Channel { acceleration, velocity, gravity, wrench, none };

/// Encoder group 0 is the shared position code; group 1 + k is joint k's speed code.
inline constexpr int kPositionEncoder = 0;
inline int speed_encoder(int joint) { return 1 + joint; }

struct CePU {
  TermFamily family = TermFamily::inertial;
  int joint = 0;
  int index = 0;  // m (inertial), i (coriolis), component (gravity, external)
  int encoder = kPositionEncoder;
  std::vector<double> w_pc;

  Channel channel() const;
};

/// Fixed reconstruction of one joint speed from a sparse subset of the
/// speed-modulated position code.
struct BasketCell {
  int target_speed = 0;
  std::size_t sample_stride = 1;     // in tilings
  std::vector<std::uint32_t> cells;  // sampled cell ids, increasing
  std::vector<double> w_bc;
};

enum class StellateKind { dynamic, stat };

struct StellateCell {
  StellateKind kind = StellateKind::dynamic;
  int joint = 0;
  std::vector<std::uint32_t> cells;  // dynamic: sampled position cells; static: empty (dense)
  std::vector<double> w_sc;          // dynamic: fixed; static: trainable, one per speed cell
  double w_sp = 0.0;                 // dynamic: trainable; static: fixed at 1
};

struct Microzone {
  int joint = 0;
  int dof = 0;
  std::vector<CePU> cepus;  // [inertial x n][coriolis x n][gravity x 2][external x 3]
  std::vector<BasketCell> baskets;
  std::vector<StellateCell> stellates;  // [dynamic, static]

  CePU& inertial(int m) { return cepus[m]; }
  const CePU& inertial(int m) const { return cepus[m]; }
  CePU& coriolis(int i) { return cepus[dof + i]; }
  const CePU& coriolis(int i) const { return cepus[dof + i]; }
  CePU& gravity(int c) { return cepus[2 * dof + c]; }
  const CePU& gravity(int c) const { return cepus[2 * dof + c]; }
  CePU& external(int c) { return cepus[2 * dof + 2 + c]; }
  const CePU& external(int c) const { return cepus[2 * dof + 2 + c]; }
  StellateCell& dynamic_stellate() { return stellates[0]; }
  const StellateCell& dynamic_stellate() const { return stellates[0]; }
  StellateCell& static_stellate() { return stellates[1]; }
  const StellateCell& static_stellate() const { return stellates[1]; }

  std::size_t trainable_weight_count() const;
};

/// Everything the microzones read for one sample, encoded once and shared.
struct SampleInputs {
  SparseActivation position;            // B(q)
  std::vector<SparseActivation> speed;  // per joint, speed code of qd_k
  Eigen::VectorXd qd;
  Eigen::VectorXd qdd;
  Eigen::Vector2d gravity = Eigen::Vector2d::Zero();
  Eigen::Vector3d wrench = Eigen::Vector3d::Zero();
};

/// Predicted torque terms of one joint.
struct TermPredictions {
  Eigen::VectorXd inertial;  // over m
  double coriolis = 0.0;
  Eigen::Vector2d gravity = Eigen::Vector2d::Zero();
  Eigen::Vector3d external = Eigen::Vector3d::Zero();
  double fric_dyn = 0.0;
  double fric_stat = 0.0;

  /// Fixed summation order shared by every consumer.
  double total() const;
};

struct Network {
  BasisLayout position;
  BasisLayout speed;
  GolgiParams golgi;
  std::vector<Microzone> zones;

  int dof() const { return static_cast<int>(zones.size()); }
  SampleInputs encode(const JointState& s, const Eigen::Vector2d& gravity,
                      const ExternalWrench& w) const;
};

/// Sampled tilings for baskets and stellates: two samples per basis width,
/// i.e. every floor(tilings / 2)-th tiling.
std::size_t basket_stride(const BasisLayout& layout);

/// Least-squares fit of reconstruction weights over the sampled tilings so that
/// sum_s B_s(q) w_s = 1 on a dense grid covering every sampled cell.
BasketCell calibrate_basket(const BasisLayout& layout, int target_speed);

/// Per joint: n inertial, n coriolis, 2 gravity, 3 external CePUs, n baskets,
/// one dynamic and one static stellate. All trainable weights start at zero.
Network build_microzones(const RobotModel& model, const BasisLayout& position,
                         const BasisLayout& speed, const GolgiParams& golgi);

double cepu_eval(const CePU& cepu, const SparseActivation& encoded, double mod_value);
double basket_eval(const BasketCell& b, const SparseActivation& speed_modulated);
/// speed_modulated[i] = modulate(B(q), qd_i). Row k masks basket k in PC_k's pathway.
double coriolis_row_eval(const Microzone& mz, std::span<const SparseActivation> speed_modulated);
/// Fixed-weight recovery of qd_k, before the trainable stellate-to-PC gain.
double stellate_reconstruction(const StellateCell& s, const SparseActivation& speed_modulated);
double stellate_dynamic_eval(const StellateCell& s, const SparseActivation& speed_modulated);
double stellate_static_eval(const StellateCell& s, const SparseActivation& speed_encoded);

TermPredictions microzone_eval(const Microzone& mz, const SampleInputs& in);
TermPredictions microzone_eval(const Network& net, int joint, const JointState& s,
                               const Eigen::Vector2d& gravity, const ExternalWrench& w);

}  // namespace cerebellum
