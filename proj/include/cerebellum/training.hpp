#pragma once

// Climbing-fibre supervised training of microzones.
//
// Each trainable weight class is updated with a normalized delta rule:
//   w_s <- w_s + rate * e * x_s / (sum_s x_s^2 + m * epsilon)
// where x_s is the weight's regressor (activation times modulation) and m the
// number of active regressors. With binary activations this is the classic
// normalizer m * (mod^2 + epsilon). Weights that are hard-wired (basket w_bc,
// dynamic stellate w_sc, static stellate w_sp) are never touched.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "cerebellum/dynamics.hpp"
#include "cerebellum/network.hpp"

namespace cerebellum {

enum class Supervision { per_term, per_joint };

struct TrainingConfig {
  double rate = 0.5;
  int epochs = 30;
  std::uint64_t seed = 1;
  std::size_t sample_count = 0;  // 0 = use every training sample
  Supervision supervision = Supervision::per_term;
  double epsilon = 1e-8;
};

void validate(const TrainingConfig& cfg);

/// target - prediction, per term, for one joint.
struct TermErrors {
  Eigen::VectorXd inertial;
  double coriolis = 0.0;
  Eigen::Vector2d gravity = Eigen::Vector2d::Zero();
  Eigen::Vector3d external = Eigen::Vector3d::Zero();
  double fric_dyn = 0.0;
  double fric_stat = 0.0;
  double total = 0.0;
};

TermErrors term_errors(const TermPredictions& pred, const TorqueBreakdown& target, int joint);

/// One climbing-fibre update of `mz`. Returns the errors measured before the update.
/// Throws NumericalError on a non-finite error.
TermErrors train_step(Microzone& mz, const SampleInputs& in, const TorqueBreakdown& target,
                      const TrainingConfig& cfg);

/// Families reported per epoch: the six term families plus the assembled torque.
inline constexpr std::size_t kReportFamilies = 7;
std::string report_family_name(std::size_t f);

struct FamilyStats {
  double sum_sq_err = 0.0;
  double sum_sq_target = 0.0;
  double max_abs_err = 0.0;
  std::size_t count = 0;

  double rms() const;
  /// RMS error over RMS target; 0 when both vanish.
  double relative_rms() const;
  void merge(const FamilyStats& o);
  void add(double err, double target);
};

struct EpochStats {
  int epoch = 0;
  std::array<FamilyStats, kReportFamilies> families{};
};

struct TrainingReport {
  std::vector<EpochStats> epochs;

  /// CSV: epoch,term_family,rms,max_abs_err
  void write_csv(std::ostream& os) const;
};

/// Errors of every microzone on every sample. Deterministic and thread-count independent.
EpochStats evaluate(const Network& net, std::span<const SampleInputs> inputs,
                    std::span<const TorqueBreakdown> targets);

/// Epoch 0 is the untrained baseline; every epoch shuffles the sample order with
/// the configured seed and re-evaluates the whole training set afterwards.
/// Throws NumericalError when an epoch's RMS grows more than tenfold.
TrainingReport train(Network& net, std::span<const SampleInputs> inputs,
                     std::span<const TorqueBreakdown> targets, const TrainingConfig& cfg);

}  // namespace cerebellum
