#pragma once

// End-to-end orchestration shared by the CLI and the acceptance checks.

#include <iosfwd>
#include <span>
#include <vector>

#include "cerebellum/config.hpp"
#include "cerebellum/dataset.hpp"
#include "cerebellum/network.hpp"
#include "cerebellum/training.hpp"

namespace cerebellum {

/// Joint positions drawn uniformly over the layout ranges.
std::vector<Eigen::VectorXd> workspace_states(const BasisLayout& layout, std::size_t count, std::uint64_t seed);

/// Microzones for the config with the Golgi thresholds calibrated to the sparsity target.
Network build_network(const ExperimentConfig& cfg);

struct EvalReport {
  EpochStats stats;
  SparsityStats sparsity;
  double sparsity_target = 0.0;
  std::size_t samples = 0;

  bool sparsity_in_band() const;
  /// Long format: metric,term_family,value
  void write_csv(std::ostream& os) const;
};

EvalReport evaluate_report(const Network& net, const RobotModel& model, std::span<const Sample> samples,
                           std::span<const TorqueBreakdown> targets, std::size_t sparsity_samples,
                           std::uint64_t seed);

struct RunResult {
  Network net;
  Dataset dataset;
  TrainingReport training;
  EvalReport holdout;
};

/// generate -> train on the head of the dataset -> evaluate on the held-out tail.
RunResult run_experiment(const ExperimentConfig& cfg);

}  // namespace cerebellum
