#pragma once

// Batch kernels. Each has a serial reference and an OpenMP version that
// returns bit-identical results for any thread count.

#include <span>
#include <vector>

#include "cerebellum/dataset.hpp"
#include "cerebellum/golgi.hpp"
#include "cerebellum/network.hpp"
#include "cerebellum/training.hpp"

namespace cerebellum::kernels {

std::vector<TorqueBreakdown> breakdowns_serial(const RobotModel& model, std::span<const Sample> samples);
std::vector<TorqueBreakdown> breakdowns_omp(const RobotModel& model, std::span<const Sample> samples);

std::vector<SampleInputs> encode_serial(const Network& net, const RobotModel& model,
                                        std::span<const Sample> samples);
std::vector<SampleInputs> encode_omp(const Network& net, const RobotModel& model,
                                     std::span<const Sample> samples);

/// Per joint and family: error and target are the family's summed contribution to tau_k.
EpochStats evaluate_serial(const Network& net, std::span<const SampleInputs> inputs,
                           std::span<const TorqueBreakdown> targets);
EpochStats evaluate_omp(const Network& net, std::span<const SampleInputs> inputs,
                        std::span<const TorqueBreakdown> targets);

SparsityStats active_fraction_serial(const BasisLayout& layout, const GolgiParams& params,
                                     std::span<const Eigen::VectorXd> states);
SparsityStats active_fraction_omp(const BasisLayout& layout, const GolgiParams& params,
                                  std::span<const Eigen::VectorXd> states);

/// One pass over `order`; microzones are trained concurrently, samples in order.
void train_epoch_serial(Network& net, std::span<const SampleInputs> inputs,
                        std::span<const TorqueBreakdown> targets, std::span<const std::size_t> order,
                        const TrainingConfig& cfg);
void train_epoch_omp(Network& net, std::span<const SampleInputs> inputs,
                     std::span<const TorqueBreakdown> targets, std::span<const std::size_t> order,
                     const TrainingConfig& cfg);

}  // namespace cerebellum::kernels
