#include "cerebellum/kernels.hpp"

#include <algorithm>
#include <exception>
#include <limits>

#include "cerebellum/errors.hpp"

namespace cerebellum::kernels {

namespace {

// Runs fn(i) for i in [0, n) across threads. The exception of the lowest
// failing index is rethrown, so failures are reported as in the serial loop.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  std::exception_ptr error;
  std::size_t error_index = std::numeric_limits<std::size_t>::max();
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(cerebellum_kernel_error)
      {
        if (static_cast<std::size_t>(i) < error_index) {
          error_index = static_cast<std::size_t>(i);
          error = std::current_exception();
        }
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

template <class Fn>
void serial_for(std::size_t n, Fn&& fn) {
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

RobotModel tilted(const RobotModel& model, double tilt) {
  RobotModel m = model;
  m.base_tilt = tilt;
  return m;
}

using SampleStats = std::array<FamilyStats, kReportFamilies>;

SampleStats sample_stats(const Network& net, const SampleInputs& in, const TorqueBreakdown& target) {
  SampleStats s{};
  for (const Microzone& mz : net.zones) {
    const int k = mz.joint;
    const TermPredictions pred = microzone_eval(mz, in);
    const double fam_target[kReportFamilies] = {
        target.inertial.row(k).sum(), target.coriolis_row(k), target.gravity.row(k).sum(),
        target.external.row(k).sum(), target.fric_dyn[k],     target.fric_stat[k],
        target.total[k]};
    const double fam_pred[kReportFamilies] = {pred.inertial.sum(), pred.coriolis, pred.gravity.sum(),
                                              pred.external.sum(), pred.fric_dyn,  pred.fric_stat,
                                              pred.total()};
    for (std::size_t f = 0; f < kReportFamilies; ++f) s[f].add(fam_target[f] - fam_pred[f], fam_target[f]);
  }
  return s;
}

EpochStats reduce(const std::vector<SampleStats>& per_sample) {
  EpochStats out;
  for (const auto& s : per_sample) {
    for (std::size_t f = 0; f < kReportFamilies; ++f) out.families[f].merge(s[f]);
  }
  return out;
}

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw InputError("inputs and targets differ in length");
}

template <class For>
std::vector<TorqueBreakdown> breakdowns_impl(const RobotModel& model, std::span<const Sample> samples, For each) {
  std::vector<TorqueBreakdown> out(samples.size());
  each(samples.size(), [&](std::size_t i) {
    out[i] = term_breakdown(tilted(model, samples[i].base_tilt), samples[i].state, samples[i].wrench);
  });
  return out;
}

template <class For>
std::vector<SampleInputs> encode_impl(const Network& net, const RobotModel& model,
                                      std::span<const Sample> samples, For each) {
  std::vector<SampleInputs> out(samples.size());
  each(samples.size(), [&](std::size_t i) {
    const Sample& s = samples[i];
    out[i] = net.encode(s.state, tilted(model, s.base_tilt).gravity(), s.wrench);
  });
  return out;
}

template <class For>
EpochStats evaluate_impl(const Network& net, std::span<const SampleInputs> inputs,
                         std::span<const TorqueBreakdown> targets, For each) {
  check_lengths(inputs.size(), targets.size());
  std::vector<SampleStats> per_sample(inputs.size());
  each(inputs.size(), [&](std::size_t i) { per_sample[i] = sample_stats(net, inputs[i], targets[i]); });
  return reduce(per_sample);
}

template <class For>
SparsityStats active_fraction_impl(const BasisLayout& layout, const GolgiParams& params,
                                   std::span<const Eigen::VectorXd> states, For each) {
  std::vector<double> fractions(states.size());
  GolgiParams p = params;
  p.p_syn = layout.cell_count();
  each(states.size(), [&](std::size_t i) {
    const auto mossy = mossy_sums(layout, std::span<const double>(states[i].data(), static_cast<std::size_t>(states[i].size())));
    const GolgiResult r = golgi_output(p, mossy, 0.0);
    fractions[i] = static_cast<double>(r.y.active()) / static_cast<double>(layout.cell_count());
  });
  SparsityStats out;
  out.samples = states.size();
  for (double f : fractions) {
    out.mean_fraction += f;
    out.max_fraction = std::max(out.max_fraction, f);
  }
  if (!fractions.empty()) out.mean_fraction /= static_cast<double>(fractions.size());
  return out;
}

template <class For>
void train_epoch_impl(Network& net, std::span<const SampleInputs> inputs, std::span<const TorqueBreakdown> targets,
                      std::span<const std::size_t> order, const TrainingConfig& cfg, For each) {
  check_lengths(inputs.size(), targets.size());
  each(net.zones.size(), [&](std::size_t z) {
    Microzone& mz = net.zones[z];
    for (std::size_t i : order) train_step(mz, inputs[i], targets[i], cfg);
  });
}

}  // namespace

std::vector<TorqueBreakdown> breakdowns_serial(const RobotModel& model, std::span<const Sample> samples) {
  return breakdowns_impl(model, samples, [](std::size_t n, auto&& fn) { serial_for(n, fn); });
}

std::vector<TorqueBreakdown> breakdowns_omp(const RobotModel& model, std::span<const Sample> samples) {
  return breakdowns_impl(model, samples, [](std::size_t n, auto&& fn) { parallel_for(n, fn); });
}

std::vector<SampleInputs> encode_serial(const Network& net, const RobotModel& model,
                                        std::span<const Sample> samples) {
  return encode_impl(net, model, samples, [](std::size_t n, auto&& fn) { serial_for(n, fn); });
}

std::vector<SampleInputs> encode_omp(const Network& net, const RobotModel& model,
                                     std::span<const Sample> samples) {
  return encode_impl(net, model, samples, [](std::size_t n, auto&& fn) { parallel_for(n, fn); });
}

EpochStats evaluate_serial(const Network& net, std::span<const SampleInputs> inputs,
                           std::span<const TorqueBreakdown> targets) {
  return evaluate_impl(net, inputs, targets, [](std::size_t n, auto&& fn) { serial_for(n, fn); });
}

EpochStats evaluate_omp(const Network& net, std::span<const SampleInputs> inputs,
                        std::span<const TorqueBreakdown> targets) {
  return evaluate_impl(net, inputs, targets, [](std::size_t n, auto&& fn) { parallel_for(n, fn); });
}

SparsityStats active_fraction_serial(const BasisLayout& layout, const GolgiParams& params,
                                     std::span<const Eigen::VectorXd> states) {
  return active_fraction_impl(layout, params, states, [](std::size_t n, auto&& fn) { serial_for(n, fn); });
}

SparsityStats active_fraction_omp(const BasisLayout& layout, const GolgiParams& params,
                                  std::span<const Eigen::VectorXd> states) {
  return active_fraction_impl(layout, params, states, [](std::size_t n, auto&& fn) { parallel_for(n, fn); });
}

void train_epoch_serial(Network& net, std::span<const SampleInputs> inputs,
                        std::span<const TorqueBreakdown> targets, std::span<const std::size_t> order,
                        const TrainingConfig& cfg) {
  train_epoch_impl(net, inputs, targets, order, cfg, [](std::size_t n, auto&& fn) { serial_for(n, fn); });
}

void train_epoch_omp(Network& net, std::span<const SampleInputs> inputs,
                     std::span<const TorqueBreakdown> targets, std::span<const std::size_t> order,
                     const TrainingConfig& cfg) {
  train_epoch_impl(net, inputs, targets, order, cfg, [](std::size_t n, auto&& fn) { parallel_for(n, fn); });
}

}  // namespace cerebellum::kernels
