#include "cerebellum/experiment.hpp"

#include <cmath>
#include <ostream>
#include <random>

#include "cerebellum/errors.hpp"
#include "cerebellum/kernels.hpp"
#include "cerebellum/text_format.hpp"

namespace cerebellum {

std::vector<Eigen::VectorXd> workspace_states(const BasisLayout& layout, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Eigen::VectorXd> out(count, Eigen::VectorXd(layout.dims()));
  for (auto& x : out) {
    for (int k = 0; k < layout.dims(); ++k) {
      x[k] = layout.range_min[k] + unit(rng) * (layout.range_max[k] - layout.range_min[k]);
    }
  }
  return out;
}

Network build_network(const ExperimentConfig& cfg) {
  validate(cfg);
  GolgiParams golgi = cfg.golgi;
  golgi.p_syn = cfg.position.cell_count();
  const auto states = workspace_states(cfg.position, cfg.calibration_samples, cfg.dataset.seed + 1);
  golgi = calibrate_sparsity(cfg.position, golgi, states);
  return build_microzones(cfg.robot, cfg.position, cfg.speed, golgi);
}

bool EvalReport::sparsity_in_band() const {
  return sparsity.mean_fraction >= 0.5 * sparsity_target && sparsity.mean_fraction <= 2.0 * sparsity_target;
}

void EvalReport::write_csv(std::ostream& os) const {
  os << "metric,term_family,value\n";
  for (std::size_t f = 0; f < kReportFamilies; ++f) {
    const auto& s = stats.families[f];
    const std::string name = report_family_name(f);
    os << "relative_rms," << name << ',' << format_double(s.relative_rms()) << '\n';
    os << "rms," << name << ',' << format_double(s.rms()) << '\n';
    os << "max_abs_err," << name << ',' << format_double(s.max_abs_err) << '\n';
    os << "target_rms," << name << ','
       << format_double(s.count == 0 ? 0.0 : std::sqrt(s.sum_sq_target / static_cast<double>(s.count))) << '\n';
  }
  os << "sparsity_mean,all," << format_double(sparsity.mean_fraction) << '\n';
  os << "sparsity_max,all," << format_double(sparsity.max_fraction) << '\n';
  os << "sparsity_target,all," << format_double(sparsity_target) << '\n';
  os << "sparsity_in_band,all," << (sparsity_in_band() ? 1 : 0) << '\n';
  os << "samples,all," << samples << '\n';
}

EvalReport evaluate_report(const Network& net, const RobotModel& model, std::span<const Sample> samples,
                           std::span<const TorqueBreakdown> targets, std::size_t sparsity_samples,
                           std::uint64_t seed) {
  if (samples.size() != targets.size()) throw InputError("samples and targets differ in length");
  EvalReport r;
  const auto inputs = kernels::encode_omp(net, model, samples);
  r.stats = kernels::evaluate_omp(net, inputs, targets);
  r.samples = samples.size();
  r.sparsity_target = net.golgi.sparsity_target;
  const auto states = workspace_states(net.position, sparsity_samples, seed);
  r.sparsity = kernels::active_fraction_omp(net.position, net.golgi, states);
  return r;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  RunResult out{build_network(cfg), {}, {}, {}};
  out.dataset = generate(cfg.robot, cfg.position, cfg.dataset, layout_hash(cfg.position, cfg.speed));
  const std::size_t n_train = out.dataset.train_count();
  const std::span<const Sample> all(out.dataset.samples);
  const std::span<const TorqueBreakdown> targets(out.dataset.targets);
  const auto inputs = kernels::encode_omp(out.net, cfg.robot, all.first(n_train));
  out.training = train(out.net, inputs, targets.first(n_train), cfg.training);
  out.holdout = evaluate_report(out.net, cfg.robot, all.subspan(n_train), targets.subspan(n_train),
                                cfg.calibration_samples, cfg.dataset.seed + 2);
  return out;
}

}  // namespace cerebellum
