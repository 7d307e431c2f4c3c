#include "cerebellum/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <utility>

#include "cerebellum/errors.hpp"
#include "cerebellum/kernels.hpp"
#include "cerebellum/text_format.hpp"

namespace cerebellum {

void validate(const TrainingConfig& cfg) {
  if (!(cfg.rate > 0.0) || !std::isfinite(cfg.rate)) throw ConfigError("training.rate", 0, "must be positive");
  if (cfg.epochs < 0) throw ConfigError("training.epochs", 0, "must be >= 0");
  if (!(cfg.epsilon >= 0.0)) throw ConfigError("training.epsilon", 0, "must be >= 0");
}

TermErrors term_errors(const TermPredictions& pred, const TorqueBreakdown& target, int k) {
  const int n = target.dof();
  TermErrors e;
  e.inertial.resize(n);
  for (int m = 0; m < n; ++m) e.inertial[m] = target.inertial(k, m) - pred.inertial[m];
  e.coriolis = target.coriolis_row(k) - pred.coriolis;
  for (int c = 0; c < 2; ++c) e.gravity[c] = target.gravity(k, c) - pred.gravity[c];
  for (int c = 0; c < 3; ++c) e.external[c] = target.external(k, c) - pred.external[c];
  e.fric_dyn = target.fric_dyn[k] - pred.fric_dyn;
  e.fric_stat = target.fric_stat[k] - pred.fric_stat;
  e.total = target.total[k] - pred.total();
  return e;
}

namespace {

// Trainable weights paired with their regressors for one error signal.
using Group = std::vector<std::pair<double*, double>>;

void add_cepu(Group& g, CePU& c, const SparseActivation& act, double mod) {
  for (std::size_t a = 0; a < act.indices.size(); ++a) {
    g.emplace_back(&c.w_pc[act.indices[a]], act.values[a] * mod);
  }
}

void apply(const Group& g, double err, const TrainingConfig& cfg) {
  if (g.empty() || err == 0.0) return;
  double norm = cfg.epsilon * static_cast<double>(g.size());
  for (const auto& [w, x] : g) norm += x * x;
  if (norm == 0.0) return;
  const double gain = cfg.rate * err / norm;
  for (const auto& [w, x] : g) *w += gain * x;
}

bool finite(const TermErrors& e) {
  return e.inertial.allFinite() && std::isfinite(e.coriolis) && e.gravity.allFinite() &&
         e.external.allFinite() && std::isfinite(e.fric_dyn) && std::isfinite(e.fric_stat) &&
         std::isfinite(e.total);
}

}  // namespace

TermErrors train_step(Microzone& mz, const SampleInputs& in, const TorqueBreakdown& target,
                      const TrainingConfig& cfg) {
  const int n = mz.dof;
  const int k = mz.joint;
  const TermErrors err = term_errors(microzone_eval(mz, in), target, k);
  if (!finite(err)) throw NumericalError("non-finite training error at joint " + std::to_string(k));

  std::vector<SparseActivation> modulated;
  modulated.reserve(n);
  for (int i = 0; i < n; ++i) modulated.push_back(modulate(in.position, in.qd[i]));
  std::vector<double> basket(n);
  for (int j = 0; j < n; ++j) basket[j] = basket_eval(mz.baskets[j], modulated[j]);

  std::vector<Group> groups;
  std::vector<double> errors;
  auto push = [&](Group g, double e) {
    groups.push_back(std::move(g));
    errors.push_back(e);
  };

  for (int m = 0; m < n; ++m) {
    Group g;
    add_cepu(g, mz.inertial(m), in.position, in.qdd[m]);
    push(std::move(g), err.inertial[m]);
  }
  {
    Group g;
    for (int i = 0; i < n; ++i) {
      double factor = 0.0;
      for (int j = 0; j < n; ++j) {
        if (i == k && j == k) continue;
        factor += basket[j];
      }
      add_cepu(g, mz.coriolis(i), modulated[i], factor);
    }
    push(std::move(g), err.coriolis);
  }
  for (int c = 0; c < 2; ++c) {
    Group g;
    add_cepu(g, mz.gravity(c), in.position, in.gravity[c]);
    push(std::move(g), err.gravity[c]);
  }
  for (int c = 0; c < 3; ++c) {
    Group g;
    add_cepu(g, mz.external(c), in.position, in.wrench[c]);
    push(std::move(g), err.external[c]);
  }
  {
    StellateCell& s = mz.dynamic_stellate();
    push(Group{{&s.w_sp, stellate_reconstruction(s, modulated[k])}}, err.fric_dyn);
  }
  {
    StellateCell& s = mz.static_stellate();
    const SparseActivation& act = in.speed[k];
    Group g;
    for (std::size_t a = 0; a < act.indices.size(); ++a) {
      g.emplace_back(&s.w_sc[act.indices[a]], act.values[a] * s.w_sp);
    }
    push(std::move(g), err.fric_stat);
  }

  if (cfg.supervision == Supervision::per_term) {
    for (std::size_t g = 0; g < groups.size(); ++g) apply(groups[g], errors[g], cfg);
  } else {
    Group all;
    for (auto& g : groups) all.insert(all.end(), g.begin(), g.end());
    apply(all, err.total, cfg);
  }
  return err;
}

std::string report_family_name(std::size_t f) {
  return f < kTermFamilies.size() ? to_string(kTermFamilies[f]) : "total";
}

double FamilyStats::rms() const {
  return count == 0 ? 0.0 : std::sqrt(sum_sq_err / static_cast<double>(count));
}

double FamilyStats::relative_rms() const {
  if (sum_sq_target == 0.0) return sum_sq_err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(sum_sq_err / sum_sq_target);
}

void FamilyStats::merge(const FamilyStats& o) {
  sum_sq_err += o.sum_sq_err;
  sum_sq_target += o.sum_sq_target;
  max_abs_err = std::max(max_abs_err, o.max_abs_err);
  count += o.count;
}

void FamilyStats::add(double err, double target) {
  sum_sq_err += err * err;
  sum_sq_target += target * target;
  max_abs_err = std::max(max_abs_err, std::abs(err));
  ++count;
}

void TrainingReport::write_csv(std::ostream& os) const {
  os << "epoch,term_family,rms,max_abs_err\n";
  for (const auto& e : epochs) {
    for (std::size_t f = 0; f < kReportFamilies; ++f) {
      os << e.epoch << ',' << report_family_name(f) << ',' << format_double(e.families[f].rms()) << ','
         << format_double(e.families[f].max_abs_err) << '\n';
    }
  }
}

EpochStats evaluate(const Network& net, std::span<const SampleInputs> inputs,
                    std::span<const TorqueBreakdown> targets) {
  return kernels::evaluate_omp(net, inputs, targets);
}

TrainingReport train(Network& net, std::span<const SampleInputs> inputs,
                     std::span<const TorqueBreakdown> targets, const TrainingConfig& cfg) {
  validate(cfg);
  if (inputs.size() != targets.size()) throw InputError("inputs and targets differ in length");
  if (inputs.empty()) throw InputError("training needs a nonempty dataset");
  std::size_t count = inputs.size();
  if (cfg.sample_count > 0) count = std::min(count, cfg.sample_count);
  inputs = inputs.first(count);
  targets = targets.first(count);

  TrainingReport report;
  report.epochs.push_back(evaluate(net, inputs, targets));
  const EpochStats& baseline = report.epochs.front();

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(count);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    kernels::train_epoch_omp(net, inputs, targets, order, cfg);
    EpochStats stats = evaluate(net, inputs, targets);
    stats.epoch = epoch;
    const EpochStats& prev = report.epochs.back();
    for (std::size_t f = 0; f < kReportFamilies; ++f) {
      const double now = stats.families[f].rms();
      const double before = prev.families[f].rms();
      const double floor = 1e-6 * baseline.families[f].rms();
      if (now > 10.0 * before && now > floor) {
        throw NumericalError("training diverged: " + report_family_name(f) + " RMS grew from " +
                             format_double(before) + " to " + format_double(now) + " in epoch " +
                             std::to_string(epoch));
      }
    }
    report.epochs.push_back(stats);
  }
  return report;
}

}  // namespace cerebellum
