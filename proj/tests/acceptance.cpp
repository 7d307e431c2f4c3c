// Acceptance run: one PASS/FAIL line per criterion, exit 1 when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cerebellum/arch.hpp"
#include "cerebellum/config.hpp"
#include "cerebellum/dataset.hpp"
#include "cerebellum/experiment.hpp"
#include "cerebellum/golgi.hpp"
#include "cerebellum/weights.hpp"
#include "network_fixtures.hpp"
#include "oracles.hpp"

using namespace cerebellum;
using namespace fixtures;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

Outcome architecture() {
  Outcome o;
  const ArchitectureParams p = arch_preset("n10-b16");
  const auto pu = pu_count(10);
  o.require(pu.first == 1220 && pu.second == 10, "pu_count(10)");
  const auto un = unstructured_table(p);
  const auto st = structured_table(p);
  o.require(un.address_bits == 120, "unstructured address bits");
  o.require(st.address_bits == 40, "structured address bits");
  o.require(st.memory_bytes == BigInt(1) << 40 && power_text(st.memory_bytes) == "1024^4", "structured memory");
  const auto t = latencies(p);
  o.require(t.multi == std::chrono::milliseconds(2), "t_multi");
  o.require(t.layered == std::chrono::microseconds(200) && meets_deadline(t.layered, p.t_c), "t_layered");
  if (o.pass) o.detail = "120 / 40 bits, 1024^4 B, 1220 + 10 PUs, 2 ms / 200 us";
  return o;
}

Outcome oracle_properties() {
  Outcome o;
  double worst_g = 0, worst_alpha = 0, worst_self = 0, worst_rt = 0, worst_row = 0;
  std::size_t states = 0;
  for (int n : {1, 2, 3}) {
    std::mt19937_64 rng(100 + static_cast<std::uint64_t>(n));
    for (int trial = 0; trial < 120; ++trial) {
      const RobotModel r = oracle::chain(n, rng);
      const VectorXd q = oracle::random_vec(n, 3.0, rng);
      const VectorXd qd = oracle::random_vec(n, 2.0, rng);
      const VectorXd qdd = oracle::random_vec(n, 4.0, rng);
      const ExternalWrench w{oracle::random_vec(1, 3, rng)[0], oracle::random_vec(1, 3, rng)[0],
                             oracle::random_vec(1, 1, rng)[0]};
      ++states;

      const MatrixXd D = inertia_matrix(r, q);
      o.require(D == D.transpose(), "D not symmetric");
      o.require(Eigen::LLT<MatrixXd>(D).info() == Eigen::Success, "D not positive definite");

      const VectorXd g = gravity_terms(r, q).torque;
      const VectorXd fd = oracle::fd_gradient([&](const VectorXd& x) { return potential_energy(r, x); }, q);
      worst_g = std::max(worst_g, (g - fd).norm() / std::max(1.0, g.norm()));

      const VectorXd h = coriolis_terms(r, q, qd).h;
      const double alpha = 1.7;
      const VectorXd h2 = coriolis_terms(r, q, alpha * qd).h;
      worst_alpha = std::max(worst_alpha, (h2 - alpha * alpha * h).norm() / std::max(1.0, h2.norm()));
      const auto c = coriolis_terms(r, q, qd);
      for (int k = 0; k < n; ++k) worst_self = std::max(worst_self, std::abs(c.hkij[k](k, k)));

      const JointState s{q, qd, qdd};
      const VectorXd tau = inverse_dynamics(r, s, w);
      const VectorXd back = forward_dynamics(r, q, qd, tau, w);
      worst_rt = std::max(worst_rt, (back - qdd).norm() / std::max(1.0, qdd.norm()));

      const TorqueBreakdown b = term_breakdown(r, s, w);
      for (int k = 0; k < n; ++k) {
        worst_row = std::max(worst_row, std::abs(b.row_sum(k) - b.total[k]) / std::max(1.0, b.row_abs_sum(k)));
      }
    }
  }
  o.require(worst_g <= 1e-6, "gravity vs potential gradient " + std::to_string(worst_g));
  o.require(worst_alpha <= 1e-9, "h scaling " + std::to_string(worst_alpha));
  o.require(worst_self <= 1e-12, "h_kkk " + std::to_string(worst_self));
  o.require(worst_rt <= 1e-9, "ID/FD roundtrip " + std::to_string(worst_rt));
  o.require(worst_row <= 1e-12, "row sums " + std::to_string(worst_row));
  if (o.pass) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%zu states, worst gradient %.1e, scaling %.1e, roundtrip %.1e", states, worst_g,
                  worst_alpha, worst_rt);
    o.detail = buf;
  }
  return o;
}

Outcome golgi_consistency() {
  Outcome o;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t p = 80;
  double worst = 0.0, max_gain = 0.0;
  for (int point = 0; point < 100; ++point) {
    GolgiParams g;
    g.mode = point % 2 ? GolgiMode::gain : GolgiMode::threshold;
    g.p_syn = p;
    g.g_gr = 0.5 + u(rng);
    g.h_u = 0.5 + u(rng);
    g.h_l = u(rng);
    g.h_go = 0.5 + u(rng);
    g.theta = u(rng);
    g.sigma = {0.3 * u(rng)};
    // Loop gain over the full layer spans 1e-2 .. 1e3.
    const double target_gain = std::pow(10.0, -2.0 + 5.0 * u(rng));
    g.k_th = g.k_g = target_gain / (g.g_gr * g.h_u * g.h_go * static_cast<double>(p));
    std::vector<double> m(p);
    for (std::size_t i = 0; i < p; ++i) {
      m[i] = g.mode == GolgiMode::gain ? (u(rng) < 0.6 ? 1.0 : 0.0) : 3.0 * u(rng);
    }
    const double r_sum = 0.5 * u(rng);
    const double rate = oracle::golgi_bisect(g, m, r_sum);
    double sum_y = 0.0;
    oracle::golgi_drive(g, m, r_sum, rate, &sum_y);
    std::vector<std::uint32_t> active;
    for (std::size_t i = 0; i < p; ++i) {
      const double pre = g.mode == GolgiMode::threshold ? m[i] - g.sigma[0] - g.k_th * rate
                                                        : (1 - g.k_g * rate) * m[i] - g.sigma[0];
      if (pre > 0) active.push_back(static_cast<std::uint32_t>(i));
    }
    max_gain = std::max(max_gain, loop_gain(g, active.size()));
    worst = std::max(worst, rel(closed_loop_sum(g, m, active, r_sum), sum_y));
    worst = std::max(worst, rel(golgi_output(g, m, r_sum).y.sum(), sum_y));
  }
  o.require(max_gain < 1e3, "loop gain out of range");
  o.require(worst <= 1e-8, "closed form vs equilibrium " + std::to_string(worst));
  char buf[160];
  std::snprintf(buf, sizeof buf, "100 points, loop gain up to %.0f, worst deviation %.1e", max_gain, worst);
  if (o.pass) o.detail = buf;
  return o;
}

Outcome sparsity_band() {
  Outcome o;
  const ExperimentConfig cfg = default_experiment();
  const Network net = build_network(cfg);
  const auto states = workspace_states(cfg.position, 1000, 2024);
  const auto s = active_fraction(cfg.position, net.golgi, states);
  o.require(s.mean_fraction >= 0.005 && s.mean_fraction <= 0.02, "mean active fraction out of band");
  char buf[120];
  std::snprintf(buf, sizeof buf, "mean active fraction %.4f over %zu samples", s.mean_fraction, s.samples);
  o.detail = o.pass ? buf : o.detail + " (" + buf + ")";
  return o;
}

Outcome structural_linearity() {
  Outcome o;
  Network net = small_network(3);
  randomize(net, 6);
  std::mt19937_64 rng(7);
  std::size_t checks = 0;
  for (int trial = 0; trial < 50; ++trial) {
    auto in = inputs_for(net, rng);
    for (const auto& mz : net.zones) {
      for (const auto& c : mz.cepus) {
        const double base = cepu_eval(c, in.position, 0.37);
        o.require(cepu_eval(c, in.position, 0.74) == 2 * base, "CePU not linear in its channel");
        o.require(cepu_eval(c, in.position, 0.0) == 0.0, "CePU output without drive");
        ++checks;
      }
      const double row = coriolis_row_eval(mz, speed_modulated(in));
      SampleInputs doubled = in;
      doubled.qd *= 2.0;
      o.require(coriolis_row_eval(mz, speed_modulated(doubled)) == 4.0 * row, "coriolis row not quadratic");
    }
    const int k = trial % 3;
    SampleInputs self = in;
    const double v = self.qd[k];
    self.qd.setZero();
    self.qd[k] = v;
    o.require(coriolis_row_eval(net.zones[static_cast<std::size_t>(k)], speed_modulated(self)) == 0.0,
              "self-term pathway nonzero");
  }
  if (o.pass) o.detail = std::to_string(checks) + " exact CePU ratio checks, 150 coriolis rows";
  return o;
}

Outcome learning_correctness() {
  Outcome o;
  Network net = small_network(2, FieldShape::triangular);
  randomize(net, 15);
  std::mt19937_64 rng(16);
  const auto in = inputs_for(net, rng);
  const auto t = target_for(oracle::two_link(), in, rng);
  double worst_dir = 0.0;
  for (std::size_t z = 0; z < 2; ++z) {
    for (int family = 0; family < 6; ++family) {
      const int count = family == 0 || family == 2 ? 2 : family == 3 ? 3 : 1;
      for (int index = 0; index < count; ++index) {
        Microzone mz = net.zones[z];
        auto ws = weights_of(mz, family, index);
        Eigen::VectorXd grad(static_cast<Eigen::Index>(ws.size()));
        for (std::size_t i = 0; i < ws.size(); ++i) {
          const double w0 = *ws[i], h = 1e-6;
          *ws[i] = w0 + h;
          const double ep = family_error(mz, in, t, family, index);
          *ws[i] = w0 - h;
          const double em = family_error(mz, in, t, family, index);
          *ws[i] = w0;
          grad[static_cast<Eigen::Index>(i)] = (0.5 * ep * ep - 0.5 * em * em) / (2 * h);
        }
        Microzone trained = mz;
        train_step(trained, in, t, TrainingConfig{});
        auto tw = weights_of(trained, family, index);
        Eigen::VectorXd step(static_cast<Eigen::Index>(tw.size()));
        for (std::size_t i = 0; i < tw.size(); ++i) step[static_cast<Eigen::Index>(i)] = *tw[i] - *ws[i];
        worst_dir = std::max(worst_dir, (step / step.norm() + grad / grad.norm()).norm());
      }
    }
  }
  double worst_rate = 0.0;
  for (double eta : {0.1, 0.5, 0.9}) {
    Microzone mz = net.zones[1];
    TrainingConfig cfg;
    cfg.rate = eta;
    double prev = term_errors(microzone_eval(mz, in), t, 1).gravity[1];
    for (int step = 0; step < 8; ++step) {
      train_step(mz, in, t, cfg);
      const double e = term_errors(microzone_eval(mz, in), t, 1).gravity[1];
      worst_rate = std::max(worst_rate, std::abs(e / prev - (1.0 - eta)));
      prev = e;
    }
  }
  o.require(worst_dir <= 1e-4, "update direction off by " + std::to_string(worst_dir));
  o.require(worst_rate <= 1e-6, "decay rate off by " + std::to_string(worst_rate));
  char buf[160];
  std::snprintf(buf, sizeof buf, "direction error %.1e, decay-rate error %.1e", worst_dir, worst_rate);
  if (o.pass) o.detail = buf;
  return o;
}

struct RunBytes {
  std::string dataset, weights, training, eval;
};

RunBytes run_bytes(const ExperimentConfig& cfg, RunResult* keep) {
  RunResult r = run_experiment(cfg);
  RunBytes b;
  std::ostringstream d, w, t, e;
  write_dataset(d, r.dataset, cfg.robot.dof());
  save_weights(w, r.net, cfg.robot);
  r.training.write_csv(t);
  r.holdout.write_csv(e);
  b = {d.str(), w.str(), t.str(), e.str()};
  if (keep) *keep = std::move(r);
  return b;
}

RunResult end_to_end_run;
RunBytes end_to_end_bytes;
double end_to_end_seconds = 0.0;

Outcome end_to_end() {
  Outcome o;
  const ExperimentConfig cfg = default_experiment();
  const auto start = std::chrono::steady_clock::now();
  end_to_end_bytes = run_bytes(cfg, &end_to_end_run);
  end_to_end_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto& fam = end_to_end_run.holdout.stats.families;
  o.require(cfg.dataset.count == 10000 && cfg.training.epochs <= 50 && cfg.robot.dof() == 2, "config drifted");
  o.require(fam[kReportFamilies - 1].relative_rms() <= 0.05, "total relative RMS above 5%");
  std::string detail;
  char buf[96];
  for (std::size_t f = 0; f < kReportFamilies; ++f) {
    o.require(fam[f].relative_rms() <= 0.10, report_family_name(f) + " relative RMS above 10%");
    std::snprintf(buf, sizeof buf, "%s%s %.2f%%", f ? ", " : "", report_family_name(f).c_str(),
                  100 * fam[f].relative_rms());
    detail += buf;
  }
  std::snprintf(buf, sizeof buf, " in %.1f s", end_to_end_seconds);
  o.detail = (o.pass ? "" : o.detail + ": ") + detail + buf;
  return o;
}

Outcome determinism() {
  Outcome o;
  const RunBytes again = run_bytes(default_experiment(), nullptr);
  o.require(!again.dataset.empty() && again.dataset == end_to_end_bytes.dataset, "datasets differ");
  o.require(again.weights == end_to_end_bytes.weights, "weight stores differ");
  o.require(again.training == end_to_end_bytes.training, "training reports differ");
  o.require(again.eval == end_to_end_bytes.eval, "evaluation reports differ");
  if (o.pass) {
    o.detail = "dataset " + std::to_string(again.dataset.size()) + " B, weights " +
               std::to_string(again.weights.size()) + " B, reports identical";
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"architecture arithmetic", architecture},
      {"oracle properties", oracle_properties},
      {"golgi closed form", golgi_consistency},
      {"sparsity band", sparsity_band},
      {"structural linearity", structural_linearity},
      {"learning rule", learning_correctness},
      {"end-to-end approximation", end_to_end},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %zu %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed ? 1 : 0;
}
