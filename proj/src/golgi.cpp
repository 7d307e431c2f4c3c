#include "cerebellum/golgi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cerebellum/errors.hpp"
#include "cerebellum/kernels.hpp"

namespace cerebellum {

namespace {

constexpr std::size_t kMaxIterations = 10000;
constexpr double kStepTolerance = 1e-12;

struct Drive {
  double sum_y = 0.0;
  double slope = 0.0;  // d(sum Y)/dO
};

Drive granule_drive(const GolgiParams& p, std::span<const double> mossy, double o) {
  Drive d;
  for (std::size_t i = 0; i < mossy.size(); ++i) {
    double pre;
    double dpre;
    if (p.mode == GolgiMode::threshold) {
      pre = mossy[i] - p.sigma_at(i) - p.k_th * o;
      dpre = -p.k_th;
    } else {
      pre = (1.0 - p.k_g * o) * mossy[i] - p.sigma_at(i);
      dpre = -p.k_g * mossy[i];
    }
    if (pre > 0.0) {
      d.sum_y += pre * p.g_gr;
      d.slope += dpre * p.g_gr;
    }
  }
  return d;
}

GolgiResult solve(const GolgiParams& p, std::span<const double> mossy, double r_sum) {
  if (mossy.size() != p.p_syn) {
    throw InputError("mossy input has " + std::to_string(mossy.size()) + " cells, expected p_syn = " +
                     std::to_string(p.p_syn));
  }
  if (p.sigma.size() != 1 && p.sigma.size() != mossy.size()) {
    throw InputError("sigma must hold one value or one per cell");
  }
  // residual(O) = O - F(O); increasing, concave, residual(0) <= 0.
  auto residual = [&](double o, double& deriv) {
    const Drive d = granule_drive(p, mossy, o);
    const double pre = (p.h_u * d.sum_y + p.h_l * r_sum + p.theta) * p.h_go;
    if (pre > 0.0) {
      deriv = 1.0 - p.h_go * p.h_u * d.slope;
      return o - pre;
    }
    deriv = 1.0;
    return o;
  };

  double deriv = 1.0;
  double lo = 0.0;
  double r_lo = residual(lo, deriv);
  double hi = lo - r_lo;  // F(0) bounds the root from above
  double o = lo;
  double r = r_lo;
  std::size_t it = 0;
  while (r != 0.0) {
    if (++it > kMaxIterations) throw ConvergenceError("Golgi loop did not reach equilibrium", it - 1);
    double next = o - r / deriv;
    if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
    const double step = next - o;
    o = next;
    r = residual(o, deriv);
    if (r < 0.0) lo = o;
    if (r > 0.0) hi = o;
    if (std::abs(step) < kStepTolerance) break;
  }
  if (!std::isfinite(o)) throw NumericalError("Golgi rate is not finite");

  GolgiResult out;
  out.rate = o;
  out.iterations = it;
  out.y.cell_count = mossy.size();
  for (std::size_t i = 0; i < mossy.size(); ++i) {
    const double pre = p.mode == GolgiMode::threshold
                           ? mossy[i] - p.sigma_at(i) - p.k_th * o
                           : (1.0 - p.k_g * o) * mossy[i] - p.sigma_at(i);
    const double y = pre * p.g_gr;
    if (pre > 0.0 && y > 0.0) {
      out.y.indices.push_back(static_cast<std::uint32_t>(i));
      out.y.values.push_back(y);
    }
  }
  return out;
}

}  // namespace

void validate(const GolgiParams& p) {
  auto nonneg = [](double v, const char* field) {
    if (!(std::isfinite(v) && v >= 0.0)) throw ConfigError(std::string("golgi.") + field, 0, "must be >= 0");
  };
  nonneg(p.k_th, "K_th");
  nonneg(p.k_g, "K_g");
  nonneg(p.g_gr, "G_Gr");
  nonneg(p.h_u, "H_U");
  nonneg(p.h_l, "H_L");
  nonneg(p.h_go, "H_Go");
  nonneg(p.theta, "theta");
  if (!(p.sparsity_target > 0.0 && p.sparsity_target < 1.0)) {
    throw ConfigError("golgi.sparsity_target", 0, "must lie in (0, 1)");
  }
  if (p.sigma.empty()) throw ConfigError("golgi.sigma", 0, "at least one threshold is required");
  for (double s : p.sigma) {
    if (!std::isfinite(s)) throw ConfigError("golgi.sigma", 0, "thresholds must be finite");
  }
}

GolgiResult golgi_output_gain(const GolgiParams& params, std::span<const double> mossy, double r_sum) {
  if (params.mode != GolgiMode::gain) throw InputError("golgi_output_gain requires gain mode");
  return solve(params, mossy, r_sum);
}

GolgiResult golgi_output_threshold(const GolgiParams& params, std::span<const double> mossy,
                                   double r_sum) {
  if (params.mode != GolgiMode::threshold) {
    throw InputError("golgi_output_threshold requires threshold mode");
  }
  return solve(params, mossy, r_sum);
}

GolgiResult golgi_output(const GolgiParams& params, std::span<const double> mossy, double r_sum) {
  return solve(params, mossy, r_sum);
}

double loop_gain(const GolgiParams& p, std::size_t m) {
  return p.g_gr * p.k_g * p.h_u * p.h_go * static_cast<double>(m);
}

double closed_loop_sum(const GolgiParams& p, double mossy_total, double sigma_total, std::size_t m,
                       double r_sum) {
  const double md = static_cast<double>(m);
  const double denom = 1.0 + loop_gain(p, m);
  const double input_term = p.g_gr * (mossy_total - sigma_total - md * p.k_th * p.h_go * p.theta);
  // L (H_L / H_U) sum R with the H_U factor cancelled.
  const double r_term = p.g_gr * p.k_g * p.h_go * md * p.h_l * r_sum;
  return input_term / denom - r_term / denom;
}

double closed_loop_sum(const GolgiParams& p, std::span<const double> mossy,
                       std::span<const std::uint32_t> active, double r_sum) {
  double m_total = 0.0;
  double s_total = 0.0;
  for (auto i : active) {
    m_total += mossy[i];
    s_total += p.sigma_at(i);
  }
  return closed_loop_sum(p, m_total, s_total, active.size(), r_sum);
}

LineParams line_params(const GolgiParams& p, std::size_t m, double sigma_total) {
  const double md = static_cast<double>(m);
  const double denom = 1.0 + loop_gain(p, m);
  LineParams out;
  out.k1 = p.g_gr / denom;
  out.k2 = p.g_gr * (sigma_total + md * p.k_th * p.h_go * p.theta) / denom;
  out.k3 = p.g_gr * p.k_g * p.h_go * md * p.h_l / denom;
  return out;
}

LineParams line_params(const GolgiParams& p, std::size_t m) {
  double mean = 0.0;
  for (double s : p.sigma) mean += s;
  mean /= static_cast<double>(p.sigma.size());
  return line_params(p, m, mean * static_cast<double>(m));
}

SparsityStats active_fraction(const BasisLayout& layout, const GolgiParams& params,
                              std::span<const Eigen::VectorXd> states) {
  return kernels::active_fraction_omp(layout, params, states);
}

GolgiParams calibrate_sparsity(const BasisLayout& layout, const GolgiParams& params,
                               std::span<const Eigen::VectorXd> states) {
  if (states.empty()) throw InputError("calibration needs at least one sample state");
  validate(params);
  const double target = params.sparsity_target;
  auto in_band = [&](double f) { return f >= 0.5 * target && f <= 2.0 * target; };
  auto shifted = [&](double delta) {
    GolgiParams p = params;
    for (double& s : p.sigma) s += delta;
    return p;
  };
  auto fraction = [&](double delta) { return active_fraction(layout, shifted(delta), states).mean_fraction; };

  double best_f = fraction(0.0);
  if (in_band(best_f)) return params;
  auto closer = [&](double f) {
    auto dist = [&](double x) { return x > 0.0 ? std::abs(std::log(x / target)) : std::numeric_limits<double>::infinity(); };
    return dist(f) < dist(best_f);
  };

  // Fraction is non-increasing in the shift. Bracket first, then bisect.
  double lo = 0.0;
  double hi = 0.0;
  double step = 1.0;
  if (best_f > target) {
    for (int k = 0; k < 60; ++k) {
      hi = lo + step;
      const double f = fraction(hi);
      if (closer(f)) best_f = f;
      if (in_band(f)) return shifted(hi);
      if (f < target) break;
      lo = hi;
      step *= 2.0;
    }
  } else {
    for (int k = 0; k < 60; ++k) {
      lo = hi - step;
      const double f = fraction(lo);
      if (closer(f)) best_f = f;
      if (in_band(f)) return shifted(lo);
      if (f > target) break;
      hi = lo;
      step *= 2.0;
    }
  }
  for (int k = 0; k < 80; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double f = fraction(mid);
    if (closer(f)) best_f = f;
    if (in_band(f)) return shifted(mid);
    if (f > target) lo = mid; else hi = mid;
  }
  throw NumericalError("sparsity calibration failed: closest mean active fraction " +
                       std::to_string(best_f) + " for target " + std::to_string(target));
}

}  // namespace cerebellum
