#pragma once

// Granule layer with Golgi-cell activity control.
//
// Granule output, threshold control:  Y_i = max(0, (M_i - sigma_i - K_th O) G_Gr)
// Granule output, gain control:       Y_i = max(0, ((1 - K_g O) M_i - sigma_i) G_Gr)
// Golgi rate:                         O   = max(0, (H_U sum Y + H_L sum R + theta) H_Go)
//
// M_i is the summed mossy drive of granule cell i. Because every gain is
// non-negative, O - F(O) is strictly increasing and concave in O, so the loop
// has exactly one equilibrium; it is found with a bracketed Newton iteration
// that is exact on each linear piece.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cerebellum/encoding.hpp"

namespace cerebellum {

enum class GolgiMode { threshold, gain };

struct GolgiParams {
  GolgiMode mode = GolgiMode::threshold;
  double k_th = 0.001;
  double k_g = 0.001;
  double g_gr = 1.0;
  double h_u = 1.0;
  double h_l = 1.0;
  double h_go = 1.0;
  double theta = 1.0;
  std::vector<double> sigma{0.0};  // one shared threshold, or one per cell
  std::size_t p_syn = 0;           // upper-tree synapses, must equal the layout cell count
  std::size_t q_low = 1;           // lower-tree synapses (R inputs)
  double sparsity_target = 0.01;

  double sigma_at(std::size_t i) const { return sigma.size() == 1 ? sigma[0] : sigma[i]; }
};

void validate(const GolgiParams& params);

struct GolgiResult {
  SparseActivation y;  // active granule outputs
  double rate = 0.0;   // Golgi output O at the equilibrium
  std::size_t iterations = 0;
};

/// Gain-control mode; requires params.mode == gain.
GolgiResult golgi_output_gain(const GolgiParams& params, std::span<const double> mossy,
                              double r_sum);
/// Threshold-control mode; requires params.mode == threshold.
GolgiResult golgi_output_threshold(const GolgiParams& params, std::span<const double> mossy,
                                   double r_sum);
/// Dispatches on params.mode.
GolgiResult golgi_output(const GolgiParams& params, std::span<const double> mossy, double r_sum);

/// G_Gr K_g H_U H_Go m
double loop_gain(const GolgiParams& params, std::size_t m);

/// Closed-form summed output over m active cells:
///   G_Gr (sum M - sum sigma - m K_th H_Go theta) / (1 + L)
///   - L (H_L / H_U) sum R / (1 + L),   L = loop_gain(m)
double closed_loop_sum(const GolgiParams& params, double mossy_total, double sigma_total,
                       std::size_t m, double r_sum);
/// Same, with the sums taken over the listed active cells.
double closed_loop_sum(const GolgiParams& params, std::span<const double> mossy,
                       std::span<const std::uint32_t> active, double r_sum);

/// sum Y = k1 M - k2 - k3 R for a fixed active count.
struct LineParams {
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;

  double eval(double mossy_total, double r_sum) const { return k1 * mossy_total - k2 - k3 * r_sum; }
};

/// `sigma_total` is the summed threshold of the active cells.
LineParams line_params(const GolgiParams& params, std::size_t m, double sigma_total);
/// Uses the shared threshold (or the mean of per-cell thresholds).
LineParams line_params(const GolgiParams& params, std::size_t m);

struct SparsityStats {
  double mean_fraction = 0.0;
  double max_fraction = 0.0;
  std::size_t samples = 0;
};

/// Active fraction m / p of the granule layer at each sample, R inputs silent.
SparsityStats active_fraction(const BasisLayout& layout, const GolgiParams& params,
                              std::span<const Eigen::VectorXd> states);

/// Shifts every sigma_i by a common amount (bisection, at most 80 steps) until the
/// mean active fraction lies within [target / 2, 2 target]. Throws NumericalError
/// reporting the closest fraction reached when no shift achieves that.
GolgiParams calibrate_sparsity(const BasisLayout& layout, const GolgiParams& params,
                               std::span<const Eigen::VectorXd> states);

}  // namespace cerebellum
