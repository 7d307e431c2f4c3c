#pragma once

// Expansion recoding of low-dimensional inputs into sparse non-negative basis
// activations, plus rate-code modulation by a scalar channel.
//
// A layout holds `tilings` overlapping grids. In dimension k each grid has
// cells_per_dim[k] cells of width w_k = (max_k - min_k) / (cells_per_dim[k] - 1),
// shifted by offsets[t][k] * w_k. Global cell id = t * cells_per_tiling + local id,
// local ids are row-major with dimension 0 slowest.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cerebellum {

enum class FieldShape { rectangular, triangular, smooth };
enum class Combine { and_min, product };

std::string to_string(FieldShape s);
std::string to_string(Combine c);
FieldShape parse_field_shape(const std::string& s);
Combine parse_combine(const std::string& s);

struct BasisLayout {
  std::vector<double> range_min;
  std::vector<double> range_max;
  int tilings = 1;
  std::vector<int> cells_per_dim;
  std::vector<std::vector<double>> offsets;  // [tiling][dim], each in [0, 1)
  FieldShape field_shape = FieldShape::rectangular;
  Combine combine = Combine::product;

  /// Offsets follow the asymmetric displacement t * (2k + 1) / tilings (mod 1).
  static BasisLayout uniform(std::vector<double> range_min, std::vector<double> range_max,
                             int tilings, std::vector<int> cells_per_dim,
                             FieldShape shape = FieldShape::rectangular,
                             Combine combine = Combine::product);

  int dims() const { return static_cast<int>(cells_per_dim.size()); }
  std::size_t cells_per_tiling() const;
  /// p = tilings x prod(cells_per_dim)
  std::size_t cell_count() const { return cells_per_tiling() * static_cast<std::size_t>(tilings); }
  double cell_width(int dim) const;
  /// Quantization step of the overlapped tilings, cell_width / tilings.
  double resolution(int dim) const { return cell_width(dim) / tilings; }
  /// Canonical text used for hashing.
  std::string canonical() const;
};

/// Throws ConfigError on a violated invariant.
void validate(const BasisLayout& layout);

/// Sparse activation over a layout's cells. Indices are strictly increasing.
struct SparseActivation {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;
  std::size_t cell_count = 0;

  std::size_t active() const { return indices.size(); }
  double sum() const;
  /// sum_s values[s] * w[indices[s]]
  double dot(std::span<const double> w) const;
};

/// Clamps x into the layout ranges (logging a warning when it had to).
/// `clamped`, when given, reports whether any coordinate was moved.
SparseActivation encode_position(const BasisLayout& layout, std::span<const double> x,
                                 bool* clamped = nullptr);

/// Every value multiplied by r; indices are kept even when r == 0.
SparseActivation modulate(const SparseActivation& base, double r);

/// Non-negative two-channel form of modulate: (base * max(r, 0), base * max(-r, 0)).
struct DualRail {
  SparseActivation positive;
  SparseActivation negative;
};
DualRail modulate_dual_rail(const SparseActivation& base, double r);

/// Per-cell mossy-fibre drive sum_k M_ik, where M_ik is the unnormalized 1-D field
/// value of cell i in dimension k. Length cell_count().
std::vector<double> mossy_sums(const BasisLayout& layout, std::span<const double> x);

}  // namespace cerebellum
