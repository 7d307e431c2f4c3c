#include "cerebellum/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "cerebellum/errors.hpp"
#include "cerebellum/text_format.hpp"

namespace cerebellum {

std::string to_string(FieldShape s) {
  switch (s) {
    case FieldShape::rectangular: return "rectangular";
    case FieldShape::triangular: return "triangular";
    case FieldShape::smooth: return "smooth-product";
  }
  return "?";
}

std::string to_string(Combine c) { return c == Combine::and_min ? "and-min" : "product"; }

FieldShape parse_field_shape(const std::string& s) {
  if (s == "rectangular") return FieldShape::rectangular;
  if (s == "triangular") return FieldShape::triangular;
  if (s == "smooth-product" || s == "smooth") return FieldShape::smooth;
  throw ConfigError("field_shape", 0, "unknown field shape '" + s + "'");
}

Combine parse_combine(const std::string& s) {
  if (s == "and-min" || s == "and") return Combine::and_min;
  if (s == "product") return Combine::product;
  throw ConfigError("combine", 0, "unknown combine rule '" + s + "'");
}

BasisLayout BasisLayout::uniform(std::vector<double> range_min, std::vector<double> range_max,
                                 int tilings, std::vector<int> cells_per_dim, FieldShape shape,
                                 Combine combine) {
  BasisLayout out;
  out.range_min = std::move(range_min);
  out.range_max = std::move(range_max);
  out.tilings = tilings;
  out.cells_per_dim = std::move(cells_per_dim);
  out.field_shape = shape;
  out.combine = combine;
  const int d = out.dims();
  out.offsets.assign(static_cast<std::size_t>(std::max(tilings, 0)), std::vector<double>(d, 0.0));
  for (int t = 0; t < tilings; ++t) {
    for (int k = 0; k < d; ++k) {
      const long step = static_cast<long>(t) * (2 * k + 1) % tilings;
      out.offsets[t][k] = static_cast<double>(step) / tilings;
    }
  }
  return out;
}

std::size_t BasisLayout::cells_per_tiling() const {
  std::size_t n = 1;
  for (int c : cells_per_dim) n *= static_cast<std::size_t>(c);
  return n;
}

double BasisLayout::cell_width(int dim) const {
  return (range_max[dim] - range_min[dim]) / (cells_per_dim[dim] - 1);
}

std::string BasisLayout::canonical() const {
  std::ostringstream os;
  os << "dims=" << dims() << ";tilings=" << tilings << ";shape=" << to_string(field_shape)
     << ";combine=" << to_string(combine);
  for (int k = 0; k < dims(); ++k) {
    os << ";dim" << k << "=" << format_double(range_min[k]) << ":" << format_double(range_max[k])
       << ":" << cells_per_dim[k];
  }
  for (const auto& row : offsets) {
    os << ";o";
    for (double o : row) os << ":" << format_double(o);
  }
  return os.str();
}

void validate(const BasisLayout& layout) {
  const int d = layout.dims();
  if (d < 1) throw ConfigError("cells_per_dim", 0, "at least one encoded dimension is required");
  if (static_cast<int>(layout.range_min.size()) != d || static_cast<int>(layout.range_max.size()) != d) {
    throw ConfigError("ranges", 0, "one (min, max) range per dimension is required");
  }
  for (int k = 0; k < d; ++k) {
    if (layout.cells_per_dim[k] < 2) throw ConfigError("cells_per_dim", 0, "cells_per_dim must be >= 2");
    if (!(layout.range_max[k] > layout.range_min[k])) {
      throw ConfigError("ranges", 0, "range max must exceed min");
    }
  }
  if (layout.tilings < 1) throw ConfigError("tilings", 0, "tilings must be >= 1");
  if (static_cast<int>(layout.offsets.size()) != layout.tilings) {
    throw ConfigError("offsets", 0, "one offset row per tiling is required");
  }
  std::set<std::vector<double>> seen;
  for (const auto& row : layout.offsets) {
    if (static_cast<int>(row.size()) != d) throw ConfigError("offsets", 0, "offset row has wrong length");
    for (double o : row) {
      if (!(o >= 0.0 && o < 1.0)) throw ConfigError("offsets", 0, "offsets must lie in [0, 1)");
    }
    if (!seen.insert(row).second) throw ConfigError("offsets", 0, "tiling offsets must be distinct");
  }
}

double SparseActivation::sum() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

double SparseActivation::dot(std::span<const double> w) const {
  double s = 0.0;
  for (std::size_t a = 0; a < indices.size(); ++a) s += values[a] * w[indices[a]];
  return s;
}

namespace {

struct Entry {
  int cell;
  double value;
};

// Unnormalized 1-D field value of `cell` at fractional grid coordinate u.
double field_value(FieldShape shape, double u, int cell, int cells) {
  switch (shape) {
    case FieldShape::rectangular: {
      const int c = std::clamp(static_cast<int>(std::ceil(u)) - 1, 0, cells - 1);
      return c == cell ? 1.0 : 0.0;
    }
    case FieldShape::triangular: {
      const double d = std::abs(u - (cell + 0.5));
      return d < 1.0 ? 1.0 - d : 0.0;
    }
    case FieldShape::smooth: {
      const double d = std::abs(u - (cell + 0.5));
      if (d >= 1.0) return 0.0;
      const double c = std::cos(0.5 * std::numbers::pi * d);
      return c * c;
    }
  }
  return 0.0;
}

// Active 1-D entries, normalized to sum to one.
void active_1d(FieldShape shape, double u, int cells, std::vector<Entry>& out) {
  out.clear();
  if (shape == FieldShape::rectangular) {
    out.push_back({std::clamp(static_cast<int>(std::ceil(u)) - 1, 0, cells - 1), 1.0});
    return;
  }
  const int c0 = static_cast<int>(std::floor(u - 0.5));
  double total = 0.0;
  for (int c = c0; c <= c0 + 1; ++c) {
    if (c < 0 || c >= cells) continue;
    const double v = field_value(shape, u, c, cells);
    if (v > 0.0) {
      out.push_back({c, v});
      total += v;
    }
  }
  for (auto& e : out) e.value /= total;
}

std::vector<double> clamp_input(const BasisLayout& layout, std::span<const double> x, bool* clamped) {
  if (static_cast<int>(x.size()) != layout.dims()) {
    throw InputError("input has " + std::to_string(x.size()) + " dimensions, layout encodes " +
                     std::to_string(layout.dims()));
  }
  std::vector<double> out(x.begin(), x.end());
  bool moved = false;
  for (int k = 0; k < layout.dims(); ++k) {
    if (std::isnan(out[k])) throw InputError("input coordinate " + std::to_string(k) + " is NaN");
    const double c = std::clamp(out[k], layout.range_min[k], layout.range_max[k]);
    if (c != out[k]) {
      spdlog::warn("input {} = {} outside [{}, {}], clamped", k, out[k], layout.range_min[k],
                   layout.range_max[k]);
      out[k] = c;
      moved = true;
    }
  }
  if (clamped) *clamped = moved;
  return out;
}

}  // namespace

SparseActivation encode_position(const BasisLayout& layout, std::span<const double> x, bool* clamped) {
  const auto xc = clamp_input(layout, x, clamped);
  const int d = layout.dims();
  const std::size_t per_tiling = layout.cells_per_tiling();

  std::vector<std::size_t> stride(d, 1);
  for (int k = d - 2; k >= 0; --k) stride[k] = stride[k + 1] * layout.cells_per_dim[k + 1];

  SparseActivation out;
  out.cell_count = layout.cell_count();
  std::vector<std::vector<Entry>> per_dim(d);
  std::vector<std::size_t> pos(d);

  for (int t = 0; t < layout.tilings; ++t) {
    std::size_t combos = 1;
    for (int k = 0; k < d; ++k) {
      const double u = (xc[k] - layout.range_min[k]) / layout.cell_width(k) + layout.offsets[t][k];
      active_1d(layout.field_shape, u, layout.cells_per_dim[k], per_dim[k]);
      combos *= per_dim[k].size();
    }
    const std::size_t first = out.indices.size();
    double total = 0.0;
    std::fill(pos.begin(), pos.end(), 0);
    for (std::size_t c = 0; c < combos; ++c) {
      std::size_t local = 0;
      double v = layout.combine == Combine::product ? 1.0 : 2.0;
      for (int k = 0; k < d; ++k) {
        const Entry& e = per_dim[k][pos[k]];
        local += static_cast<std::size_t>(e.cell) * stride[k];
        v = layout.combine == Combine::product ? v * e.value : std::min(v, e.value);
      }
      out.indices.push_back(static_cast<std::uint32_t>(t * per_tiling + local));
      out.values.push_back(v);
      total += v;
      // Odometer over the per-dimension entry lists, last dimension fastest.
      for (int k = d - 1; k >= 0; --k) {
        if (++pos[k] < per_dim[k].size()) break;
        pos[k] = 0;
      }
    }
    if (layout.field_shape != FieldShape::rectangular) {
      for (std::size_t a = first; a < out.values.size(); ++a) out.values[a] /= total;
    }
  }
  return out;
}

SparseActivation modulate(const SparseActivation& base, double r) {
  SparseActivation out = base;
  for (double& v : out.values) v *= r;
  return out;
}

DualRail modulate_dual_rail(const SparseActivation& base, double r) {
  return {modulate(base, std::max(r, 0.0)), modulate(base, std::max(-r, 0.0))};
}

std::vector<double> mossy_sums(const BasisLayout& layout, std::span<const double> x) {
  const auto xc = clamp_input(layout, x, nullptr);
  const int d = layout.dims();
  const std::size_t per_tiling = layout.cells_per_tiling();
  std::vector<double> out(layout.cell_count(), 0.0);
  std::vector<std::vector<double>> field(d);
  for (int t = 0; t < layout.tilings; ++t) {
    for (int k = 0; k < d; ++k) {
      const int cells = layout.cells_per_dim[k];
      const double u = (xc[k] - layout.range_min[k]) / layout.cell_width(k) + layout.offsets[t][k];
      field[k].assign(cells, 0.0);
      for (int c = 0; c < cells; ++c) field[k][c] = field_value(layout.field_shape, u, c, cells);
    }
    for (std::size_t local = 0; local < per_tiling; ++local) {
      std::size_t rest = local;
      double s = 0.0;
      for (int k = d - 1; k >= 0; --k) {
        const std::size_t cells = static_cast<std::size_t>(layout.cells_per_dim[k]);
        s += field[k][rest % cells];
        rest /= cells;
      }
      out[t * per_tiling + local] = s;
    }
  }
  return out;
}

}  // namespace cerebellum
