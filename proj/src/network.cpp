#include "cerebellum/network.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <spdlog/spdlog.h>

#include "cerebellum/errors.hpp"

namespace cerebellum {

std::string to_string(TermFamily f) {
  switch (f) {
    case TermFamily::inertial: return "inertial";
    case TermFamily::coriolis: return "coriolis";
    case TermFamily::gravity: return "gravity";
    case TermFamily::external: return "external";
    case TermFamily::fric_dyn: return "fric_dyn";
    case TermFamily::fric_stat: return "fric_stat";
  }
  return "?";
}

TermFamily parse_term_family(const std::string& s) {
  for (auto f : kTermFamilies) {
    if (to_string(f) == s) return f;
  }
  throw InputError("unknown term family '" + s + "'");
}

Channel CePU::channel() const {
  switch (family) {
    case TermFamily::inertial: return Channel::acceleration;
    case TermFamily::coriolis: return Channel::velocity;
    case TermFamily::gravity: return Channel::gravity;
    case TermFamily::external: return Channel::wrench;
    default: return Channel::none;
  }
}

std::size_t Microzone::trainable_weight_count() const {
  std::size_t n = 0;
  for (const auto& c : cepus) n += c.w_pc.size();
  n += 1;                              // dynamic stellate gain
  n += static_stellate().w_sc.size();  // static stellate speed weights
  return n;
}

double TermPredictions::total() const {
  return inertial.sum() + coriolis + gravity.sum() + external.sum() + fric_dyn + fric_stat;
}

namespace {

// sum over cells present in both lists of value * weight; both index lists increasing.
double sampled_dot(const SparseActivation& a, std::span<const std::uint32_t> cells,
                   std::span<const double> w) {
  double s = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.indices.size() && j < cells.size()) {
    if (a.indices[i] < cells[j]) {
      ++i;
    } else if (cells[j] < a.indices[i]) {
      ++j;
    } else {
      s += a.values[i] * w[j];
      ++i;
      ++j;
    }
  }
  return s;
}

// Grid coordinates along one dimension that land inside every reachable cell of
// the sampled tilings: `per_piece` interior points between consecutive breakpoints.
std::vector<double> dimension_grid(const BasisLayout& layout, int k,
                                   std::span<const int> tilings, int per_piece) {
  const double w = layout.cell_width(k);
  const double lo = layout.range_min[k];
  const double hi = layout.range_max[k];
  std::vector<double> breaks{lo, hi};
  for (int t : tilings) {
    for (int c = -1; c <= layout.cells_per_dim[k] + 1; ++c) {
      for (double half : {0.0, 0.5}) {
        const double x = lo + (c + half - layout.offsets[t][k]) * w;
        if (x > lo && x < hi) breaks.push_back(x);
      }
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  std::vector<double> grid;
  for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
    for (int j = 1; j <= per_piece; ++j) {
      grid.push_back(breaks[b] + (breaks[b + 1] - breaks[b]) * j / (per_piece + 1));
    }
  }
  grid.push_back(lo);
  grid.push_back(hi);
  return grid;
}

}  // namespace

std::size_t basket_stride(const BasisLayout& layout) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(layout.tilings) / 2);
}

BasketCell calibrate_basket(const BasisLayout& layout, int target_speed) {
  validate(layout);
  const std::size_t stride = basket_stride(layout);
  std::vector<int> sampled;
  for (std::size_t t = 0; t < static_cast<std::size_t>(layout.tilings); t += stride) {
    sampled.push_back(static_cast<int>(t));
  }
  const std::size_t per_tiling = layout.cells_per_tiling();
  const int d = layout.dims();
  const int per_piece = d <= 2 ? 3 : 2;

  std::vector<std::vector<double>> axes(d);
  std::size_t rows = 1;
  for (int k = 0; k < d; ++k) {
    axes[k] = dimension_grid(layout, k, sampled, per_piece);
    rows *= axes[k].size();
  }

  auto column_of = [&](std::uint32_t cell) -> long {
    const auto t = static_cast<int>(cell / per_tiling);
    const auto it = std::find(sampled.begin(), sampled.end(), t);
    if (it == sampled.end()) return -1;
    return static_cast<long>(it - sampled.begin()) * static_cast<long>(per_tiling) +
           static_cast<long>(cell % per_tiling);
  };

  const auto cols = static_cast<Eigen::Index>(sampled.size() * per_tiling);
  std::vector<Eigen::Triplet<double>> entries;
  std::vector<double> x(d);
  std::vector<std::size_t> pos(d, 0);
  std::vector<bool> touched(static_cast<std::size_t>(cols), false);
  auto for_each_point = [&](auto&& fn) {
    std::fill(pos.begin(), pos.end(), 0);
    for (std::size_t r = 0; r < rows; ++r) {
      for (int k = 0; k < d; ++k) x[k] = axes[k][pos[k]];
      fn(r, encode_position(layout, x));
      for (int k = d - 1; k >= 0; --k) {
        if (++pos[k] < axes[k].size()) break;
        pos[k] = 0;
      }
    }
  };
  for_each_point([&](std::size_t r, const SparseActivation& code) {
    for (std::size_t a = 0; a < code.indices.size(); ++a) {
      const long c = column_of(code.indices[a]);
      if (c < 0) continue;
      entries.emplace_back(static_cast<Eigen::Index>(r), c, code.values[a]);
      touched[static_cast<std::size_t>(c)] = true;
    }
  });
  Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(rows), cols);
  a.setFromTriplets(entries.begin(), entries.end());
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(rows));

  // Started from zero, CG on the normal equations stays in the row space and
  // converges to the minimum-norm solution.
  Eigen::LeastSquaresConjugateGradient<Eigen::SparseMatrix<double>> solver;
  solver.setTolerance(1e-15);
  solver.setMaxIterations(10000);
  solver.compute(a);
  const Eigen::VectorXd w = solver.solve(ones);

  BasketCell out;
  out.target_speed = target_speed;
  out.sample_stride = stride;
  for (std::size_t si = 0; si < sampled.size(); ++si) {
    for (std::size_t local = 0; local < per_tiling; ++local) {
      const std::size_t c = si * per_tiling + local;
      if (!touched[c]) continue;
      out.cells.push_back(static_cast<std::uint32_t>(static_cast<std::size_t>(sampled[si]) * per_tiling + local));
      out.w_bc.push_back(w[static_cast<Eigen::Index>(c)]);
    }
  }

  double worst = 0.0;
  for_each_point([&](std::size_t, const SparseActivation& code) {
    worst = std::max(worst, std::abs(basket_eval(out, code) - 1.0));
  });
  if (worst > 1e-9) spdlog::warn("basket reconstruction residual {} on the calibration grid", worst);
  return out;
}

Network build_microzones(const RobotModel& model, const BasisLayout& position,
                         const BasisLayout& speed, const GolgiParams& golgi) {
  validate(model);
  validate(position);
  validate(speed);
  const int n = model.dof();
  if (position.dims() != n) {
    throw ConfigError("layout.cells_per_dim", 0,
                      "position layout encodes " + std::to_string(position.dims()) +
                          " dimensions but the robot has " + std::to_string(n) + " joints");
  }
  if (speed.dims() != 1) throw ConfigError("speed_layout", 0, "speed layout must be one-dimensional");

  Network net;
  net.position = position;
  net.speed = speed;
  net.golgi = golgi;
  net.golgi.p_syn = position.cell_count();

  const std::size_t p = position.cell_count();
  const BasketCell proto = calibrate_basket(position, 0);
  for (int k = 0; k < n; ++k) {
    Microzone mz;
    mz.joint = k;
    mz.dof = n;
    auto add = [&](TermFamily f, int index) {
      mz.cepus.push_back(CePU{f, k, index, kPositionEncoder, std::vector<double>(p, 0.0)});
    };
    for (int m = 0; m < n; ++m) add(TermFamily::inertial, m);
    for (int i = 0; i < n; ++i) add(TermFamily::coriolis, i);
    for (int c = 0; c < 2; ++c) add(TermFamily::gravity, c);
    for (int c = 0; c < 3; ++c) add(TermFamily::external, c);
    for (int j = 0; j < n; ++j) {
      BasketCell b = proto;
      b.target_speed = j;
      mz.baskets.push_back(std::move(b));
    }
    mz.stellates.push_back(StellateCell{StellateKind::dynamic, k, proto.cells, proto.w_bc, 0.0});
    mz.stellates.push_back(
        StellateCell{StellateKind::stat, k, {}, std::vector<double>(speed.cell_count(), 0.0), 1.0});
    net.zones.push_back(std::move(mz));
  }
  return net;
}

SampleInputs Network::encode(const JointState& s, const Eigen::Vector2d& gravity,
                             const ExternalWrench& w) const {
  SampleInputs in;
  in.position = encode_position(position, std::span<const double>(s.q.data(), static_cast<std::size_t>(s.q.size())));
  in.speed.reserve(static_cast<std::size_t>(s.qd.size()));
  for (Eigen::Index k = 0; k < s.qd.size(); ++k) {
    const double v = s.qd[k];
    in.speed.push_back(encode_position(speed, std::span<const double>(&v, 1)));
  }
  in.qd = s.qd;
  in.qdd = s.qdd;
  in.gravity = gravity;
  in.wrench = w.vec();
  return in;
}

double cepu_eval(const CePU& cepu, const SparseActivation& encoded, double mod_value) {
  if (encoded.cell_count != cepu.w_pc.size()) {
    throw InputError("encoder mismatch: activation over " + std::to_string(encoded.cell_count) +
                     " cells, CePU holds " + std::to_string(cepu.w_pc.size()) + " weights");
  }
  return encoded.dot(cepu.w_pc) * mod_value;
}

double basket_eval(const BasketCell& b, const SparseActivation& speed_modulated) {
  return sampled_dot(speed_modulated, b.cells, b.w_bc);
}

double coriolis_row_eval(const Microzone& mz, std::span<const SparseActivation> speed_modulated) {
  const int n = mz.dof;
  if (static_cast<int>(speed_modulated.size()) != n) {
    throw InputError("coriolis row needs one speed-modulated code per joint");
  }
  std::vector<double> basket(n);
  for (int j = 0; j < n; ++j) basket[j] = basket_eval(mz.baskets[j], speed_modulated[j]);
  double row = 0.0;
  for (int i = 0; i < n; ++i) {
    const double pc = cepu_eval(mz.coriolis(i), speed_modulated[i], 1.0);
    double factor = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == mz.joint && j == mz.joint) continue;  // no self inhibition of the adjacent PC
      factor += basket[j];
    }
    row += pc * factor;
  }
  return row;
}

double stellate_reconstruction(const StellateCell& s, const SparseActivation& speed_modulated) {
  return sampled_dot(speed_modulated, s.cells, s.w_sc);
}

double stellate_dynamic_eval(const StellateCell& s, const SparseActivation& speed_modulated) {
  return stellate_reconstruction(s, speed_modulated) * s.w_sp;
}

double stellate_static_eval(const StellateCell& s, const SparseActivation& speed_encoded) {
  if (speed_encoded.cell_count != s.w_sc.size()) {
    throw InputError("static stellate expects a speed code over " + std::to_string(s.w_sc.size()) + " cells");
  }
  return speed_encoded.dot(s.w_sc) * s.w_sp;
}

TermPredictions microzone_eval(const Microzone& mz, const SampleInputs& in) {
  const int n = mz.dof;
  const int k = mz.joint;
  std::vector<SparseActivation> modulated;
  modulated.reserve(n);
  for (int i = 0; i < n; ++i) modulated.push_back(modulate(in.position, in.qd[i]));

  TermPredictions out;
  out.inertial.resize(n);
  for (int m = 0; m < n; ++m) out.inertial[m] = cepu_eval(mz.inertial(m), in.position, in.qdd[m]);
  out.coriolis = coriolis_row_eval(mz, modulated);
  for (int c = 0; c < 2; ++c) out.gravity[c] = cepu_eval(mz.gravity(c), in.position, in.gravity[c]);
  for (int c = 0; c < 3; ++c) out.external[c] = cepu_eval(mz.external(c), in.position, in.wrench[c]);
  out.fric_dyn = stellate_dynamic_eval(mz.dynamic_stellate(), modulated[k]);
  out.fric_stat = stellate_static_eval(mz.static_stellate(), in.speed[k]);
  return out;
}

TermPredictions microzone_eval(const Network& net, int joint, const JointState& s,
                               const Eigen::Vector2d& gravity, const ExternalWrench& w) {
  return microzone_eval(net.zones.at(static_cast<std::size_t>(joint)), net.encode(s, gravity, w));
}

}  // namespace cerebellum
