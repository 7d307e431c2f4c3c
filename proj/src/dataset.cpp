#include "cerebellum/dataset.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include <spdlog/spdlog.h>

#include "cerebellum/config.hpp"
#include "cerebellum/errors.hpp"
#include "cerebellum/kernels.hpp"
#include "cerebellum/text_format.hpp"

namespace cerebellum {

namespace {

constexpr const char* kMagic = "# cerebellum-dataset v1";

double parse_number(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    throw InputError("dataset line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

void validate(const DatasetSpec& s, int dof) {
  if (!(s.holdout >= 0.0 && s.holdout < 1.0)) throw ConfigError("dataset.holdout", 0, "must lie in [0, 1)");
  if (!(s.v_max > 0.0)) throw ConfigError("dataset.v_max", 0, "must be positive");
  if (!(s.a_max >= 0.0)) throw ConfigError("dataset.a_max", 0, "must be >= 0");
  if (!(s.f_max >= 0.0)) throw ConfigError("dataset.f_max", 0, "must be >= 0");
  if (!(s.m_max >= 0.0)) throw ConfigError("dataset.m_max", 0, "must be >= 0");
  if (!(s.tilt_spread >= 0.0)) throw ConfigError("dataset.tilt_spread", 0, "must be >= 0");
  if (s.q_min.size() != s.q_max.size()) throw ConfigError("dataset.q_min", 0, "q_min and q_max differ in length");
  if (!s.q_min.empty()) {
    if (static_cast<int>(s.q_min.size()) != dof) throw ConfigError("dataset.q_min", 0, "one range per joint");
    for (std::size_t k = 0; k < s.q_min.size(); ++k) {
      if (!(s.q_max[k] > s.q_min[k])) throw ConfigError("dataset.q_max", 0, "ranges must be nonempty");
    }
  }
}

std::size_t Dataset::train_count() const {
  const auto n = static_cast<double>(samples.size());
  return static_cast<std::size_t>(std::llround(std::floor(n * (1.0 - holdout))));
}

Dataset generate(const RobotModel& model, const BasisLayout& position, const DatasetSpec& spec,
                 const std::string& layout_hash) {
  const int n = model.dof();
  validate(model);
  validate(spec, n);
  std::vector<double> lo = spec.q_min.empty() ? position.range_min : spec.q_min;
  std::vector<double> hi = spec.q_max.empty() ? position.range_max : spec.q_max;
  if (static_cast<int>(lo.size()) != n) throw InputError("joint ranges do not match the robot");

  Dataset ds;
  ds.robot_hash = robot_hash(model);
  ds.layout_hash = layout_hash;
  ds.seed = spec.seed;
  ds.holdout = spec.holdout;
  if (spec.count == 0) spdlog::warn("dataset count is 0; writing an empty dataset");

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto draw = [&](double a, double b) { return a + 0.5 * (unit(rng) + 1.0) * (b - a); };
  ds.samples.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) {
    Sample s;
    s.state = JointState::zero(n);
    for (int k = 0; k < n; ++k) s.state.q[k] = draw(lo[k], hi[k]);
    for (int k = 0; k < n; ++k) s.state.qd[k] = spec.v_max * unit(rng);
    for (int k = 0; k < n; ++k) s.state.qdd[k] = spec.a_max * unit(rng);
    s.base_tilt = model.base_tilt + spec.tilt_spread * unit(rng);
    s.wrench.fx = spec.f_max * unit(rng);
    s.wrench.fy = spec.f_max * unit(rng);
    s.wrench.mz = spec.m_max * unit(rng);
    ds.samples.push_back(std::move(s));
  }
  ds.targets = kernels::breakdowns_omp(model, ds.samples);
  return ds;
}

void write_dataset(std::ostream& os, const Dataset& ds, int dof) {
  os << kMagic << '\n';
  os << "# dof=" << dof << " robot_hash=" << ds.robot_hash << " layout_hash=" << ds.layout_hash
     << " seed=" << ds.seed << " count=" << ds.samples.size() << " holdout=" << format_double(ds.holdout)
     << '\n';
  const char* groups[] = {"q", "qd", "qdd"};
  for (const char* g : groups) {
    for (int k = 0; k < dof; ++k) os << g << k << ',';
  }
  os << "base_tilt,fx,fy,mz";
  for (int k = 0; k < dof; ++k) os << ",tau" << k;
  os << '\n';
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const Sample& s = ds.samples[i];
    for (const auto* v : {&s.state.q, &s.state.qd, &s.state.qdd}) {
      for (int k = 0; k < dof; ++k) os << format_double((*v)[k]) << ',';
    }
    os << format_double(s.base_tilt) << ',' << format_double(s.wrench.fx) << ','
       << format_double(s.wrench.fy) << ',' << format_double(s.wrench.mz);
    for (int k = 0; k < dof; ++k) os << ',' << format_double(ds.targets[i].total[k]);
    os << '\n';
  }
}

Dataset read_dataset(std::istream& is, const RobotModel& model) {
  std::string line;
  if (!std::getline(is, line) || line != kMagic) throw InputError("not a dataset file (missing header)");
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0) throw InputError("dataset metadata line missing");

  Dataset ds;
  int dof = -1;
  std::size_t count = 0;
  std::istringstream meta(line.substr(2));
  for (std::string kv; meta >> kv;) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InputError("bad dataset metadata '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    if (key == "dof") {
      dof = std::stoi(value);
    } else if (key == "robot_hash") {
      ds.robot_hash = value;
    } else if (key == "layout_hash") {
      ds.layout_hash = value;
    } else if (key == "seed") {
      ds.seed = std::stoull(value);
    } else if (key == "count") {
      count = std::stoull(value);
    } else if (key == "holdout") {
      ds.holdout = parse_number(value, 2);
    }
  }
  if (dof != model.dof()) {
    throw ConsistencyError("dataset has " + std::to_string(dof) + " joints, robot has " +
                           std::to_string(model.dof()));
  }
  if (ds.robot_hash != robot_hash(model)) {
    throw ConsistencyError("dataset robot hash " + ds.robot_hash + " does not match config " + robot_hash(model));
  }
  if (!std::getline(is, line)) throw InputError("dataset column header missing");

  const std::size_t cols = static_cast<std::size_t>(4 * dof + 4);
  std::vector<Eigen::VectorXd> stored;
  std::size_t line_no = 3;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != cols) {
      throw InputError("dataset line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                       " fields");
    }
    std::size_t c = 0;
    Sample s;
    s.state = JointState::zero(dof);
    for (auto* v : {&s.state.q, &s.state.qd, &s.state.qdd}) {
      for (int k = 0; k < dof; ++k) (*v)[k] = parse_number(fields[c++], line_no);
    }
    s.base_tilt = parse_number(fields[c++], line_no);
    s.wrench.fx = parse_number(fields[c++], line_no);
    s.wrench.fy = parse_number(fields[c++], line_no);
    s.wrench.mz = parse_number(fields[c++], line_no);
    Eigen::VectorXd tau(dof);
    for (int k = 0; k < dof; ++k) tau[k] = parse_number(fields[c++], line_no);
    ds.samples.push_back(std::move(s));
    stored.push_back(std::move(tau));
  }
  if (ds.samples.size() != count) {
    throw InputError("dataset declares " + std::to_string(count) + " samples but holds " +
                     std::to_string(ds.samples.size()));
  }
  ds.targets = kernels::breakdowns_omp(model, ds.samples);
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    for (int k = 0; k < dof; ++k) {
      const double fresh = ds.targets[i].total[k];
      if (std::abs(fresh - stored[i][k]) > 1e-12 * std::max(1.0, std::abs(fresh))) {
        throw ConsistencyError("dataset sample " + std::to_string(i) + " joint " + std::to_string(k) +
                               ": stored torque " + format_double(stored[i][k]) + " differs from oracle " +
                               format_double(fresh));
      }
    }
  }
  return ds;
}

}  // namespace cerebellum
