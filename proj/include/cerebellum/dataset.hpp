#pragma once

// Oracle-labelled sample sets and their CSV file format.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cerebellum/dynamics.hpp"
#include "cerebellum/encoding.hpp"

namespace cerebellum {

struct Sample {
  JointState state;
  double base_tilt = 0.0;
  ExternalWrench wrench;
};

struct DatasetSpec {
  std::size_t count = 10000;
  std::uint64_t seed = 7;
  double holdout = 0.2;
  std::vector<double> q_min;  // empty: use the position layout range
  std::vector<double> q_max;
  double v_max = 2.0;
  double a_max = 5.0;
  double f_max = 5.0;
  double m_max = 1.0;
  double tilt_spread = 0.5;  // base tilt drawn from [-spread, spread]
};

void validate(const DatasetSpec& spec, int dof);

struct Dataset {
  std::string robot_hash;
  std::string layout_hash;
  std::uint64_t seed = 0;
  double holdout = 0.0;
  std::vector<Sample> samples;
  std::vector<TorqueBreakdown> targets;

  /// The first (1 - holdout) share trains, the tail is held out.
  std::size_t train_count() const;
};

/// Uniform draws of q, qd, qdd, tilt and wrench; targets from the analytic oracle.
Dataset generate(const RobotModel& model, const BasisLayout& position, const DatasetSpec& spec,
                 const std::string& layout_hash);

void write_dataset(std::ostream& os, const Dataset& ds, int dof);
/// Re-evaluates targets with `model` and throws ConsistencyError on any mismatch above 1e-12.
Dataset read_dataset(std::istream& is, const RobotModel& model);

}  // namespace cerebellum
