#pragma once

// Closed-form Lagrange-Euler dynamics of planar serial revolute arms.
//
// Conventions: q_k is measured relative to the previous link and q = 0 lays
// every link along +x of the base frame. Gravity lives in the working plane;
// base_tilt = 0 points it along -y. All functions are pure.

#include <Eigen/Dense>
#include <span>
#include <string_view>
#include <vector>

namespace cerebellum {

using Eigen::Matrix2d;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::Vector3d;
using Eigen::VectorXd;

struct LinkParams {
  double mass = 1.0;          // kg
  double length = 1.0;        // m
  double com_distance = 0.5;  // m, pivot to center of mass
  double inertia_com = 0.0;   // kg m^2 about the center of mass
  double fric_dynamic = 0.0;  // N m s / rad
  double fric_static = 0.0;   // N m, Coulomb magnitude
};

struct RobotModel {
  std::vector<LinkParams> links;  // base to tip
  double gravity_mag = 9.81;
  double base_tilt = 0.0;

  int dof() const { return static_cast<int>(links.size()); }
  /// (g_x, g_y) in the base frame.
  Vector2d gravity() const;
};

struct JointState {
  VectorXd q;
  VectorXd qd;
  VectorXd qdd;

  static JointState zero(int n) {
    return {VectorXd::Zero(n), VectorXd::Zero(n), VectorXd::Zero(n)};
  }
};

/// Planar end-effector wrench in base-frame components.
struct ExternalWrench {
  double fx = 0.0;
  double fy = 0.0;
  double mz = 0.0;

  Vector3d vec() const { return {fx, fy, mz}; }
};

struct TorqueBreakdown {
  MatrixXd inertial;              // (k, m): d_km(q) qdd_m
  std::vector<MatrixXd> coriolis; // coriolis[k](i, j): h_kij(q) qd_i qd_j
  MatrixXd gravity;               // (k, c): G_kc(q) g_c, c in {x, y}
  VectorXd fric_dyn;
  VectorXd fric_stat;
  MatrixXd external;              // (k, c): J_ck(q) w_c, c in {fx, fy, mz}
  VectorXd total;

  int dof() const { return static_cast<int>(total.size()); }
  /// Coriolis/centripetal torque of joint k, summed over i, j.
  double coriolis_row(int k) const { return coriolis[k].sum(); }
  /// Sum of every breakdown entry of row k, in a fixed order.
  double row_sum(int k) const;
  /// Sum of absolute breakdown entries of row k (tolerance scale).
  double row_abs_sum(int k) const;
};

struct CoriolisTerms {
  VectorXd h;                 // h_k
  std::vector<MatrixXd> hkij; // hkij[k](i, j), Christoffel symbols of D
};

struct GravityTerms {
  MatrixXd components;  // (k, 0) = G_k1, (k, 1) = G_k2
  VectorXd torque;      // G_k = G_k1 g_x + G_k2 g_y
};

struct FrictionTorques {
  VectorXd dynamic;
  VectorXd stat;
};

struct WrenchTorques {
  MatrixXd components;  // (k, c) = J_ck w_c
  VectorXd torque;      // J^T w
};

/// Validates every LinkParams / RobotModel invariant; throws ConfigError naming the field.
void validate(const RobotModel& model);

/// Parses the robot section of an experiment config (JSON with comments).
RobotModel build_planar_model(std::string_view config_text);

MatrixXd inertia_matrix(const RobotModel& model, const VectorXd& q);

/// dD/dq_p for every p, via the pairwise cosine form of D.
std::vector<MatrixXd> inertia_matrix_derivatives(const RobotModel& model, const VectorXd& q);

CoriolisTerms coriolis_terms(const RobotModel& model, const VectorXd& q, const VectorXd& qd);
GravityTerms gravity_terms(const RobotModel& model, const VectorXd& q);
FrictionTorques friction_torques(const RobotModel& model, const VectorXd& qd);

/// 3 x n planar Jacobian of the tip: rows (x, y, rotation).
MatrixXd tip_jacobian(const RobotModel& model, const VectorXd& q);
Vector2d tip_position(const RobotModel& model, const VectorXd& q);
double potential_energy(const RobotModel& model, const VectorXd& q);
double kinetic_energy(const RobotModel& model, const VectorXd& q, const VectorXd& qd);

WrenchTorques jacobian_wrench_torques(const RobotModel& model, const VectorXd& q,
                                      const ExternalWrench& w);

VectorXd inverse_dynamics(const RobotModel& model, const JointState& s, const ExternalWrench& w);

/// Solves D(q) qdd = tau - h - G - F - J^T w. Throws NumericalError when D is
/// not positive definite.
VectorXd forward_dynamics(const RobotModel& model, const VectorXd& q, const VectorXd& qd,
                          const VectorXd& tau, const ExternalWrench& w);

TorqueBreakdown term_breakdown(const RobotModel& model, const JointState& s,
                               const ExternalWrench& w);

}  // namespace cerebellum
