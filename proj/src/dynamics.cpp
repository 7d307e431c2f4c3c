#include "cerebellum/dynamics.hpp"

#include <cmath>
#include <string>

#include "cerebellum/errors.hpp"

namespace cerebellum {

namespace {

void require_size(const VectorXd& v, int n, const char* what) {
  if (v.size() != n) {
    throw InputError(std::string(what) + " has length " + std::to_string(v.size()) +
                     ", expected " + std::to_string(n));
  }
}

// Absolute link angles and the lever arm r(i, a) of link a within the center
// of mass position of link i (l_a for a < i, com_distance for a == i).
struct ChainGeometry {
  VectorXd theta;
  MatrixXd lever;

  ChainGeometry(const RobotModel& model, const VectorXd& q) {
    const int n = model.dof();
    require_size(q, n, "q");
    theta.resize(n);
    double acc = 0.0;
    for (int a = 0; a < n; ++a) {
      acc += q[a];
      theta[a] = acc;
    }
    lever = MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int a = 0; a < i; ++a) lever(i, a) = model.links[a].length;
      lever(i, i) = model.links[i].com_distance;
    }
  }
};

double sign_of(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

Vector2d RobotModel::gravity() const {
  return {gravity_mag * std::sin(base_tilt), -gravity_mag * std::cos(base_tilt)};
}

double TorqueBreakdown::row_sum(int k) const {
  double s = 0.0;
  s += inertial.row(k).sum();
  s += coriolis[k].sum();
  s += gravity.row(k).sum();
  s += fric_dyn[k] + fric_stat[k];
  s += external.row(k).sum();
  return s;
}

double TorqueBreakdown::row_abs_sum(int k) const {
  double s = 0.0;
  s += inertial.row(k).cwiseAbs().sum();
  s += coriolis[k].cwiseAbs().sum();
  s += gravity.row(k).cwiseAbs().sum();
  s += std::abs(fric_dyn[k]) + std::abs(fric_stat[k]);
  s += external.row(k).cwiseAbs().sum();
  return s;
}

void validate(const RobotModel& model) {
  if (model.links.empty()) throw ConfigError("links", 0, "at least one link is required");
  for (std::size_t i = 0; i < model.links.size(); ++i) {
    const auto& l = model.links[i];
    const std::string at = "links[" + std::to_string(i) + "].";
    auto check = [&](bool ok, const char* field, const char* msg) {
      if (!ok) throw ConfigError(at + field, 0, msg);
    };
    check(std::isfinite(l.mass) && l.mass > 0.0, "mass", "mass must be positive");
    check(std::isfinite(l.length) && l.length > 0.0, "length", "length must be positive");
    check(std::isfinite(l.com_distance) && l.com_distance >= 0.0 && l.com_distance <= l.length,
          "com_distance", "com_distance must lie in [0, length]");
    check(std::isfinite(l.inertia_com) && l.inertia_com >= 0.0, "inertia_com",
          "inertia_com must be non-negative");
    check(std::isfinite(l.fric_dynamic) && l.fric_dynamic >= 0.0, "fric_dynamic",
          "fric_dynamic must be non-negative");
    check(std::isfinite(l.fric_static) && l.fric_static >= 0.0, "fric_static",
          "fric_static must be non-negative");
  }
  if (!std::isfinite(model.gravity_mag) || model.gravity_mag < 0.0) {
    throw ConfigError("gravity_mag", 0, "gravity_mag must be a finite non-negative number");
  }
  if (!std::isfinite(model.base_tilt)) throw ConfigError("base_tilt", 0, "base_tilt must be finite");
}

MatrixXd inertia_matrix(const RobotModel& model, const VectorXd& q) {
  const int n = model.dof();
  const ChainGeometry geo(model, q);
  MatrixXd d = MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    for (int l = k; l < n; ++l) {
      double acc = 0.0;
      for (int i = l; i < n; ++i) {
        double trans = 0.0;
        for (int a = k; a <= i; ++a) {
          for (int b = l; b <= i; ++b) {
            trans += geo.lever(i, a) * geo.lever(i, b) * std::cos(geo.theta[a] - geo.theta[b]);
          }
        }
        acc += model.links[i].mass * trans + model.links[i].inertia_com;
      }
      d(k, l) = acc;
      d(l, k) = acc;
    }
  }
  return d;
}

std::vector<MatrixXd> inertia_matrix_derivatives(const RobotModel& model, const VectorXd& q) {
  const int n = model.dof();
  const ChainGeometry geo(model, q);
  std::vector<MatrixXd> dd(n, MatrixXd::Zero(n, n));
  for (int p = 0; p < n; ++p) {
    for (int k = 0; k < n; ++k) {
      for (int l = k; l < n; ++l) {
        double acc = 0.0;
        for (int i = l; i < n; ++i) {
          double trans = 0.0;
          for (int a = k; a <= i; ++a) {
            for (int b = l; b <= i; ++b) {
              // d(theta_a - theta_b)/dq_p; zero whenever both or neither angle depends on q_p.
              const int dir = (p <= a) - (p <= b);
              if (dir == 0) continue;
              trans -= dir * geo.lever(i, a) * geo.lever(i, b) *
                       std::sin(geo.theta[a] - geo.theta[b]);
            }
          }
          acc += model.links[i].mass * trans;
        }
        dd[p](k, l) = acc;
        dd[p](l, k) = acc;
      }
    }
  }
  return dd;
}

CoriolisTerms coriolis_terms(const RobotModel& model, const VectorXd& q, const VectorXd& qd) {
  const int n = model.dof();
  require_size(qd, n, "qd");
  const auto dd = inertia_matrix_derivatives(model, q);
  CoriolisTerms out{VectorXd::Zero(n), std::vector<MatrixXd>(n, MatrixXd::Zero(n, n))};
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        out.hkij[k](i, j) = 0.5 * (dd[i](k, j) + dd[j](k, i) - dd[k](i, j));
      }
    }
    out.h[k] = qd.dot(out.hkij[k] * qd);
  }
  return out;
}

GravityTerms gravity_terms(const RobotModel& model, const VectorXd& q) {
  const int n = model.dof();
  const ChainGeometry geo(model, q);
  GravityTerms out{MatrixXd::Zero(n, 2), VectorXd::Zero(n)};
  for (int k = 0; k < n; ++k) {
    double gx = 0.0;
    double gy = 0.0;
    for (int i = k; i < n; ++i) {
      double jx = 0.0;
      double jy = 0.0;
      for (int a = k; a <= i; ++a) {
        jx -= geo.lever(i, a) * std::sin(geo.theta[a]);
        jy += geo.lever(i, a) * std::cos(geo.theta[a]);
      }
      gx -= model.links[i].mass * jx;
      gy -= model.links[i].mass * jy;
    }
    out.components(k, 0) = gx;
    out.components(k, 1) = gy;
  }
  out.torque = out.components * model.gravity();
  return out;
}

FrictionTorques friction_torques(const RobotModel& model, const VectorXd& qd) {
  const int n = model.dof();
  require_size(qd, n, "qd");
  FrictionTorques out{VectorXd::Zero(n), VectorXd::Zero(n)};
  for (int k = 0; k < n; ++k) {
    out.dynamic[k] = model.links[k].fric_dynamic * qd[k];
    out.stat[k] = model.links[k].fric_static * sign_of(qd[k]);
  }
  return out;
}

MatrixXd tip_jacobian(const RobotModel& model, const VectorXd& q) {
  const int n = model.dof();
  const ChainGeometry geo(model, q);
  MatrixXd jac = MatrixXd::Zero(3, n);
  for (int k = 0; k < n; ++k) {
    for (int a = k; a < n; ++a) {
      jac(0, k) -= model.links[a].length * std::sin(geo.theta[a]);
      jac(1, k) += model.links[a].length * std::cos(geo.theta[a]);
    }
    jac(2, k) = 1.0;
  }
  return jac;
}

Vector2d tip_position(const RobotModel& model, const VectorXd& q) {
  const ChainGeometry geo(model, q);
  Vector2d p = Vector2d::Zero();
  for (int a = 0; a < model.dof(); ++a) {
    p += model.links[a].length * Vector2d(std::cos(geo.theta[a]), std::sin(geo.theta[a]));
  }
  return p;
}

double potential_energy(const RobotModel& model, const VectorXd& q) {
  const ChainGeometry geo(model, q);
  const Vector2d g = model.gravity();
  double u = 0.0;
  for (int i = 0; i < model.dof(); ++i) {
    Vector2d com = Vector2d::Zero();
    for (int a = 0; a <= i; ++a) {
      com += geo.lever(i, a) * Vector2d(std::cos(geo.theta[a]), std::sin(geo.theta[a]));
    }
    u -= model.links[i].mass * g.dot(com);
  }
  return u;
}

double kinetic_energy(const RobotModel& model, const VectorXd& q, const VectorXd& qd) {
  const ChainGeometry geo(model, q);
  require_size(qd, model.dof(), "qd");
  double t = 0.0;
  double omega = 0.0;
  for (int i = 0; i < model.dof(); ++i) {
    omega += qd[i];
    // Angular rate of link a is the running sum of joint rates up to a.
    Vector2d v = Vector2d::Zero();
    double rate = 0.0;
    for (int a = 0; a <= i; ++a) {
      rate += qd[a];
      v += geo.lever(i, a) * rate * Vector2d(-std::sin(geo.theta[a]), std::cos(geo.theta[a]));
    }
    t += 0.5 * model.links[i].mass * v.squaredNorm() + 0.5 * model.links[i].inertia_com * omega * omega;
  }
  return t;
}

WrenchTorques jacobian_wrench_torques(const RobotModel& model, const VectorXd& q,
                                      const ExternalWrench& w) {
  const MatrixXd jac = tip_jacobian(model, q);
  const int n = model.dof();
  WrenchTorques out{MatrixXd::Zero(n, 3), VectorXd::Zero(n)};
  const Vector3d wv = w.vec();
  for (int k = 0; k < n; ++k) {
    for (int c = 0; c < 3; ++c) out.components(k, c) = jac(c, k) * wv[c];
  }
  out.torque = jac.transpose() * wv;
  return out;
}

namespace {

VectorXd bias_torque(const RobotModel& model, const VectorXd& q, const VectorXd& qd,
                     const ExternalWrench& w) {
  const auto fr = friction_torques(model, qd);
  return coriolis_terms(model, q, qd).h + gravity_terms(model, q).torque + fr.dynamic + fr.stat +
         jacobian_wrench_torques(model, q, w).torque;
}

void require_state(const RobotModel& model, const JointState& s) {
  const int n = model.dof();
  require_size(s.q, n, "q");
  require_size(s.qd, n, "qd");
  require_size(s.qdd, n, "qdd");
}

}  // namespace

VectorXd inverse_dynamics(const RobotModel& model, const JointState& s, const ExternalWrench& w) {
  require_state(model, s);
  return inertia_matrix(model, s.q) * s.qdd + bias_torque(model, s.q, s.qd, w);
}

VectorXd forward_dynamics(const RobotModel& model, const VectorXd& q, const VectorXd& qd,
                          const VectorXd& tau, const ExternalWrench& w) {
  const int n = model.dof();
  require_size(q, n, "q");
  require_size(qd, n, "qd");
  require_size(tau, n, "tau");
  Eigen::LLT<MatrixXd> llt(inertia_matrix(model, q));
  if (llt.info() != Eigen::Success) {
    throw NumericalError("inertia matrix is not positive definite; the model is non-physical");
  }
  return llt.solve(tau - bias_torque(model, q, qd, w));
}

TorqueBreakdown term_breakdown(const RobotModel& model, const JointState& s,
                               const ExternalWrench& w) {
  require_state(model, s);
  const int n = model.dof();
  const MatrixXd d = inertia_matrix(model, s.q);
  const auto cor = coriolis_terms(model, s.q, s.qd);
  const auto grav = gravity_terms(model, s.q);
  const auto fr = friction_torques(model, s.qd);
  const auto ext = jacobian_wrench_torques(model, s.q, w);
  const Vector2d g = model.gravity();

  TorqueBreakdown out;
  out.inertial = d * s.qdd.asDiagonal();
  out.coriolis.resize(n);
  for (int k = 0; k < n; ++k) {
    out.coriolis[k] = s.qd.asDiagonal() * cor.hkij[k] * s.qd.asDiagonal();
  }
  out.gravity = grav.components * g.asDiagonal();
  out.fric_dyn = fr.dynamic;
  out.fric_stat = fr.stat;
  out.external = ext.components;
  out.total.resize(n);
  for (int k = 0; k < n; ++k) out.total[k] = out.row_sum(k);
  return out;
}

}  // namespace cerebellum
