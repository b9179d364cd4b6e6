#pragma once

#include <optional>

#include "hybridlik/controls.hpp"

namespace hybridlik {

// A scalar focus parameter psi(theta) with gradient c(theta). value_wide,
// when present, evaluates psi under a wide model (theta, gamma) so the
// focused-analysis machinery can form d psi / d gamma.
struct Focus {
  std::string label;
  std::function<double(const VectorXd&)> value;
  std::function<VectorXd(const VectorXd&)> gradient;  // default: finite differences
  std::function<double(const VectorXd&, const VectorXd&)> value_wide;

  double psi(const VectorXd& theta) const { return value(theta); }
  VectorXd grad(const VectorXd& theta) const {
    if (gradient) return gradient(theta);
    return fd_gradient(value, theta);
  }
  VectorXd grad_gamma(const VectorXd& theta, const VectorXd& gamma0) const {
    if (!value_wide)
      throw InvalidInput("focus '" + label + "' has no wide-model evaluation");
    VectorXd g(gamma0.size());
    for (int j = 0; j < gamma0.size(); ++j) {
      const double h = fd_step(gamma0[j]);
      VectorXd up = gamma0, dn = gamma0;
      up[j] += h;
      dn[j] -= h;
      g[j] = (value_wide(theta, up) - value_wide(theta, dn)) / (2.0 * h);
    }
    return g;
  }
};

// Focus on a raw model coordinate theta_j (0-based).
inline Focus focus_theta_coord(int j, int p) {
  if (j < 0 || j >= p) throw InvalidInput("focus coordinate out of range");
  Focus f;
  f.label = "theta[" + std::to_string(j) + "]";
  f.value = [j](const VectorXd& th) { return th[j]; };
  f.gradient = [j, p](const VectorXd&) {
    VectorXd e = VectorXd::Zero(p);
    e[j] = 1.0;
    return e;
  };
  f.value_wide = [j](const VectorXd& th, const VectorXd&) { return th[j]; };
  return f;
}

// Focus on control component j seen through the model: psi(theta) = mu_j(theta).
inline Focus focus_control_component(const ControlSet& cs, int j) {
  if (j < 0 || j >= cs.q) throw InvalidInput("focus control index out of range");
  Focus f;
  f.label = "mu[" + std::to_string(j) + "]";
  f.value = [cs, j](const VectorXd& th) { return cs.mu_of_theta(th)[j]; };
  f.gradient = [cs, j](const VectorXd& th) { return VectorXd(cs.dmu_dtheta(th).col(j)); };
  return f;
}

}  // namespace hybridlik
