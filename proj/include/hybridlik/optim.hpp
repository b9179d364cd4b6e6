#pragma once

#include <functional>
#include <vector>

#include "hybridlik/numerics.hpp"

namespace hybridlik {

// Log reparameterization of positivity-constrained coordinates so optimizer
// iterates stay interior.
struct ParamTransform {
  std::vector<bool> positive;

  VectorXd to_unconstrained(const VectorXd& theta) const {
    VectorXd t = theta;
    for (int j = 0; j < t.size(); ++j)
      if (positive[j]) t[j] = std::log(theta[j]);
    return t;
  }
  VectorXd from_unconstrained(const VectorXd& t) const {
    VectorXd theta = t;
    for (int j = 0; j < t.size(); ++j)
      if (positive[j]) theta[j] = std::exp(t[j]);
    return theta;
  }
  // Chain rule d/dt = diag(dtheta/dt) d/dtheta.
  VectorXd chain(const VectorXd& t, const VectorXd& grad_theta) const {
    VectorXd g = grad_theta;
    for (int j = 0; j < t.size(); ++j)
      if (positive[j]) g[j] *= std::exp(t[j]);
    return g;
  }
};

struct OptimResult {
  VectorXd x;
  double f = kNegInf;
  int iterations = 0;
  bool converged = false;
};

// BFGS ascent with Armijo backtracking. Used for the smooth parametric
// log-likelihood; gradients are supplied analytically by the caller.
inline OptimResult bfgs_maximize(
    const std::function<double(const VectorXd&)>& f,
    const std::function<VectorXd(const VectorXd&)>& grad, const VectorXd& x0,
    int max_iter = 200, double grad_tol = 1e-9) {
  const int d = static_cast<int>(x0.size());
  OptimResult res;
  res.x = x0;
  res.f = f(x0);
  if (!std::isfinite(res.f)) return res;
  MatrixXd Hinv = MatrixXd::Identity(d, d);
  VectorXd g = grad(res.x);
  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    if (!g.allFinite()) break;
    if (g.cwiseAbs().maxCoeff() <= grad_tol * std::max(1.0, std::abs(res.f))) {
      res.converged = true;
      break;
    }
    VectorXd dir = Hinv * g;
    double slope = g.dot(dir);
    if (!(slope > 0.0)) {
      Hinv = MatrixXd::Identity(d, d);
      dir = g;
      slope = g.dot(dir);
    }
    double alpha = 1.0;
    VectorXd xn = res.x;
    double fn = res.f;
    bool moved = false;
    while (alpha > 1e-16) {
      xn = res.x + alpha * dir;
      fn = f(xn);
      if (std::isfinite(fn) && fn >= res.f + 1e-4 * alpha * slope) {
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) break;
    const VectorXd gn = grad(xn);
    const VectorXd s = xn - res.x, y = gn - g;
    const double sy = s.dot(y);
    if (sy < -1e-12 * s.norm() * y.norm()) {
      const VectorXd Hy = Hinv * y;
      const double yHy = y.dot(Hy);
      // Standard inverse-Hessian update (ascent: y enters with flipped sign).
      Hinv += ((yHy - sy) / (sy * sy)) * (s * s.transpose()) -
              (Hy * s.transpose() + s * Hy.transpose()) / sy;
    }
    res.x = xn;
    res.f = fn;
    g = gn;
  }
  return res;
}

// Nelder-Mead maximization with standard coefficients. -inf objective values
// mark infeasible vertices (EL hull violations, support violations) and are
// simply ranked worst.
inline OptimResult nelder_mead_maximize(
    const std::function<double(const VectorXd&)>& f, const VectorXd& x0,
    double rel_step = 0.05, int max_iter = 0, double f_tol = 1e-11,
    double x_tol = 1e-9) {
  const int d = static_cast<int>(x0.size());
  if (max_iter == 0) max_iter = 600 * std::max(d, 1);

  std::vector<VectorXd> xs(d + 1, x0);
  std::vector<double> fs(d + 1);
  for (int j = 0; j < d; ++j)
    xs[j + 1][j] += rel_step * (std::abs(x0[j]) + 0.1);
  for (int i = 0; i <= d; ++i) fs[i] = f(xs[i]);

  auto order = [&]() {
    for (int i = 1; i <= d; ++i) {
      VectorXd x = xs[i];
      double fv = fs[i];
      int j = i - 1;
      while (j >= 0 && fs[j] < fv) {
        xs[j + 1] = xs[j];
        fs[j + 1] = fs[j];
        --j;
      }
      xs[j + 1] = x;
      fs[j + 1] = fv;
    }
  };
  order();

  OptimResult res;
  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    if (std::isfinite(fs[0]) && std::isfinite(fs[d])) {
      double diam = 0.0;
      for (int i = 1; i <= d; ++i) diam = std::max(diam, (xs[i] - xs[0]).norm());
      if (std::abs(fs[0] - fs[d]) <= f_tol * (1.0 + std::abs(fs[0])) &&
          diam <= x_tol * (1.0 + xs[0].norm())) {
        res.converged = true;
        break;
      }
    }
    VectorXd centroid = VectorXd::Zero(d);
    for (int i = 0; i < d; ++i) centroid += xs[i];
    centroid /= d;

    const VectorXd xr = centroid + (centroid - xs[d]);
    const double fr = f(xr);
    if (fr > fs[0]) {
      const VectorXd xe = centroid + 2.0 * (centroid - xs[d]);
      const double fe = f(xe);
      if (fe > fr) {
        xs[d] = xe;
        fs[d] = fe;
      } else {
        xs[d] = xr;
        fs[d] = fr;
      }
    } else if (fr > fs[d - 1]) {
      xs[d] = xr;
      fs[d] = fr;
    } else {
      const VectorXd xc = centroid + 0.5 * (xs[d] - centroid);
      const double fc = f(xc);
      if (fc > fs[d]) {
        xs[d] = xc;
        fs[d] = fc;
      } else {
        for (int i = 1; i <= d; ++i) {
          xs[i] = xs[0] + 0.5 * (xs[i] - xs[0]);
          fs[i] = f(xs[i]);
        }
      }
    }
    order();
  }
  res.x = xs[0];
  res.f = fs[0];
  return res;
}

}  // namespace hybridlik
