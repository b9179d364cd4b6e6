#pragma once

#include "hybridlik/controls.hpp"
#include "hybridlik/focus.hpp"
#include "hybridlik/mle.hpp"
#include "hybridlik/models.hpp"

namespace hybridlik {

// Plug-in estimates of the limit quantities behind the hybrid estimator:
//   J = Var u, W = Var m, C = E u m^t, xi0 the q x p derivative matrix,
//   J* = (1-a) J + a xi0^t W^-1 xi0,
//   K* = (1-a)^2 J + a^2 xi0^t W^-1 xi0 - a(1-a)(C W^-1 xi0 + xi0^t W^-1 C^t),
//   sandwich = (J*)^-1 K* (J*)^-1.
struct AsymptoticBlocks {
  double a = 0.0;
  MatrixXd J;     // p x p
  MatrixXd W;     // q x q
  MatrixXd C;     // p x q
  MatrixXd xi0;   // q x p
  MatrixXd Jstar;
  MatrixXd Kstar;
  MatrixXd sandwich;
};

// Generic Theorem-1 route, valid for any smooth-or-quantile control set.
inline void derive_star(AsymptoticBlocks& b, double a) {
  b.a = a;
  const MatrixXd Winv = sym_inverse(b.W, "W");
  const MatrixXd xWx = b.xi0.transpose() * Winv * b.xi0;
  b.Jstar = symmetrize((1.0 - a) * b.J + a * xWx);
  const MatrixXd cross = b.C * Winv * b.xi0;
  b.Kstar = symmetrize((1.0 - a) * (1.0 - a) * b.J + a * a * xWx -
                       a * (1.0 - a) * (cross + cross.transpose()));
  const MatrixXd Jsi = sym_inverse(b.Jstar, "J*");
  b.sandwich = symmetrize(Jsi * b.Kstar * Jsi);
}

// Specialized route for m(y, mu) = g(y) - mu controls, where xi0 = -dmu^t and
// C = dmu in the population:
//   J* = (1-a) J + a dmu W^-1 dmu^t,
//   K* = (1-a)^2 J + {1 - (1-a)^2} dmu W^-1 dmu^t.
// Kept as independently coded algebra; tests require it to agree with the
// generic route to 1e-10.
inline void derive_star_gmean(AsymptoticBlocks& b, const MatrixXd& dmu, double a) {
  b.a = a;
  const MatrixXd Winv = sym_inverse(b.W, "W");
  const MatrixXd dWd = dmu * Winv * dmu.transpose();
  const double om = 1.0 - a;
  b.Jstar = symmetrize(om * b.J + a * dWd);
  b.Kstar = symmetrize(om * om * b.J + (1.0 - om * om) * dWd);
  const MatrixXd Jsi = sym_inverse(b.Jstar, "J*");
  b.sandwich = symmetrize(Jsi * b.Kstar * Jsi);
}

namespace detail {

inline MatrixXd estimate_xi0(const ControlSet& cs, const VectorXd& data,
                             const VectorXd& theta, const VectorXd& mu) {
  if (cs.xi0_mode == ControlSet::Xi0Mode::quantile) {
    if (!cs.xi0_quantile)
      throw InvalidInput("quantile-mode control set lacks xi0 evaluator");
    return cs.xi0_quantile(theta);
  }
  auto mstar = cs.m_star ? cs.m_star : fd_m_star(cs.m, cs.q);
  MatrixXd ms = MatrixXd::Zero(cs.q, cs.q);
  for (int i = 0; i < data.size(); ++i) ms += mstar(data[i], mu);
  ms /= static_cast<double>(data.size());
  return ms * cs.dmu_dtheta(theta).transpose();
}

}  // namespace detail

inline AsymptoticBlocks estimate_blocks_at(const ParametricModel& model,
                                           const ControlSet& cs, const VectorXd& data,
                                           const VectorXd& theta, double a) {
  if (!model.support_check(theta))
    throw InvalidInput("blocks requested outside the parameter space");
  const int n = static_cast<int>(data.size());
  const int p = model.p, q = cs.q;
  AsymptoticBlocks b;
  b.J = MatrixXd::Zero(p, p);
  b.W = MatrixXd::Zero(q, q);
  b.C = MatrixXd::Zero(p, q);
  const VectorXd mu = cs.mu_of_theta(theta);
  for (int i = 0; i < n; ++i) {
    const VectorXd u = model.score(data[i], theta);
    const VectorXd m = cs.m(data[i], mu);
    if (!u.allFinite() || !m.allFinite())
      throw NumericalFailure("non-finite score/control at observation " +
                             std::to_string(i));
    b.J.noalias() += u * u.transpose();
    b.W.noalias() += m * m.transpose();
    b.C.noalias() += u * m.transpose();
  }
  b.J /= n;
  b.W /= n;
  b.C /= n;
  b.xi0 = detail::estimate_xi0(cs, data, theta, mu);

  // Full-rank Sigma = [[J, C], [C^t, W]]: scores and controls must not tread
  // on one another's toes.
  MatrixXd Sigma(p + q, p + q);
  Sigma << b.J, b.C, b.C.transpose(), b.W;
  if (sym_min_eigenvalue(Sigma) <= 1e-12 * std::abs(Sigma.trace()))
    throw DegenerateControls(
        "joint variance of (scores, controls) is rank deficient; controls lie in "
        "the span of the model scores");
  derive_star(b, a);
  return b;
}

// Focus standard deviation on the sqrt(n) scale: kappa_a = sqrt(c^t sandwich c).
inline double kappa_a(const AsymptoticBlocks& blocks, const VectorXd& c) {
  if (c.size() != blocks.J.rows() || c.cwiseAbs().maxCoeff() == 0.0)
    throw InvalidInput("focus gradient must be a nonzero p-vector");
  const double k2 = c.dot(blocks.sandwich * c);
  if (!(k2 > 0.0)) throw NumericalFailure("kappa^2 not positive");
  return std::sqrt(k2);
}

// Largest grid value of a whose efficiency loss stays within (1 + eps) of the
// ML baseline, all blocks evaluated at the ML position.
inline double select_a_efficiency(const ParametricModel& model, const ControlSet& cs,
                                  const VectorXd& data, const Focus& focus,
                                  double eps, const std::vector<double>& a_grid,
                                  const VectorXd* theta_ml = nullptr) {
  if (a_grid.empty()) throw InvalidGrid("empty a grid");
  for (double a : a_grid)
    if (!(a >= 0.0 && a < 1.0)) throw InvalidGrid("a grid values must lie in [0,1)");
  if (!(eps >= 0.0)) throw InvalidGrid("efficiency threshold must be nonnegative");
  const VectorXd th = theta_ml ? *theta_ml : ml_fit(model, data);
  AsymptoticBlocks b = estimate_blocks_at(model, cs, data, th, 0.0);
  const VectorXd c = focus.grad(th);
  const double kappa0 = kappa_a(b, c);
  double best = a_grid.front();
  bool found = false;
  for (double a : a_grid) {
    derive_star(b, a);
    if (kappa_a(b, c) <= (1.0 + eps) * kappa0 && (!found || a > best)) {
      best = a;
      found = true;
    }
  }
  if (!found) throw NumericalFailure("no grid value satisfies the efficiency cap");
  return best;
}

}  // namespace hybridlik
