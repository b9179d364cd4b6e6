#pragma once

#include <cassert>

#include "hybridlik/controls.hpp"
#include "hybridlik/numerics.hpp"

namespace hybridlik {

// Empirical likelihood ratio at a fixed constraint matrix, via the Lagrange
// dual: lambda solves sum m_i / (1 + lambda^t m_i) = 0 and
// log R = -sum log(1 + lambda^t m_i). The implementation lambda is the
// paper-scale multiplier divided by sqrt(n).
struct ELSolution {
  enum class Status { converged, hull_violation, max_iter };
  VectorXd lambda;
  double log_ratio = 0.0;  // <= 0; -inf on hull violation
  VectorXd weights;        // w_i = 1 / (n (1 + lambda^t m_i))
  Status status = Status::converged;
  int iterations = 0;
};

namespace detail {

// Owen's log-star: log on [eps, inf), quadratic continuation below eps so the
// dual objective is globally defined and twice differentiable.
struct LogStar {
  explicit LogStar(double eps) : eps(eps), log_eps(std::log(eps)) {}
  double eps, log_eps;
  double value(double x) const {
    if (x >= eps) return std::log(x);
    return log_eps - 1.5 + 2.0 * x / eps - 0.5 * (x / eps) * (x / eps);
  }
  double d1(double x) const {
    if (x >= eps) return 1.0 / x;
    return (2.0 - x / eps) / eps;
  }
  double d2(double x) const {
    if (x >= eps) return -1.0 / (x * x);
    return -1.0 / (eps * eps);
  }
};

}  // namespace detail

inline ELSolution solve_el(const MatrixXd& M) {
  const int n = static_cast<int>(M.rows());
  const int q = static_cast<int>(M.cols());
  if (n < q + 1) throw InvalidInput("EL needs n >= q + 1 observations");
  if (!M.allFinite()) throw InvalidInput("constraint matrix has non-finite entries");

  ELSolution sol;
  sol.lambda = VectorXd::Zero(q);

  auto hull_violation = [&]() {
    sol.status = ELSolution::Status::hull_violation;
    sol.log_ratio = kNegInf;
    sol.weights = VectorXd::Constant(n, 1.0 / n);
    return sol;
  };

  // Degenerate rows: all-zero matrix is trivially feasible at lambda = 0.
  const double row_scale = M.cwiseAbs().maxCoeff();
  if (row_scale < 1e-14) {
    sol.weights = VectorXd::Constant(n, 1.0 / n);
    sol.log_ratio = 0.0;
    return sol;
  }

  // One-dimensional hull pretest: zero must be an interior point of the range.
  if (q == 1 && (M.minCoeff() >= 0.0 || M.maxCoeff() <= 0.0)) return hull_violation();

  const detail::LogStar ls(1.0 / n);
  auto objective = [&](const VectorXd& lam) {
    const VectorXd t = VectorXd::Ones(n) + M * lam;
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += ls.value(t[i]);
    return v;
  };

  double f = objective(sol.lambda);
  for (sol.iterations = 0; sol.iterations < 100; ++sol.iterations) {
    const VectorXd t = VectorXd::Ones(n) + M * sol.lambda;
    VectorXd d1(n), d2(n);
    for (int i = 0; i < n; ++i) {
      d1[i] = ls.d1(t[i]);
      d2[i] = ls.d2(t[i]);
    }
    const VectorXd grad = M.transpose() * d1;
    if (grad.cwiseAbs().maxCoeff() / n <= 1e-10 && sol.iterations > 0) break;

    MatrixXd H = M.transpose() * d2.asDiagonal() * M;  // negative semidefinite
    Eigen::LDLT<MatrixXd> ldlt(-H);
    VectorXd dir;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
      dir = ldlt.solve(grad);
    } else {
      dir = (-H + 1e-10 * row_scale * row_scale * MatrixXd::Identity(q, q))
                .ldlt()
                .solve(grad);
    }
    const double slope = grad.dot(dir);
    if (!(slope > 0.0)) break;  // stationary up to rounding

    double alpha = 1.0;
    double fn = f;
    VectorXd lam_new = sol.lambda;
    while (alpha > 1e-14) {
      lam_new = sol.lambda + alpha * dir;
      fn = objective(lam_new);
      if (fn >= f + 1e-4 * alpha * slope) break;
      alpha *= 0.5;
    }
    assert(fn >= f - 1e-9 * (1.0 + std::abs(f)) && "EL dual objective decreased");
    if (!(fn > f)) break;
    sol.lambda = lam_new;
    f = fn;
  }

  const VectorXd t = VectorXd::Ones(n) + M * sol.lambda;
  if (t.minCoeff() <= 1.0 / n) return hull_violation();

  const VectorXd grad_final = M.transpose() * t.cwiseInverse();
  if (grad_final.cwiseAbs().maxCoeff() / n > 1e-8) {
    if (sol.iterations >= 100) {
      sol.status = ELSolution::Status::max_iter;
    } else {
      return hull_violation();
    }
  }

  sol.weights = t.cwiseInverse() / n;
  sol.log_ratio = -t.array().log().sum();
  if (sol.log_ratio > 0.0) sol.log_ratio = std::min(sol.log_ratio, 0.0);
  return sol;
}

// log R_n(mu) for a control set evaluated on data; -inf when mu is outside
// the convex hull of the constraints (the outer optimizer steps over it).
inline double el_loglik_at(const ControlSet& cs, const VectorXd& data,
                           const VectorXd& mu) {
  const MatrixXd M = sample_constraint_matrix(cs, data, mu);
  return solve_el(M).log_ratio;
}

}  // namespace hybridlik
