#pragma once

#include "hybridlik/asymptotics.hpp"
#include "hybridlik/el.hpp"
#include "hybridlik/focus.hpp"
#include "hybridlik/mle.hpp"
#include "hybridlik/optim.hpp"

namespace hybridlik {

// The estimation problem behind h_n(theta) = (1-a) l_n(theta) + a log R_n(mu(theta)).
struct HLProblem {
  ParametricModel model;
  ControlSet controls;
  VectorXd data;
  double a = 0.0;  // balance parameter in [0, 1)
  Focus focus;
};

struct OptimTrace {
  int restarts = 0;
  int best_restart = 0;
  int iterations = 0;
  bool converged = false;
};

struct HLFit {
  VectorXd theta_hat;
  double h_max = kNegInf;
  double psi_hat = 0.0;
  AsymptoticBlocks blocks;
  MatrixXd cov_sandwich;  // (J*)^-1 K* (J*)^-1
  double kappa = 0.0;     // focus sd on the sqrt(n) scale; se = kappa / sqrt(n)
  OptimTrace trace;
};

inline void validate(const HLProblem& prob) {
  if (!(prob.a >= 0.0 && prob.a < 1.0))
    throw InvalidInput("balance parameter a must lie in [0,1)");
  if (prob.data.size() == 0) throw InvalidInput("empty data");
  if (!prob.focus.value) throw InvalidInput("problem needs a focus");
}

// Hybrid log-likelihood; -inf outside the parameter space or when mu(theta)
// is EL-infeasible. a = 0 short-circuits to the parametric log-likelihood.
inline double hl_loglik(const HLProblem& prob, const VectorXd& theta) {
  if (!prob.model.support_check(theta)) return kNegInf;
  const double ll = log_likelihood(prob.model, prob.data, theta);
  if (prob.a == 0.0 || !std::isfinite(ll)) return ll;
  VectorXd mu;
  try {
    mu = prob.controls.mu_of_theta(theta);
  } catch (const NumericalError&) {
    return kNegInf;
  }
  const double lr = el_loglik_at(prob.controls, prob.data, mu);
  if (!std::isfinite(lr)) return kNegInf;
  return (1.0 - prob.a) * ll + prob.a * lr;
}

namespace detail {

// Simplex maximization of h_n from the ML warm start plus jittered restarts.
inline OptimResult hl_search(const HLProblem& prob, const VectorXd& theta_init,
                             OptimTrace& trace) {
  ParamTransform tr{prob.model.positive};
  auto obj = [&](const VectorXd& t) {
    return hl_loglik(prob, tr.from_unconstrained(t));
  };
  const VectorXd t0 = tr.to_unconstrained(theta_init);
  Rng jitter(0x5eedeaf1u);
  OptimResult best;
  best.f = kNegInf;
  const int restarts = 4;  // warm start + 3 jitters at 5% relative scale
  for (int s = 0; s < restarts; ++s) {
    VectorXd start = t0;
    if (s > 0)
      for (int j = 0; j < start.size(); ++j)
        start[j] += 0.05 * (std::abs(t0[j]) + 0.1) * jitter.normal();
    if (!std::isfinite(obj(start))) continue;
    OptimResult r = nelder_mead_maximize(obj, start);
    if (r.f > best.f) {
      best = r;
      trace.best_restart = s;
      trace.converged = r.converged;
    }
    trace.iterations += r.iterations;
  }
  trace.restarts = restarts;
  if (!std::isfinite(best.f))
    throw OptimizationFailure("all restarts infeasible in hybrid maximization");
  best.x = tr.from_unconstrained(best.x);
  return best;
}

}  // namespace detail

inline AsymptoticBlocks estimate_blocks(const HLProblem& prob, const VectorXd& theta) {
  return estimate_blocks_at(prob.model, prob.controls, prob.data, theta, prob.a);
}

inline HLFit maximize_hl(const HLProblem& prob, const VectorXd* theta_init = nullptr) {
  validate(prob);
  if (prob.data.size() < prob.model.p + prob.controls.q)
    throw InvalidInput("need n >= p + q observations");
  if (theta_init && !prob.model.support_check(*theta_init))
    throw InvalidInput("theta_init outside the parameter space");
  const VectorXd start = theta_init ? *theta_init : ml_fit(prob.model, prob.data);

  HLFit fit;
  if (prob.a == 0.0) {
    // Pure ML: quasi-Newton result polished by the simplex inside ml_fit.
    fit.theta_hat = theta_init ? ml_fit(prob.model, prob.data, theta_init) : start;
    fit.h_max = log_likelihood(prob.model, prob.data, fit.theta_hat);
    fit.trace.restarts = 1;
    fit.trace.converged = true;
  } else {
    OptimResult r = detail::hl_search(prob, start, fit.trace);
    fit.theta_hat = r.x;
    fit.h_max = r.f;
  }
  fit.psi_hat = prob.focus.psi(fit.theta_hat);
  fit.blocks = estimate_blocks(prob, fit.theta_hat);
  fit.cov_sandwich = fit.blocks.sandwich;
  fit.kappa = kappa_a(fit.blocks, prob.focus.grad(fit.theta_hat));
  return fit;
}

// Profiled hybrid log-likelihood max{h_n(theta) : psi(theta) = psi_value},
// via an escalating quadratic penalty until |psi(theta*) - psi_value| <= 1e-6.
inline double profile_hl(const HLProblem& prob, double psi_value,
                         const VectorXd* start_hint = nullptr,
                         VectorXd* argmax_out = nullptr) {
  validate(prob);
  ParamTransform tr{prob.model.positive};
  VectorXd theta0 = start_hint ? *start_hint : ml_fit(prob.model, prob.data);
  VectorXd t = tr.to_unconstrained(theta0);
  double rho = 1.0;
  for (int round = 0; round < 16; ++round, rho *= 10.0) {
    auto obj = [&](const VectorXd& tt) {
      const VectorXd th = tr.from_unconstrained(tt);
      const double h = hl_loglik(prob, th);
      if (!std::isfinite(h)) return kNegInf;
      const double gap = prob.focus.psi(th) - psi_value;
      return h - rho * gap * gap;
    };
    OptimResult r = nelder_mead_maximize(obj, t);
    if (!std::isfinite(r.f)) continue;
    t = r.x;
    const VectorXd th = tr.from_unconstrained(t);
    if (std::abs(prob.focus.psi(th) - psi_value) <= 1e-6) {
      if (argmax_out) *argmax_out = th;
      return hl_loglik(prob, th);
    }
  }
  throw ProfileInfeasible("profile constraint psi = " + std::to_string(psi_value) +
                          " unreachable");
}

// Deviance 2{h_prof(psi_hat) - h_prof(psi)}; nonnegative, zero at psi_hat.
inline double deviance(const HLProblem& prob, double psi_value, const HLFit& fit) {
  const double prof = profile_hl(prob, psi_value, &fit.theta_hat);
  return std::max(0.0, 2.0 * (fit.h_max - prof));
}

struct ConfidencePoint {
  double psi = 0.0;
  double deviance = 0.0;
  double cc = 0.0;
};

// Confidence curve cc(psi) = Gamma_1(Delta_n(psi) / k_hat) with the plug-in
// scale k_hat = c^t (J*)^-1 K* (J*)^-1 c / c^t (J*)^-1 c.
inline double cc_scale_k(const HLProblem& prob, const HLFit& fit) {
  const VectorXd c = prob.focus.grad(fit.theta_hat);
  const MatrixXd Jsi = sym_inverse(fit.blocks.Jstar, "J*");
  const double denom = c.dot(Jsi * c);
  const double numer = c.dot(fit.blocks.sandwich * c);
  if (!(denom > 0.0) || !(numer > 0.0))
    throw DegenerateFocus("confidence-curve scale k_hat not positive");
  return numer / denom;
}

inline std::vector<ConfidencePoint> confidence_curve(const HLProblem& prob,
                                                     const HLFit& fit,
                                                     const std::vector<double>& psi_grid) {
  const double k = cc_scale_k(prob, fit);
  std::vector<ConfidencePoint> out;
  out.reserve(psi_grid.size());
  VectorXd warm = fit.theta_hat;
  for (double psi : psi_grid) {
    if (!std::isfinite(psi)) throw InvalidInput("psi grid must be finite");
    ConfidencePoint pt;
    pt.psi = psi;
    VectorXd arg;
    const double prof = profile_hl(prob, psi, &warm, &arg);
    pt.deviance = std::max(0.0, 2.0 * (fit.h_max - prof));
    pt.cc = chi2_cdf(pt.deviance / k, 1.0);
    warm = arg;
    out.push_back(pt);
  }
  return out;
}

// Spec'd wrapper: blocks evaluated at the ML position.
inline double select_a_efficiency(const HLProblem& prob, double eps,
                                  const std::vector<double>& a_grid) {
  return select_a_efficiency(prob.model, prob.controls, prob.data, prob.focus, eps,
                             a_grid);
}

}  // namespace hybridlik
