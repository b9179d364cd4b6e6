#pragma once

#include "hybridlik/models.hpp"
#include "hybridlik/optim.hpp"

namespace hybridlik {

inline double log_likelihood(const ParametricModel& model, const VectorXd& data,
                             const VectorXd& theta) {
  if (!model.support_check(theta)) return kNegInf;
  double ll = 0.0;
  for (int i = 0; i < data.size(); ++i) {
    const double v = model.log_density(data[i], theta);
    if (!std::isfinite(v)) return kNegInf;
    ll += v;
  }
  return ll;
}

// Parametric ML by quasi-Newton in the log-reparameterized space, started
// from the model's moment-based init.
inline VectorXd ml_fit(const ParametricModel& model, const VectorXd& data,
                       const VectorXd* init = nullptr) {
  ParamTransform tr{model.positive};
  const VectorXd theta0 = init ? *init : model.init(data);
  if (!model.support_check(theta0)) throw OptimizationFailure("ML start infeasible");
  auto f = [&](const VectorXd& t) {
    return log_likelihood(model, data, tr.from_unconstrained(t));
  };
  auto g = [&](const VectorXd& t) {
    const VectorXd th = tr.from_unconstrained(t);
    VectorXd s = VectorXd::Zero(model.p);
    for (int i = 0; i < data.size(); ++i) s += model.score(data[i], th);
    return VectorXd(tr.chain(t, s));
  };
  OptimResult r = bfgs_maximize(f, g, tr.to_unconstrained(theta0));
  // Polish with a short simplex run; BFGS can stall on flat curvature.
  OptimResult nm = nelder_mead_maximize(f, r.x, 0.01);
  const VectorXd best = nm.f > r.f ? nm.x : r.x;
  if (!std::isfinite(std::max(nm.f, r.f)))
    throw OptimizationFailure("ML fit failed: objective not finite");
  return tr.from_unconstrained(best);
}

}  // namespace hybridlik
