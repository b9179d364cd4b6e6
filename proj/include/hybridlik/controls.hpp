#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "hybridlik/models.hpp"

namespace hybridlik {

enum class ControlKind { moment, quantile, cell };

// Recipe for one control component; kept so the CLI can echo configurations
// and so focus parameters can be re-evaluated under a wide model.
struct ControlComponentSpec {
  ControlKind kind{};
  double power = 0.0;   // moment
  double level = 0.0;   // quantile
  double lo = 0.0, hi = 0.0;  // cell
  bool hi_open = false;       // half-open partition cells
};

// Estimating functions m(y, mu) with E_theta m(Y, mu(theta)) = 0, the
// model-implied map mu(theta), and its Jacobian. xi0_mode selects how the
// derivative matrix xi0 of the localized EL expansion is formed: smooth
// controls use the chain rule through dm/dmu, quantile controls use the
// density-weighted form (the indicator is not differentiable).
struct ControlSet {
  int q = 0;
  std::function<VectorXd(double, const VectorXd&)> m;
  std::function<VectorXd(const VectorXd&)> mu_of_theta;
  std::function<MatrixXd(const VectorXd&)> dmu_dtheta;  // p x q

  enum class Xi0Mode { smooth, quantile };
  Xi0Mode xi0_mode = Xi0Mode::smooth;

  // dm/dmu (q x q Jacobian); -I for built-in m = g(y) - mu components.
  std::function<MatrixXd(double, const VectorXd&)> m_star;
  // xi0(theta) for quantile mode: rows f(mu_j(theta), theta) * dmu_j/dtheta^t.
  std::function<MatrixXd(const VectorXd&)> xi0_quantile;

  std::vector<ControlComponentSpec> components;
  bool partition = false;
  std::vector<std::pair<double, double>> partition_cells_all;  // incl. dropped cell
};

namespace detail {

inline std::function<MatrixXd(double, const VectorXd&)> fd_m_star(
    std::function<VectorXd(double, const VectorXd&)> m, int q) {
  return [m, q](double y, const VectorXd& mu) {
    MatrixXd J(q, q);
    for (int j = 0; j < q; ++j) {
      const double h = fd_step(mu[j]);
      VectorXd up = mu, dn = mu;
      up[j] += h;
      dn[j] -= h;
      J.col(j) = (m(y, up) - m(y, dn)) / (2.0 * h);
    }
    return J;
  };
}

// E_theta g(Y) by quadrature over the observation support.
inline double model_expectation(const ParametricModel& model, const VectorXd& th,
                                const std::function<double(double)>& g) {
  return quad([&](double y) { return g(y) * model.density(y, th); }, model.y_lo,
              model.y_hi);
}

// d/dtheta E_theta g(Y) via the score identity: integral of g * u * f.
inline VectorXd model_expectation_grad(const ParametricModel& model,
                                       const VectorXd& th,
                                       const std::function<double(double)>& g) {
  VectorXd out(model.p);
  for (int k = 0; k < model.p; ++k)
    out[k] = quad(
        [&](double y) { return g(y) * model.score(y, th)[k] * model.density(y, th); },
        model.y_lo, model.y_hi);
  return out;
}

// Invert the model CDF at probability alpha: bracket then safeguarded Newton,
// tolerance 1e-10 in probability units.
inline double invert_cdf(const ParametricModel& model, const VectorXd& th,
                         double alpha) {
  double lo = model.y_lo, hi = model.y_hi;
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    double anchor = 0.0;
    if (std::isfinite(lo)) anchor = lo + 1.0;
    else if (std::isfinite(hi)) anchor = hi - 1.0;
    double step = 1.0;
    if (!std::isfinite(lo)) {
      lo = anchor;
      while (model.cdf(lo, th) > alpha) {
        lo -= step;
        step *= 2.0;
        if (step > 1e150) throw NumericalFailure("quantile bracketing failed (low)");
      }
    }
    step = 1.0;
    if (!std::isfinite(hi)) {
      hi = anchor;
      while (model.cdf(hi, th) < alpha) {
        hi += step;
        step *= 2.0;
        if (step > 1e150) throw NumericalFailure("quantile bracketing failed (high)");
      }
    }
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double F = model.cdf(x, th);
    const double resid = F - alpha;
    if (std::abs(resid) <= 1e-10) return x;
    if (resid > 0.0) hi = x;
    else lo = x;
    const double f = model.density(x, th);
    double xn = f > 1e-300 ? x - resid / f : 0.5 * (lo + hi);
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    x = xn;
  }
  throw NumericalFailure("quantile inversion did not converge");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Moment controls m_j(y, mu_j) = y^{k_j} - mu_j.

inline ControlSet moment_control(const ParametricModel& model,
                                 const std::vector<int>& powers) {
  if (powers.empty()) throw InvalidInput("moment control needs at least one power");
  ControlSet cs;
  cs.q = static_cast<int>(powers.size());
  cs.xi0_mode = ControlSet::Xi0Mode::smooth;
  for (int k : powers) {
    ControlComponentSpec spec;
    spec.kind = ControlKind::moment;
    spec.power = k;
    cs.components.push_back(spec);
  }
  const int q = cs.q;
  cs.m = [powers, q](double y, const VectorXd& mu) {
    VectorXd v(q);
    for (int j = 0; j < q; ++j) v[j] = std::pow(y, powers[j]) - mu[j];
    return v;
  };
  cs.m_star = [q](double, const VectorXd&) { return MatrixXd(-MatrixXd::Identity(q, q)); };
  cs.mu_of_theta = [model, powers, q](const VectorXd& th) {
    VectorXd mu(q);
    for (int j = 0; j < q; ++j) {
      mu[j] = detail::model_expectation(
          model, th, [&](double y) { return std::pow(y, powers[j]); });
      if (!std::isfinite(mu[j]))
        throw NumericalFailure("divergent moment integral for power " +
                               std::to_string(powers[j]));
    }
    return mu;
  };
  cs.dmu_dtheta = [model, powers, q](const VectorXd& th) {
    MatrixXd d(model.p, q);
    for (int j = 0; j < q; ++j)
      d.col(j) = detail::model_expectation_grad(
          model, th, [&](double y) { return std::pow(y, powers[j]); });
    return d;
  };
  return cs;
}

// ---------------------------------------------------------------------------
// Quantile controls m_j(y, mu_j) = I{y <= mu_j} - alpha_j.

inline ControlSet quantile_control(const ParametricModel& model,
                                   const std::vector<double>& levels) {
  if (levels.empty()) throw InvalidInput("quantile control needs at least one level");
  for (double a : levels)
    if (!(a > 0.0 && a < 1.0))
      throw InvalidLevel("quantile level " + std::to_string(a) + " outside (0,1)");
  ControlSet cs;
  cs.q = static_cast<int>(levels.size());
  cs.xi0_mode = ControlSet::Xi0Mode::quantile;
  for (double a : levels) {
    ControlComponentSpec spec;
    spec.kind = ControlKind::quantile;
    spec.level = a;
    cs.components.push_back(spec);
  }
  const int q = cs.q;
  cs.m = [levels, q](double y, const VectorXd& mu) {
    VectorXd v(q);
    for (int j = 0; j < q; ++j) v[j] = (y <= mu[j] ? 1.0 : 0.0) - levels[j];
    return v;
  };
  ParametricModel mod = model;
  if (!mod.cdf) detail::fill_quadrature_cdf(mod);
  cs.mu_of_theta = [mod, levels, q](const VectorXd& th) {
    VectorXd mu(q);
    for (int j = 0; j < q; ++j) mu[j] = detail::invert_cdf(mod, th, levels[j]);
    return mu;
  };
  // dmu_j/dtheta = -dF/dtheta(mu_j) / f(mu_j); dF/dtheta by the score identity.
  cs.dmu_dtheta = [mod, levels, q](const VectorXd& th) {
    MatrixXd d(mod.p, q);
    for (int j = 0; j < q; ++j) {
      const double x = detail::invert_cdf(mod, th, levels[j]);
      VectorXd dF(mod.p);
      for (int k = 0; k < mod.p; ++k)
        dF[k] = quad(
            [&](double y) { return mod.score(y, th)[k] * mod.density(y, th); },
            mod.y_lo, x);
      d.col(j) = -dF / mod.density(x, th);
    }
    return d;
  };
  auto dmu = cs.dmu_dtheta;
  auto mu_of = cs.mu_of_theta;
  cs.xi0_quantile = [mod, dmu, mu_of, q](const VectorXd& th) {
    const VectorXd mu = mu_of(th);
    const MatrixXd d = dmu(th);
    MatrixXd xi0(q, mod.p);
    for (int j = 0; j < q; ++j)
      xi0.row(j) = mod.density(mu[j], th) * d.col(j).transpose();
    return xi0;
  };
  return cs;
}

// ---------------------------------------------------------------------------
// Cell controls m_j(y, p_j) = I{y in A_j} - p_j. With partition = true the
// cells must cover the support and the last one is dropped (it is redundant).

inline ControlSet cell_control(const ParametricModel& model,
                               std::vector<std::pair<double, double>> cells,
                               bool partition = false) {
  if (cells.empty()) throw InvalidCells("no cells given");
  for (auto& [lo, hi] : cells) {
    lo = std::max(lo, model.y_lo);
    hi = std::min(hi, model.y_hi);
    if (!(lo < hi)) throw InvalidCells("empty cell after clipping to support");
  }
  std::vector<std::pair<double, double>> sorted = cells;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].first < sorted[i - 1].second - 1e-12)
      throw InvalidCells("overlapping cells");
  if (partition) {
    if (cells.size() < 2) throw InvalidCells("a partition needs at least two cells");
    const double tol = 1e-9;
    if (std::abs(sorted.front().first - model.y_lo) > tol &&
        !(std::isinf(sorted.front().first) && std::isinf(model.y_lo)))
      throw InvalidCells("partition does not reach the lower support end");
    if (std::abs(sorted.back().second - model.y_hi) > tol &&
        !(std::isinf(sorted.back().second) && std::isinf(model.y_hi)))
      throw InvalidCells("partition does not reach the upper support end");
    for (std::size_t i = 1; i < sorted.size(); ++i)
      if (std::abs(sorted[i].first - sorted[i - 1].second) > tol)
        throw InvalidCells("partition has gaps");
  } else {
    for (const auto& [lo, hi] : cells)
      if (lo <= model.y_lo && hi >= model.y_hi)
        throw InvalidCells("cell covers the whole support; constraint is degenerate");
  }

  ControlSet cs;
  cs.partition = partition;
  cs.partition_cells_all = cells;
  std::vector<ControlComponentSpec> specs;
  const std::size_t keep = partition ? cells.size() - 1 : cells.size();
  for (std::size_t j = 0; j < keep; ++j) {
    ControlComponentSpec spec;
    spec.kind = ControlKind::cell;
    spec.lo = cells[j].first;
    spec.hi = cells[j].second;
    spec.hi_open = partition && cells[j].second < model.y_hi;
    specs.push_back(spec);
  }
  cs.q = static_cast<int>(specs.size());
  cs.components = specs;
  const int q = cs.q;
  cs.xi0_mode = ControlSet::Xi0Mode::smooth;
  cs.m = [specs, q](double y, const VectorXd& mu) {
    VectorXd v(q);
    for (int j = 0; j < q; ++j) {
      const auto& s = specs[j];
      const bool in = y >= s.lo && (s.hi_open ? y < s.hi : y <= s.hi);
      v[j] = (in ? 1.0 : 0.0) - mu[j];
    }
    return v;
  };
  cs.m_star = [q](double, const VectorXd&) { return MatrixXd(-MatrixXd::Identity(q, q)); };
  cs.mu_of_theta = [model, specs, q](const VectorXd& th) {
    VectorXd mu(q);
    for (int j = 0; j < q; ++j)
      mu[j] = quad([&](double y) { return model.density(y, th); }, specs[j].lo,
                   specs[j].hi);
    return mu;
  };
  cs.dmu_dtheta = [model, specs, q](const VectorXd& th) {
    MatrixXd d(model.p, q);
    for (int j = 0; j < q; ++j)
      for (int k = 0; k < model.p; ++k)
        d(k, j) = quad(
            [&](double y) { return model.score(y, th)[k] * model.density(y, th); },
            specs[j].lo, specs[j].hi);
    return d;
  };
  return cs;
}

// ---------------------------------------------------------------------------

// Row i holds m(Y_i, mu); the n x q input to the EL solver.
inline MatrixXd sample_constraint_matrix(const ControlSet& cs, const VectorXd& data,
                                         const VectorXd& mu) {
  const int n = static_cast<int>(data.size());
  MatrixXd M(n, cs.q);
  for (int i = 0; i < n; ++i) {
    M.row(i) = cs.m(data[i], mu).transpose();
    if (!M.row(i).allFinite())
      throw NumericalFailure("non-finite constraint value at observation " +
                             std::to_string(i));
  }
  return M;
}

}  // namespace hybridlik
