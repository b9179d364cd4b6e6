#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hybridlik/numerics.hpp"

namespace hybridlik {

// A parametric working model supplied through a uniform callable interface.
// Built-ins carry analytic scores and CDFs; user-defined models may leave
// `score` empty (filled with central finite differences) and `cdf` empty
// (filled by quadrature of the density).
struct ParametricModel {
  std::string name;
  int p = 0;             // parameter dimension
  double y_lo = kNegInf; // observation support
  double y_hi = kInf;

  std::function<double(double, const VectorXd&)> log_density;
  std::function<VectorXd(double, const VectorXd&)> score;
  std::function<bool(const VectorXd&)> support_check;  // parameter space
  std::function<VectorXd(const VectorXd&, int, std::uint64_t)> sampler;
  std::function<double(double, const VectorXd&)> cdf;
  std::function<VectorXd(const VectorXd&)> init;  // moment-based optimizer start
  std::vector<bool> positive;  // coordinates kept positive via log reparameterization

  double density(double y, const VectorXd& theta) const {
    return std::exp(log_density(y, theta));
  }
};

namespace detail {

inline void fill_fd_score(ParametricModel& m) {
  auto ld = m.log_density;
  m.score = [ld](double y, const VectorXd& th) {
    return fd_gradient([&](const VectorXd& t) { return ld(y, t); }, th);
  };
}

inline void fill_quadrature_cdf(ParametricModel& m) {
  auto ld = m.log_density;
  const double lo = m.y_lo;
  m.cdf = [ld, lo](double y, const VectorXd& th) {
    return quad([&](double t) { return std::exp(ld(t, th)); }, lo, y);
  };
}

}  // namespace detail

enum class ModelName { normal, gamma, beta, beta_one };

inline ParametricModel builtin_model(ModelName name) {
  ParametricModel m;
  switch (name) {
    case ModelName::normal: {
      m.name = "normal";
      m.p = 2;
      m.positive = {false, true};
      m.log_density = [](double y, const VectorXd& th) {
        const double z = (y - th[0]) / th[1];
        return -std::log(th[1]) - 0.5 * std::log(2.0 * M_PI) - 0.5 * z * z;
      };
      m.score = [](double y, const VectorXd& th) {
        const double s = th[1], d = y - th[0];
        VectorXd u(2);
        u << d / (s * s), -1.0 / s + d * d / (s * s * s);
        return u;
      };
      m.support_check = [](const VectorXd& th) {
        return th.allFinite() && th[1] > 0.0;
      };
      m.cdf = [](double y, const VectorXd& th) {
        return norm_cdf((y - th[0]) / th[1]);
      };
      m.sampler = [](const VectorXd& th, int n, std::uint64_t seed) {
        Rng rng(seed);
        VectorXd out(n);
        for (int i = 0; i < n; ++i) out[i] = th[0] + th[1] * rng.normal();
        return out;
      };
      m.init = [](const VectorXd& y) {
        VectorXd th(2);
        th[0] = y.mean();
        th[1] = std::sqrt((y.array() - y.mean()).square().mean() + 1e-12);
        return th;
      };
      break;
    }
    case ModelName::gamma: {
      // Shape/rate (b, c): density c^b y^{b-1} e^{-cy} / Gamma(b).
      m.name = "gamma";
      m.p = 2;
      m.y_lo = 0.0;
      m.positive = {true, true};
      m.log_density = [](double y, const VectorXd& th) {
        if (y <= 0.0) return kNegInf;
        const double b = th[0], c = th[1];
        return b * std::log(c) - std::lgamma(b) + (b - 1.0) * std::log(y) - c * y;
      };
      m.score = [](double y, const VectorXd& th) {
        const double b = th[0], c = th[1];
        VectorXd u(2);
        u << std::log(c) + std::log(y) - boost::math::digamma(b), b / c - y;
        return u;
      };
      m.support_check = [](const VectorXd& th) {
        return th.allFinite() && th[0] > 0.0 && th[1] > 0.0;
      };
      m.cdf = [](double y, const VectorXd& th) {
        if (y <= 0.0) return 0.0;
        return boost::math::gamma_p(th[0], th[1] * y);
      };
      m.sampler = [](const VectorXd& th, int n, std::uint64_t seed) {
        Rng rng(seed);
        VectorXd out(n);
        for (int i = 0; i < n; ++i) out[i] = rng.gamma(th[0], th[1]);
        return out;
      };
      m.init = [](const VectorXd& y) {
        const double mean = y.mean();
        const double var = (y.array() - mean).square().mean() + 1e-12;
        VectorXd th(2);
        th << mean * mean / var, mean / var;
        return th;
      };
      break;
    }
    case ModelName::beta: {
      m.name = "beta";
      m.p = 2;
      m.y_lo = 0.0;
      m.y_hi = 1.0;
      m.positive = {true, true};
      m.log_density = [](double y, const VectorXd& th) {
        if (y <= 0.0 || y >= 1.0) return kNegInf;
        const double b = th[0], c = th[1];
        return (b - 1.0) * std::log(y) + (c - 1.0) * std::log1p(-y) -
               (std::lgamma(b) + std::lgamma(c) - std::lgamma(b + c));
      };
      m.score = [](double y, const VectorXd& th) {
        const double b = th[0], c = th[1];
        const double dg = boost::math::digamma(b + c);
        VectorXd u(2);
        u << std::log(y) - boost::math::digamma(b) + dg,
            std::log1p(-y) - boost::math::digamma(c) + dg;
        return u;
      };
      m.support_check = [](const VectorXd& th) {
        return th.allFinite() && th[0] > 0.0 && th[1] > 0.0;
      };
      m.cdf = [](double y, const VectorXd& th) {
        if (y <= 0.0) return 0.0;
        if (y >= 1.0) return 1.0;
        return boost::math::ibeta(th[0], th[1], y);
      };
      m.sampler = [](const VectorXd& th, int n, std::uint64_t seed) {
        Rng rng(seed);
        VectorXd out(n);
        for (int i = 0; i < n; ++i) out[i] = rng.beta(th[0], th[1]);
        return out;
      };
      m.init = [](const VectorXd& y) {
        const double mean = y.mean();
        const double var = (y.array() - mean).square().mean() + 1e-12;
        const double s = std::max(mean * (1.0 - mean) / var - 1.0, 0.2);
        VectorXd th(2);
        th << std::max(mean * s, 0.05), std::max((1.0 - mean) * s, 0.05);
        return th;
      };
      break;
    }
    case ModelName::beta_one: {
      // One-parameter density theta * y^(theta-1) on (0,1), i.e. Beta(theta, 1).
      m.name = "beta_one";
      m.p = 1;
      m.y_lo = 0.0;
      m.y_hi = 1.0;
      m.positive = {true};
      m.log_density = [](double y, const VectorXd& th) {
        if (y <= 0.0 || y >= 1.0) return kNegInf;
        return std::log(th[0]) + (th[0] - 1.0) * std::log(y);
      };
      m.score = [](double y, const VectorXd& th) {
        VectorXd u(1);
        u << 1.0 / th[0] + std::log(y);
        return u;
      };
      m.support_check = [](const VectorXd& th) {
        return th.allFinite() && th[0] > 0.0;
      };
      m.cdf = [](double y, const VectorXd& th) {
        if (y <= 0.0) return 0.0;
        if (y >= 1.0) return 1.0;
        return std::pow(y, th[0]);
      };
      m.sampler = [](const VectorXd& th, int n, std::uint64_t seed) {
        Rng rng(seed);
        VectorXd out(n);
        for (int i = 0; i < n; ++i)
          out[i] = std::pow(std::max(rng.uniform(), 1e-300), 1.0 / th[0]);
        return out;
      };
      m.init = [](const VectorXd& y) {
        const double mean = y.mean();
        VectorXd th(1);
        th << std::max(mean / std::max(1.0 - mean, 1e-3), 0.05);
        return th;
      };
      break;
    }
  }
  return m;
}

inline ParametricModel builtin_model(const std::string& name) {
  if (name == "normal") return builtin_model(ModelName::normal);
  if (name == "gamma") return builtin_model(ModelName::gamma);
  if (name == "beta") return builtin_model(ModelName::beta);
  if (name == "beta_one") return builtin_model(ModelName::beta_one);
  throw UnsupportedModel("unknown model '" + name + "'");
}

// ---------------------------------------------------------------------------
// Wide models: smooth r-dimensional extensions f(y, theta, gamma) collapsing
// to the narrow model at gamma = gamma0.

struct WideModel {
  std::string name;
  ParametricModel narrow;
  int r = 0;
  VectorXd gamma0;

  std::function<double(double, const VectorXd&, const VectorXd&)> log_density_wide;
  // S(y) = d log f(y, theta, gamma0) / d gamma, the extension-direction score.
  std::function<VectorXd(double, const VectorXd&)> score_gamma;
  // Full (p+r)-dimensional score at (theta, gamma).
  std::function<VectorXd(double, const VectorXd&, const VectorXd&)> score_wide;
  std::function<VectorXd(const VectorXd&, const VectorXd&, int, std::uint64_t)>
      sampler_wide;
  std::function<bool(const VectorXd&, const VectorXd&)> support_check_wide;
  std::vector<bool> positive_wide;  // size p + r
};

enum class WideName { beta_one_in_beta, gamma_in_gengamma };

inline WideModel builtin_wide(WideName name) {
  WideModel w;
  switch (name) {
    case WideName::beta_one_in_beta: {
      // Beta(theta, gamma) around theta*y^(theta-1); gamma0 = 1.
      w.name = "beta_one_in_beta";
      w.narrow = builtin_model(ModelName::beta_one);
      w.r = 1;
      w.gamma0 = VectorXd::Constant(1, 1.0);
      w.positive_wide = {true, true};
      w.log_density_wide = [](double y, const VectorXd& th, const VectorXd& g) {
        if (y <= 0.0 || y >= 1.0) return kNegInf;
        const double b = th[0], c = g[0];
        return (b - 1.0) * std::log(y) + (c - 1.0) * std::log1p(-y) -
               (std::lgamma(b) + std::lgamma(c) - std::lgamma(b + c));
      };
      w.score_gamma = [](double y, const VectorXd& th) {
        VectorXd s(1);
        s << std::log1p(-y) - boost::math::digamma(1.0) +
                 boost::math::digamma(th[0] + 1.0);
        return s;
      };
      w.score_wide = [](double y, const VectorXd& th, const VectorXd& g) {
        const double b = th[0], c = g[0];
        const double dg = boost::math::digamma(b + c);
        VectorXd u(2);
        u << std::log(y) - boost::math::digamma(b) + dg,
            std::log1p(-y) - boost::math::digamma(c) + dg;
        return u;
      };
      w.sampler_wide = [](const VectorXd& th, const VectorXd& g, int n,
                          std::uint64_t seed) {
        Rng rng(seed);
        VectorXd out(n);
        for (int i = 0; i < n; ++i) out[i] = rng.beta(th[0], g[0]);
        return out;
      };
      w.support_check_wide = [](const VectorXd& th, const VectorXd& g) {
        return th.allFinite() && g.allFinite() && th[0] > 0.0 && g[0] > 0.0;
      };
      break;
    }
    case WideName::gamma_in_gengamma: {
      // Stacy generalized gamma: gamma*c^b*y^(b*gamma-1)*exp(-c*y^gamma)/Gamma(b),
      // collapsing to Gamma(b, c) at gamma = 1. S(y) = 1 + (b - c*y)*log(y).
      w.name = "gamma_in_gengamma";
      w.narrow = builtin_model(ModelName::gamma);
      w.r = 1;
      w.gamma0 = VectorXd::Constant(1, 1.0);
      w.positive_wide = {true, true, true};
      w.log_density_wide = [](double y, const VectorXd& th, const VectorXd& g) {
        if (y <= 0.0) return kNegInf;
        const double b = th[0], c = th[1], gm = g[0];
        return std::log(gm) + b * std::log(c) + (b * gm - 1.0) * std::log(y) -
               c * std::pow(y, gm) - std::lgamma(b);
      };
      w.score_gamma = [](double y, const VectorXd& th) {
        VectorXd s(1);
        s << 1.0 + (th[0] - th[1] * y) * std::log(y);
        return s;
      };
      w.score_wide = [](double y, const VectorXd& th, const VectorXd& g) {
        const double b = th[0], c = th[1], gm = g[0];
        const double ly = std::log(y), yg = std::pow(y, gm);
        VectorXd u(3);
        u << std::log(c) + gm * ly - boost::math::digamma(b), b / c - yg,
            1.0 / gm + b * ly - c * yg * ly;
        return u;
      };
      w.sampler_wide = [](const VectorXd& th, const VectorXd& g, int n,
                          std::uint64_t seed) {
        Rng rng(seed);
        VectorXd out(n);
        for (int i = 0; i < n; ++i)
          out[i] = std::pow(rng.gamma(th[0], th[1]), 1.0 / g[0]);
        return out;
      };
      w.support_check_wide = [](const VectorXd& th, const VectorXd& g) {
        return th.allFinite() && g.allFinite() && th[0] > 0.0 && th[1] > 0.0 &&
               g[0] > 0.0;
      };
      break;
    }
  }
  return w;
}

inline WideModel builtin_wide(const std::string& name) {
  if (name == "beta_one_in_beta") return builtin_wide(WideName::beta_one_in_beta);
  if (name == "gamma_in_gengamma") return builtin_wide(WideName::gamma_in_gengamma);
  throw UnsupportedModel("unknown wide model '" + name + "'");
}

// ---------------------------------------------------------------------------

// Empirical Fisher information n^-1 sum u u^t at theta (outer-product form).
inline MatrixXd empirical_fisher(const ParametricModel& model, const VectorXd& data,
                                 const VectorXd& theta) {
  const int n = static_cast<int>(data.size());
  MatrixXd J = MatrixXd::Zero(model.p, model.p);
  for (int i = 0; i < n; ++i) {
    const VectorXd u = model.score(data[i], theta);
    if (!u.allFinite())
      throw NumericalFailure("non-finite score at observation " + std::to_string(i));
    J.noalias() += u * u.transpose();
  }
  return J / static_cast<double>(n);
}

}  // namespace hybridlik
