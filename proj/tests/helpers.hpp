#pragma once

// Shared oracles for the test suites. Everything here recomputes expected
// values through routes independent of the library code it checks.

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/polygamma.hpp>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <functional>

#include "hybridlik/models.hpp"

namespace oracle {

using hybridlik::VectorXd;

// Central finite-difference gradient with a caller-chosen step.
inline VectorXd fd_grad(const std::function<double(const VectorXd&)>& f,
                        const VectorXd& x, double h) {
  VectorXd g(x.size());
  for (int j = 0; j < x.size(); ++j) {
    VectorXd up = x, dn = x;
    up[j] += h;
    dn[j] -= h;
    g[j] = (f(up) - f(dn)) / (2.0 * h);
  }
  return g;
}

// Reference ML fits through closed forms / score equations, independent of
// the library's BFGS+simplex path.

inline VectorXd ref_ml_normal(const VectorXd& y) {
  VectorXd th(2);
  th[0] = y.mean();
  th[1] = std::sqrt((y.array() - y.mean()).square().mean());
  return th;
}

inline VectorXd ref_ml_beta_one(const VectorXd& y) {
  VectorXd th(1);
  th[0] = -y.size() / y.array().log().sum();
  return th;
}

// Gamma(b, c) shape/rate: profile c = b / ybar, bisect the b score equation
// log(b/ybar) + mean(log y) - digamma(b) = 0.
inline VectorXd ref_ml_gamma(const VectorXd& y) {
  const double ybar = y.mean();
  const double mlog = y.array().log().mean();
  auto g = [&](double b) { return std::log(b / ybar) + mlog - boost::math::digamma(b); };
  double lo = 1e-6, hi = 1.0;
  while (g(hi) > 0.0) hi *= 2.0;
  while (g(lo) < 0.0) lo *= 0.5;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  VectorXd th(2);
  th[0] = 0.5 * (lo + hi);
  th[1] = th[0] / ybar;
  return th;
}

// Beta(b, c): Newton on the two digamma score equations with trigamma Jacobian.
inline VectorXd ref_ml_beta(const VectorXd& y) {
  const double mlog = y.array().log().mean();
  const double mlog1 = (1.0 - y.array()).log().mean();
  const double mean = y.mean();
  const double var = (y.array() - mean).square().mean();
  const double s = std::max(mean * (1.0 - mean) / var - 1.0, 0.2);
  double b = std::max(mean * s, 0.05), c = std::max((1.0 - mean) * s, 0.05);
  for (int it = 0; it < 200; ++it) {
    const double g1 = boost::math::digamma(b) - boost::math::digamma(b + c) - mlog;
    const double g2 = boost::math::digamma(c) - boost::math::digamma(b + c) - mlog1;
    const double t = boost::math::polygamma(1, b + c);
    const double h11 = boost::math::polygamma(1, b) - t;
    const double h22 = boost::math::polygamma(1, c) - t;
    const double det = h11 * h22 - t * t;
    double db = (h22 * g1 + t * g2) / det;
    double dc = (t * g1 + h11 * g2) / det;
    while (b - db <= 0.0 || c - dc <= 0.0) {
      db *= 0.5;
      dc *= 0.5;
    }
    b -= db;
    c -= dc;
    if (std::abs(g1) + std::abs(g2) < 1e-13) break;
  }
  VectorXd th(2);
  th << b, c;
  return th;
}

// chi^2_1 survival function through the complementary error function series
// route: P(chi2_1 > x) = erfc(sqrt(x/2)).
inline double chi2_1_sf(double x) { return std::erfc(std::sqrt(0.5 * x)); }

}  // namespace oracle
