#pragma once

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/polygamma.hpp>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>

#include "hybridlik/errors.hpp"

namespace hybridlik {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Quadrature

// Adaptive Gauss-Kronrod over [lo, hi]; infinite endpoints allowed.
inline double quad(const std::function<double(double)>& f, double lo, double hi) {
  if (!(lo < hi)) return 0.0;
  double err = 0.0;
  double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, lo, hi, 12, 1e-11, &err);
  if (!std::isfinite(v)) throw NumericalFailure("quadrature returned non-finite value");
  return v;
}

// ---------------------------------------------------------------------------
// Finite differences (central, h = max(1e-6, 1e-6*|x_j|))

inline double fd_step(double x) { return std::max(1e-6, 1e-6 * std::abs(x)); }

inline VectorXd fd_gradient(const std::function<double(const VectorXd&)>& f,
                            const VectorXd& x) {
  VectorXd g(x.size());
  for (int j = 0; j < x.size(); ++j) {
    const double h = fd_step(x[j]);
    VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    g[j] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

inline double fd_partial(const std::function<double(double)>& f, double x) {
  const double h = fd_step(x);
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// ---------------------------------------------------------------------------
// Symmetric matrices

// Inverse of a symmetric matrix through its eigendecomposition. Eigenvalues
// below 1e-12 * trace are treated as degeneracy and reported, not floored
// further; `what` names the matrix in the error message.
inline MatrixXd sym_inverse(const MatrixXd& A, const char* what) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(A);
  if (es.info() != Eigen::Success)
    throw NumericalFailure(std::string("eigendecomposition failed for ") + what);
  const double floor = 1e-12 * std::max(std::abs(A.trace()), 1e-300);
  const VectorXd& ev = es.eigenvalues();
  if (ev.minCoeff() <= floor)
    throw NumericalFailure(std::string(what) + " is numerically singular");
  return es.eigenvectors() * ev.cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

inline double sym_min_eigenvalue(const MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(A);
  return es.eigenvalues().minCoeff();
}

inline MatrixXd symmetrize(const MatrixXd& A) { return 0.5 * (A + A.transpose()); }

// ---------------------------------------------------------------------------
// Distribution helpers

inline double chi2_cdf(double x, double df = 1.0) {
  if (x <= 0.0) return 0.0;
  return boost::math::cdf(boost::math::chi_squared(df), x);
}

inline double chi2_sf(double x, double df = 1.0) {
  if (x <= 0.0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), x));
}

inline double chi2_quantile(double p, double df = 1.0) {
  return boost::math::quantile(boost::math::chi_squared(df), p);
}

inline double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double norm_quantile(double p) {
  return boost::math::quantile(boost::math::normal(), p);
}

// ---------------------------------------------------------------------------
// RNG. Distributions are implemented here (not via std:: distributions) so a
// seed pins the exact stream across standard libraries.

struct Rng {
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {
    return (gen_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    // Box-Muller; no state carried between calls.
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Marsaglia-Tsang; shape/rate parameterization.
  double gamma(double shape, double rate) {
    if (shape < 1.0) {
      const double u = std::max(uniform(), 1e-300);
      return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      const double x = normal();
      const double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      const double v = t * t * t;
      const double u = std::max(uniform(), 1e-300);
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v / rate;
    }
  }

  double beta(double a, double b) {
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    return x / (x + y);
  }

 private:
  std::mt19937_64 gen_;
};

// Stable per-replicate seed derivation (splitmix64 finalizer).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace hybridlik
