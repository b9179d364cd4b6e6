#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "hybridlik/models.hpp"

using namespace hybridlik;

namespace {

const std::vector<std::pair<std::string, VectorXd>> interior_points() {
  std::vector<std::pair<std::string, VectorXd>> pts;
  pts.emplace_back("normal", (VectorXd(2) << 0.3, 1.4).finished());
  pts.emplace_back("gamma", (VectorXd(2) << 1.6077, 0.0524).finished());
  pts.emplace_back("beta", (VectorXd(2) << 2.0, 3.0).finished());
  pts.emplace_back("beta_one", (VectorXd(1) << 2.0).finished());
  return pts;
}

double test_point(const ParametricModel& m) {
  if (std::isfinite(m.y_hi)) return 0.37;
  if (std::isfinite(m.y_lo)) return m.y_lo + 7.3;
  return 0.6;
}

}  // namespace

TEST_CASE("builtin densities integrate to one over the support") {
  for (const auto& [name, th] : interior_points()) {
    const ParametricModel m = builtin_model(name);
    const double mass =
        quad([&](double y) { return m.density(y, th); }, m.y_lo, m.y_hi);
    INFO(name);
    CHECK(mass == Catch::Approx(1.0).margin(1e-6));
  }
}

TEST_CASE("analytic scores match central finite differences of log_density") {
  for (const auto& [name, th] : interior_points()) {
    const ParametricModel m = builtin_model(name);
    const double y = test_point(m);
    const VectorXd fd = oracle::fd_grad(
        [&](const VectorXd& t) { return m.log_density(y, t); }, th, 1e-6);
    const VectorXd an = m.score(y, th);
    INFO(name);
    CHECK((an - fd).cwiseAbs().maxCoeff() < 1e-5 * (1.0 + an.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("spot values of built-in log densities") {
  const ParametricModel normal = builtin_model(ModelName::normal);
  CHECK(normal.log_density(0.0, (VectorXd(2) << 0.0, 1.0).finished()) ==
        Catch::Approx(-0.9189385332046727).margin(1e-12));

  const ParametricModel b1 = builtin_model(ModelName::beta_one);
  // log theta + (theta-1) log y at (0.5, 2) = log 2 + log 0.5 = 0.
  CHECK(b1.log_density(0.5, (VectorXd(1) << 2.0).finished()) ==
        Catch::Approx(0.0).margin(1e-14));

  const ParametricModel g = builtin_model(ModelName::gamma);
  const VectorXd egypt_theta = (VectorXd(2) << 1.6077, 0.0524).finished();
  CHECK(std::isfinite(g.log_density(1.5, egypt_theta)));
  CHECK(std::isfinite(g.log_density(96.0, egypt_theta)));

  CHECK_THROWS_AS(builtin_model("weibull"), UnsupportedModel);
}

TEST_CASE("samplers are deterministic given seed") {
  const ParametricModel b1 = builtin_model(ModelName::beta_one);
  const VectorXd th = (VectorXd(1) << 2.0).finished();
  const VectorXd a = b1.sampler(th, 5, 7);
  const VectorXd b = b1.sampler(th, 5, 7);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  const VectorXd c = b1.sampler(th, 5, 8);
  CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("wide models collapse to the narrow density at gamma0") {
  for (const std::string name : {"beta_one_in_beta", "gamma_in_gengamma"}) {
    const WideModel w = builtin_wide(name);
    const double y = test_point(w.narrow);
    VectorXd th = w.narrow.init ? VectorXd() : VectorXd();
    th = name == "beta_one_in_beta" ? (VectorXd(1) << 2.0).finished()
                                    : (VectorXd(2) << 1.7, 0.3).finished();
    INFO(name);
    CHECK(w.log_density_wide(y, th, w.gamma0) == w.narrow.log_density(y, th));
  }
  CHECK_THROWS_AS(builtin_wide("cauchy_in_t"), UnsupportedModel);
}

TEST_CASE("score_gamma matches finite differences in gamma at gamma0") {
  for (const std::string name : {"beta_one_in_beta", "gamma_in_gengamma"}) {
    const WideModel w = builtin_wide(name);
    const VectorXd th = name == "beta_one_in_beta"
                            ? (VectorXd(1) << 2.0).finished()
                            : (VectorXd(2) << 1.7, 0.3).finished();
    const double y = test_point(w.narrow);
    const VectorXd fd = oracle::fd_grad(
        [&](const VectorXd& g) { return w.log_density_wide(y, th, g); }, w.gamma0,
        1e-6);
    INFO(name);
    CHECK((w.score_gamma(y, th) - fd).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("wide score matches finite differences in all coordinates") {
  const WideModel w = builtin_wide(WideName::gamma_in_gengamma);
  const VectorXd th = (VectorXd(2) << 1.7, 0.3).finished();
  const VectorXd g = (VectorXd(1) << 1.2).finished();
  const double y = 4.2;
  VectorXd full(3);
  full << th, g;
  const VectorXd fd = oracle::fd_grad(
      [&](const VectorXd& x) {
        return w.log_density_wide(y, x.head(2), x.tail(1));
      },
      full, 1e-6);
  CHECK((w.score_wide(y, th, g) - fd).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("empirical fisher: normal diag form by Monte Carlo") {
  const ParametricModel m = builtin_model(ModelName::normal);
  const VectorXd th = (VectorXd(2) << 0.0, 1.0).finished();
  const VectorXd y = m.sampler(th, 100000, 123);
  VectorXd that(2);
  that << y.mean(), std::sqrt((y.array() - y.mean()).square().mean());
  const MatrixXd J = empirical_fisher(m, y, that);
  const double s2 = that[1] * that[1];
  CHECK(J(0, 0) == Catch::Approx(1.0 / s2).epsilon(0.05));
  CHECK(J(1, 1) == Catch::Approx(2.0 / s2).epsilon(0.05));
  CHECK(std::abs(J(0, 1)) < 0.05);
}

TEST_CASE("empirical fisher: rank-one for a single observation") {
  const ParametricModel m = builtin_model(ModelName::normal);
  const VectorXd th = (VectorXd(2) << 0.0, 1.0).finished();
  VectorXd y(1);
  y << 0.7;
  const MatrixXd J = empirical_fisher(m, y, th);
  const VectorXd u = m.score(0.7, th);
  CHECK((J - u * u.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(J.jacobiSvd().rank() <= 1);
}

TEST_CASE("empirical fisher: beta_one information 1/theta^2 by Monte Carlo") {
  const ParametricModel m = builtin_model(ModelName::beta_one);
  const VectorXd th = (VectorXd(1) << 1.0).finished();  // uniform data
  const VectorXd y = m.sampler(th, 100000, 5);
  const MatrixXd J = empirical_fisher(m, y, th);
  CHECK(J(0, 0) == Catch::Approx(1.0).epsilon(0.05));
}

TEST_CASE("empirical fisher is positive definite at the ML estimate") {
  // 50 seeded samples; flag any failure.
  const ParametricModel m = builtin_model(ModelName::gamma);
  const VectorXd th = (VectorXd(2) << 2.0, 1.0).finished();
  for (int s = 0; s < 50; ++s) {
    const VectorXd y = m.sampler(th, 120, 1000 + s);
    const MatrixXd J = empirical_fisher(m, y, oracle::ref_ml_gamma(y));
    INFO("seed " << s);
    CHECK(sym_min_eigenvalue(J) > 0.0);
  }
}

TEST_CASE("non-finite score reports the offending observation") {
  ParametricModel m = builtin_model(ModelName::gamma);
  VectorXd y(3);
  y << 1.0, -2.0, 3.0;  // negative observation outside gamma support
  const VectorXd th = (VectorXd(2) << 2.0, 1.0).finished();
  CHECK_THROWS_WITH(empirical_fisher(m, y, th),
                    Catch::Matchers::ContainsSubstring("observation 1"));
}
