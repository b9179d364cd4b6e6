#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "hybridlik/el.hpp"

using namespace hybridlik;

TEST_CASE("two-point closed form: data {0,1} at mu = 0.25") {
  // With rows {-0.25, 0.75} the two linear constraints force w = (0.75, 0.25),
  // so log R = log(2*0.75) + log(2*0.25) = log 1.5 + log 0.5.
  MatrixXd M(2, 1);
  M << -0.25, 0.75;
  const ELSolution sol = solve_el(M);
  REQUIRE(sol.status == ELSolution::Status::converged);
  CHECK(sol.weights[0] == Catch::Approx(0.75).margin(1e-8));
  CHECK(sol.weights[1] == Catch::Approx(0.25).margin(1e-8));
  CHECK(sol.log_ratio == Catch::Approx(-0.2876820724517809).margin(1e-8));
}

TEST_CASE("column means zero give lambda zero and uniform weights") {
  MatrixXd M(4, 2);
  M << 1, 0.5, -1, -0.5, 2, 1, -2, -1;
  // columns sum to zero
  const ELSolution sol = solve_el(M);
  REQUIRE(sol.status == ELSolution::Status::converged);
  CHECK(sol.lambda.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(sol.log_ratio == Catch::Approx(0.0).margin(1e-12));
  CHECK((sol.weights.array() - 0.25).abs().maxCoeff() < 1e-12);
}

TEST_CASE("mean outside the hull is flagged") {
  MatrixXd M(2, 1);
  M << -1.5, -0.5;  // data {0,1} at mu = 1.5
  const ELSolution sol = solve_el(M);
  CHECK(sol.status == ELSolution::Status::hull_violation);
  CHECK(sol.log_ratio == kNegInf);
}

TEST_CASE("invariants hold on random feasible problems") {
  Rng rng(31);
  for (int rep = 0; rep < 40; ++rep) {
    const int n = 30 + rep, q = 1 + rep % 3;
    MatrixXd M(n, q);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < q; ++j) M(i, j) = rng.normal() + 0.05;
    const ELSolution sol = solve_el(M);
    if (sol.status != ELSolution::Status::converged) continue;
    CHECK(std::abs(sol.weights.sum() - 1.0) < 1e-10);
    CHECK(sol.weights.minCoeff() > 0.0);
    CHECK((M.transpose() * sol.weights).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(sol.log_ratio <= 1e-12);
    // log_ratio recomputed from the weights
    CHECK(sol.log_ratio ==
          Catch::Approx((sol.weights.array() * n).log().sum()).margin(1e-8));
  }
}

TEST_CASE("scaling equivariance: solve_el(cM) gives lambda/c, same weights") {
  Rng rng(5);
  MatrixXd M(40, 2);
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 2; ++j) M(i, j) = rng.normal() + 0.1 * j;
  const double c = 3.7;
  const ELSolution a = solve_el(M);
  const ELSolution b = solve_el(c * M);
  REQUIRE(a.status == ELSolution::Status::converged);
  REQUIRE(b.status == ELSolution::Status::converged);
  CHECK((b.lambda * c - a.lambda).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((a.weights - b.weights).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(a.log_ratio == Catch::Approx(b.log_ratio).margin(1e-10));
}

TEST_CASE("degenerate constraint matrices") {
  MatrixXd Z = MatrixXd::Zero(5, 2);
  const ELSolution z = solve_el(Z);
  CHECK(z.status == ELSolution::Status::converged);
  CHECK(z.log_ratio == 0.0);

  MatrixXd same(5, 1);
  same.setConstant(0.8);  // all rows equal and nonzero: 0 outside the hull
  CHECK(solve_el(same).status == ELSolution::Status::hull_violation);

  MatrixXd tiny(2, 2);
  tiny.setZero();
  CHECK_THROWS_AS(solve_el(tiny), InvalidInput);  // n < q + 1

  MatrixXd bad(3, 1);
  bad << 1.0, std::numeric_limits<double>::quiet_NaN(), -1.0;
  CHECK_THROWS_AS(solve_el(bad), InvalidInput);
}

TEST_CASE("el_loglik_at: mean control at the sample mean is exact zero") {
  const ParametricModel m = builtin_model(ModelName::normal);
  const ControlSet cs = moment_control(m, {1});
  const VectorXd y = m.sampler((VectorXd(2) << 0.3, 1.0).finished(), 60, 17);
  VectorXd mu(1);
  mu << y.mean();
  CHECK(el_loglik_at(cs, y, mu) == Catch::Approx(0.0).margin(1e-10));
  VectorXd mu_out(1);
  mu_out << y.maxCoeff() + 1.0;
  CHECK(el_loglik_at(cs, y, mu_out) == kNegInf);
}

TEST_CASE("unimodality of log R_n(mu) for the mean control") {
  const ParametricModel m = builtin_model(ModelName::normal);
  const ControlSet cs = moment_control(m, {1});
  Rng rng(99);
  for (int rep = 0; rep < 5; ++rep) {
    VectorXd y(35);
    for (int i = 0; i < y.size(); ++i) y[i] = rng.normal() * (1.0 + rep * 0.2);
    const double ybar = y.mean();
    double prev = kNegInf;
    // increasing on the left of ybar
    for (double muv = ybar - 1.0; muv <= ybar + 1e-9; muv += 0.1) {
      VectorXd mu(1);
      mu << muv;
      const double lr = el_loglik_at(cs, y, mu);
      if (std::isfinite(prev) && std::isfinite(lr)) CHECK(lr >= prev - 1e-10);
      prev = lr;
    }
    // decreasing on the right
    prev = 0.0;
    for (double muv = ybar; muv <= ybar + 1.0; muv += 0.1) {
      VectorXd mu(1);
      mu << muv;
      const double lr = el_loglik_at(cs, y, mu);
      if (std::isfinite(lr)) CHECK(lr <= prev + 1e-10);
      if (std::isfinite(lr)) prev = lr;
    }
  }
}

TEST_CASE("small Wilks check: -2 log R at the true mean is roughly chi2_1") {
  // Trimmed-down version of the acceptance criterion (full run lives there).
  const ParametricModel m = builtin_model(ModelName::normal);
  const ControlSet cs = moment_control(m, {1});
  VectorXd mu(1);
  mu << 0.0;
  double sum = 0.0;
  const int reps = 300;
  for (int r = 0; r < reps; ++r) {
    const VectorXd y = m.sampler((VectorXd(2) << 0, 1).finished(), 200, 4000 + r);
    sum += -2.0 * el_loglik_at(cs, y, mu);
  }
  CHECK(sum / reps == Catch::Approx(1.0).margin(0.25));
}

TEST_CASE("quantile controls at empirical quartiles sit near the EL maximum") {
  const ParametricModel m = builtin_model(ModelName::normal);
  const ControlSet cs = quantile_control(m, {0.25, 0.5, 0.75});
  const int n = 21;
  const VectorXd y = m.sampler((VectorXd(2) << 0, 1).finished(), n, 77);
  std::vector<double> s(y.data(), y.data() + n);
  std::sort(s.begin(), s.end());
  // grid-search oracle over order-statistic triples around the quartiles
  double best = kNegInf;
  for (int i = 2; i <= 8; ++i)
    for (int j = 8; j <= 13; ++j)
      for (int k = 13; k <= 19; ++k) {
        if (!(i < j && j < k)) continue;
        VectorXd mu(3);
        mu << s[i], s[j], s[k];
        best = std::max(best, el_loglik_at(cs, y, mu));
      }
  VectorXd quart(3);
  quart << s[5], s[10], s[15];  // indices for n = 21: 0.25, 0.5, 0.75
  const double at_quart = el_loglik_at(cs, y, quart);
  CHECK(at_quart >= best - 0.35);
}
