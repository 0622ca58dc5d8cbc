#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "superstep/domeig.hpp"
#include "superstep/problem_dg.hpp"
#include "superstep/problem_fd.hpp"

using namespace superstep;

namespace {

PowerIterConfig plain(double tau = 0.1) {
  PowerIterConfig cfg;
  cfg.tau = tau;
  cfg.warmup_iters = 0;
  cfg.residual_tol = 0.0;
  cfg.norm = NormKind::Component;
  return cfg;
}

const ToleranceSpec kTol{1e-6, 1e-9};

}  // namespace

TEST_CASE("matvec on the identity returns v") {
  const GridLayout l = GridLayout::flat(5);
  const RhsFunction identity = [](double, std::span<const double> u, std::span<double> du) {
    std::copy(u.begin(), u.end(), du.begin());
  };
  const StateVector f = fixtures::random_state(l, 1, 1.0, 2.0);
  for (unsigned seed = 0; seed < 5; ++seed) {
    const StateVector v = fixtures::random_state(l, seed, -100.0, 100.0);
    const StateVector jv = matvec_dq(identity, 0.0, f, v, kTol, NormKind::Component);
    CHECK(fixtures::max_rel_diff(fixtures::to_eigen(jv), fixtures::to_eigen(v)) < 1e-9);
  }
  CHECK_THROWS_AS(matvec_dq(identity, 0.0, f, StateVector(l), kTol, NormKind::Component), std::invalid_argument);
}

TEST_CASE("perturbation size is the reciprocal WRMS norm") {
  const GridLayout l = GridLayout::flat(4);
  const StateVector f(l, 1.0);
  const ToleranceSpec tol{1.0, 0.0};
  StateVector v(l, 2.0);  // ||v||_WRMS = 2
  REQUIRE(wrms_component(v, f, tol) == doctest::Approx(2.0));
  double seen = 0.0;
  const RhsFunction probe = [&](double, std::span<const double> u, std::span<double> du) {
    seen = std::max(seen, std::fabs(u[0] - 1.0));
    std::copy(u.begin(), u.end(), du.begin());
  };
  (void)matvec_dq(probe, 0.0, f, v, tol, NormKind::Component);
  // sigma * v = 0.5 * 2
  CHECK(seen == doctest::Approx(1.0));
}

TEST_CASE("two-by-two fixture with spectrum {-1, -3}") {
  const fixtures::MatrixProblem p(fixtures::symmetric_with_spectrum({-1.0, -3.0}, 4));
  const DomEigEstimate est = power_iterate(p, 0.0, p.initial_condition(), plain(), kTol);
  CHECK(est.converged);
  CHECK(std::fabs(est.lambda_approx + 3.0) / 3.0 < 0.1);
}

TEST_CASE("exact eigenvector start converges on the first Rayleigh quotient") {
  const Eigen::MatrixXd a = fixtures::symmetric_with_spectrum({-1.0, -2.0, -7.0}, 8);
  const fixtures::MatrixProblem p(a);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  PowerIterConfig cfg;
  cfg.warmup_iters = 0;
  cfg.norm = NormKind::Component;
  const Eigen::VectorXd top = eig.eigenvectors().col(0);  // eigenvalue -7
  cfg.initial_vector.assign(top.data(), top.data() + top.size());
  const DomEigEstimate est = power_iterate(p, 0.0, p.initial_condition(), cfg, kTol);
  CHECK(est.converged);
  CHECK(est.iters == 1);
  CHECK(est.lambda_approx == doctest::Approx(-7.0).epsilon(1e-6));
}

TEST_CASE("estimates fall within tau of the truth for many seeds") {
  const std::vector<double> spectrum{-0.5, -2.0, -4.0, -9.0, -10.0};
  const fixtures::MatrixProblem p(fixtures::symmetric_with_spectrum(spectrum, 21));
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    PowerIterConfig cfg;
    cfg.norm = NormKind::Component;
    cfg.seed = seed;
    const DomEigEstimate est = power_iterate(p, 0.0, p.initial_condition(), cfg, kTol);
    REQUIRE(est.converged);
    CHECK(std::fabs(est.lambda_approx + 10.0) / 10.0 < 0.1);
  }
}

TEST_CASE("iteration count does not grow with the spectral gap") {
  int previous = 1 << 30;
  for (double second : {-9.5, -8.0, -6.0, -4.0, -2.0}) {
    const fixtures::MatrixProblem p(Eigen::Vector3d(-10.0, second, -1.0).asDiagonal().toDenseMatrix());
    PowerIterConfig cfg = plain(1e-6);
    cfg.max_iters = 2000;
    const DomEigEstimate est = power_iterate(p, 0.0, p.initial_condition(), cfg, kTol);
    REQUIRE(est.converged);
    CHECK(est.iters <= previous);
    previous = est.iters;
  }
}

TEST_CASE("convergence rate follows the eigenvalue ratio") {
  const double ratio = 0.6;
  const fixtures::MatrixProblem p(Eigen::Vector3d(-10.0, -10.0 * ratio, -1.0).asDiagonal().toDenseMatrix());
  std::vector<double> errs;
  for (int k = 2; k <= 12; ++k) {
    PowerIterConfig cfg = plain(1e-300);
    cfg.max_iters = k;
    const DomEigEstimate est = power_iterate(p, 0.0, p.initial_condition(), cfg, kTol);
    errs.push_back(std::fabs(est.lambda_approx + 10.0));
  }
  // the Rayleigh quotient error of a symmetric matrix shrinks by ratio^2 per step
  const double per_step = std::pow(errs.back() / errs.front(), 1.0 / (errs.size() - 1));
  const double observed = std::sqrt(per_step);
  CHECK(observed > ratio / 2);
  CHECK(observed < ratio * 2);
}

TEST_CASE("estimates on the linear problems do not depend on the linearization state") {
  const FdProblem p(1.0, 32, 2);
  PowerIterConfig cfg;
  const auto a = power_iterate(p, 0.0, fixtures::random_state(p.layout(), 1, 0.5, 1.5), cfg, kTol);
  const auto b = power_iterate(p, 0.0, fixtures::random_state(p.layout(), 2, 0.5, 1.5), cfg, kTol);
  CHECK(std::fabs(a.lambda_approx - b.lambda_approx) / std::fabs(a.lambda_approx) < cfg.tau);
}

TEST_CASE("small-grid estimates agree with the dense spectrum") {
  for (std::size_t n : {16u, 32u}) {
    const DgProblem dg(1.0, n, 2);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(assemble_matrix_dg(dg));
    const double truth = eig.eigenvalues().minCoeff();
    const DomEigEstimate est = power_iterate(dg, 0.0, dg.initial_condition(), PowerIterConfig{}, kTol);
    CHECK(est.converged);
    CHECK(est.iters <= 5);
    CHECK(std::fabs(est.lambda_approx - truth) / std::fabs(truth) < 0.1);
  }
}

TEST_CASE("zero operator triggers one reseed then fails") {
  const fixtures::ZeroProblem p(StateVector(GridLayout::flat(4), 1.0));
  CHECK_THROWS_AS(power_iterate(p, 0.0, p.initial_condition(), plain(), kTol), DomEigError);
}

TEST_CASE("non-finite right-hand side fails") {
  const GridLayout l = GridLayout::flat(3);
  const RhsFunction bad = [](double, std::span<const double>, std::span<double> du) {
    std::fill(du.begin(), du.end(), std::nan(""));
  };
  CHECK_THROWS_AS(power_iterate(bad, 0.0, StateVector(l, 1.0), plain(), kTol), DomEigError);
}

TEST_CASE("effective lambda and the eigensafety warning") {
  DomEigEstimate est;
  est.lambda_approx = -100.0;
  est.converged = true;
  CHECK(effective_lambda(est, EigSafety{1.1}) == doctest::Approx(110.0));
  est.lambda_approx = 5.0;
  CHECK_THROWS_AS(effective_lambda(est, EigSafety{1.1}), DomEigError);
  est.lambda_approx = -1.0;
  est.converged = false;
  CHECK_THROWS_AS(effective_lambda(est, EigSafety{1.1}), DomEigError);

  CHECK(eigsafety_warning(EigSafety{1.1}, 0.1).has_value());
  CHECK(eigsafety_warning(EigSafety{1.0 / 0.9}, 0.1).has_value());
  CHECK_FALSE(eigsafety_warning(EigSafety{1.12}, 0.1).has_value());
}

TEST_CASE("configuration validation") {
  PowerIterConfig cfg;
  cfg.tau = 1.0;
  CHECK_THROWS(cfg.validate());
  cfg.tau = 0.1;
  cfg.max_iters = 1;
  CHECK_THROWS(cfg.validate());
  CHECK_THROWS(EigSafety{0.0}.validate());
}
