#include <doctest.h>

#include <cmath>
#include <complex>

#include "fixtures.hpp"
#include "superstep/dirk.hpp"
#include "superstep/problem_fd.hpp"

using namespace superstep;

namespace {

/// R(z) = 1 + z b^T (I - z A)^{-1} 1
double stability_function(const ButcherTableau& tab, double z) {
  const int s = tab.s;
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(s, s);
  Eigen::VectorXd b(s);
  for (int i = 0; i < s; ++i) {
    b(i) = tab.b[i];
    for (int j = 0; j < s; ++j) m(i, j) -= z * tab.a[i][j];
  }
  return 1.0 + z * b.dot(m.partialPivLu().solve(Eigen::VectorXd::Ones(s)));
}

int implicit_stages(const ButcherTableau& tab) {
  int n = 0;
  for (int i = 0; i < tab.s; ++i) n += tab.diag(i) != 0.0 ? 1 : 0;
  return n;
}

NewtonConfig tight() {
  NewtonConfig cfg;
  cfg.tolerance = 1e-3;
  cfg.cg_factor = 1e-7;
  return cfg;
}

}  // namespace

TEST_CASE("tableaus satisfy their order conditions") {
  for (int order : {2, 3}) {
    const ButcherTableau tab = dirk_tableau(order);
    CHECK(tab.order == order);
    CHECK(row_sum_defect(tab) < 1e-14);
    CHECK(satisfied_order(tab, tab.b, 1e-14) == order);
    CHECK(satisfied_order(tab, tab.b_embed, 1e-14) == tab.embed_order);
    CHECK(tab.embed_order < order);
    for (int i = 0; i < tab.s; ++i) {
      for (int j = i + 1; j < tab.s; ++j) CHECK(tab.a[i][j] == 0.0);
    }
  }
  const ButcherTableau two = dirk_tableau(2);
  double sb = 0.0, sbc = 0.0;
  for (int i = 0; i < two.s; ++i) {
    sb += two.b[i];
    sbc += two.b[i] * two.c[i];
  }
  CHECK(std::fabs(sb - 1.0) < 1e-14);
  CHECK(std::fabs(sbc - 0.5) < 1e-14);
  CHECK(two.diag(1) == doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)).epsilon(1e-15));

  const ButcherTableau three = dirk_tableau(3);
  CHECK(three.s == 5);
  CHECK(three.stiffly_accurate());
  for (int j = 0; j < three.s; ++j) CHECK(three.a[4][j] == three.b[j]);
  CHECK(three.diag(1) == doctest::Approx(9.0 / 40.0));
  CHECK_THROWS(dirk_tableau(4));
}

TEST_CASE("A-stability of the order-2 scheme") {
  const ButcherTableau tab = dirk_tableau(2);
  for (double z : {-1e6, -1e3, -10.0, -1.0}) CHECK(std::fabs(stability_function(tab, z)) <= 1.0);

  const fixtures::MatrixProblem p(Eigen::MatrixXd::Constant(1, 1, -1e6));
  DirkStepper st(p.layout(), tab);
  const auto diag = p.jacobian_diagonal();
  const DirkStepResult r = st.step(p.rhs_function(), 0.0, p.initial_condition(), 1.0, tight(), ToleranceSpec{1e-6, 1e-9},
                                   diag->values());
  REQUIRE(r.ok);
  CHECK(std::fabs(st.f_next()[0]) <= 1.0);
}

TEST_CASE("scalar amplification equals the tableau stability function") {
  for (int order : {2, 3}) {
    const ButcherTableau tab = dirk_tableau(order);
    for (double lambda : {-0.5, -4.0, -40.0}) {
      const fixtures::MatrixProblem p(Eigen::MatrixXd::Constant(1, 1, lambda));
      DirkStepper st(p.layout(), tab);
      const double h = 0.3;
      const auto r = st.step(p.rhs_function(), 0.0, p.initial_condition(), h, tight(), ToleranceSpec{1e-8, 1e-12},
                             p.jacobian_diagonal()->values());
      REQUIRE(r.ok);
      CHECK(st.f_next()[0] == doctest::Approx(stability_function(tab, h * lambda)).epsilon(1e-8));
    }
  }
}

TEST_CASE("quiescent system needs no Newton updates") {
  const GridLayout l = GridLayout::flat(5);
  const fixtures::ZeroProblem p(fixtures::random_state(l, 1));
  for (int order : {2, 3}) {
    DirkStepper st(l, dirk_tableau(order));
    const auto r = st.step(p.rhs_function(), 0.0, p.initial_condition(), 0.5, NewtonConfig{}, ToleranceSpec{}, {});
    REQUIRE(r.ok);
    CHECK(r.newton_iters == 0);
    CHECK(r.cg_iters == 0);
    for (std::size_t i = 0; i < l.size(); ++i) CHECK(st.f_next()[i] == p.initial_condition()[i]);
    CHECK(max_abs(st.error().values()) == 0.0);
  }
}

TEST_CASE("linear problems converge in one Newton iteration per implicit stage") {
  const FdProblem p(1.0, 32, 2);
  const auto diag = p.jacobian_diagonal();
  for (int order : {2, 3}) {
    DirkStepper st(p.layout(), dirk_tableau(order));
    const auto r = st.step(p.rhs_function(), 0.0, p.initial_condition(), 0.01, tight(), ToleranceSpec{1e-6, 1e-11},
                           diag->values());
    REQUIRE(r.ok);
    CHECK(r.newton_iters == implicit_stages(st.tableau()));
  }
}

TEST_CASE("CG on identity and on diagonal systems") {
  const std::vector<double> b{1.0, -2.0, 3.0, 0.5};
  std::vector<double> x(4);
  const LinearOperator identity = [](std::span<const double> v, std::span<double> y) {
    std::copy(v.begin(), v.end(), y.begin());
  };
  CgResult r = cg_solve(identity, b, {}, 1e-12, 50, x);
  CHECK(r.status == CgStatus::Converged);
  CHECK(r.iters == 1);
  for (int i = 0; i < 4; ++i) CHECK(x[i] == doctest::Approx(b[i]));

  const std::vector<double> d{1.0, 10.0, 100.0, 1000.0};
  const LinearOperator diag = [&](std::span<const double> v, std::span<double> y) {
    for (std::size_t i = 0; i < v.size(); ++i) y[i] = d[i] * v[i];
  };
  r = cg_solve(diag, b, d, 1e-12, 50, x);
  CHECK(r.status == CgStatus::Converged);
  CHECK(r.iters == 1);
  for (int i = 0; i < 4; ++i) CHECK(x[i] == doctest::Approx(b[i] / d[i]));

  r = cg_solve(diag, b, {}, 1e-12, 2, x);
  CHECK(r.status == CgStatus::MaxIters);

  const LinearOperator negative = [](std::span<const double> v, std::span<double> y) {
    for (std::size_t i = 0; i < v.size(); ++i) y[i] = -v[i];
  };
  CHECK(cg_solve(negative, b, {}, 1e-12, 10, x).status == CgStatus::Indefinite);
}

TEST_CASE("CG stage solve matches a dense factorization") {
  const FdProblem p(1.0, 32, 4);
  const Eigen::MatrixXd a = assemble_matrix_fd(p);
  const double hg = 0.05 * (1.0 - 1.0 / std::sqrt(2.0));
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(a.rows(), a.cols()) - hg * a;
  const StateVector rhs = fixtures::random_state(p.layout(), 17);
  const Eigen::VectorXd dense = m.ldlt().solve(fixtures::to_eigen(rhs));

  const LinearOperator apply = [&](std::span<const double> v, std::span<double> y) {
    Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())) =
        m * Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  };
  std::vector<double> pc(p.layout().size());
  const auto diag = p.jacobian_diagonal();
  for (std::size_t i = 0; i < pc.size(); ++i) pc[i] = 1.0 - hg * (*diag)[i];
  std::vector<double> x(pc.size());
  const CgResult r = cg_solve(apply, rhs.values(), pc, 1e-13, 1000, x);
  REQUIRE(r.status == CgStatus::Converged);
  CHECK(fixtures::max_rel_diff(Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())), dense) <
        1e-8);
}

TEST_CASE("Jacobi preconditioning reduces CG iterations on stiff stage systems") {
  // near hλ = 10 the stage matrix is close to the identity and the counts are within a few iterations either way
  const FdProblem p(1.0, 64, 64);
  const auto diag = p.jacobian_diagonal();
  for (int order : {2, 3}) {
    for (double hl : {100.0, 1000.0}) {
      const double h = hl / p.lambda_user();
      DirkStepper st(p.layout(), dirk_tableau(order));
      const ToleranceSpec tol{1e-6, 1e-11};
      const auto with = st.step(p.rhs_function(), 0.0, p.initial_condition(), h, NewtonConfig{}, tol, diag->values());
      const auto without = st.step(p.rhs_function(), 0.0, p.initial_condition(), h, NewtonConfig{}, tol, {});
      REQUIRE(with.ok);
      REQUIRE(without.ok);
      CHECK(with.cg_iters < without.cg_iters);
    }
  }
}

TEST_CASE("Newton configuration validation") {
  NewtonConfig cfg;
  cfg.tolerance = 0.0;
  CHECK_THROWS(cfg.validate());
}
