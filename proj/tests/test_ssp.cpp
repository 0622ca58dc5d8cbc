#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "superstep/ssp.hpp"
#include "superstep/timeloop.hpp"

using namespace superstep;

namespace {

double poly(const std::vector<double>& c, double z) {
  double r = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * z + *it;
  return r;
}

// Amplification polynomials expanded symbolically from the published recurrences.
const std::vector<double> kR22{1.0, 1.0, 0.5};
const std::vector<double> kR43{1.0, 1.0, 0.5, 1.0 / 6, 1.0 / 48};
const std::vector<double> kR104{1.0,          1.0,          0.5,           1.0 / 6,         1.0 / 24,          17.0 / 2160,
                                7.0 / 6480,   1.0 / 9720,   1.0 / 155520,  1.0 / 4199040,   1.0 / 251942400};

const std::vector<double>& amplification(SspKind k) {
  switch (k) {
    case SspKind::SSP22: return kR22;
    case SspKind::SSP43: return kR43;
    default: return kR104;
  }
}

const SspKind kAll[] = {SspKind::SSP22, SspKind::SSP43, SspKind::SSP104};

}  // namespace

TEST_CASE("structure: stage counts, convexity and non-negativity") {
  const int stages[] = {2, 4, 10};
  for (int order = 2; order <= 4; ++order) {
    const ShuOsherScheme sc = ssp_scheme(order);
    CHECK(sc.order == order);
    CHECK(sc.embed_order == order - 1);
    CHECK(sc.s == stages[order - 2]);
    for (int i = 1; i <= sc.s; ++i) {
      double row = 0.0;
      for (int j = 0; j < i; ++j) {
        CHECK(sc.alpha[i][j] >= 0.0);
        CHECK(sc.beta[i][j] >= 0.0);
        row += sc.alpha[i][j];
      }
      CHECK(row == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
  CHECK_THROWS(ssp_scheme(5));
}

TEST_CASE("SSP coefficients") {
  CHECK(ssp_coefficient(ssp_scheme(2)) == doctest::Approx(1.0));
  CHECK(ssp_coefficient(ssp_scheme(3)) == doctest::Approx(2.0));
  CHECK(ssp_coefficient(ssp_scheme(4)) == doctest::Approx(6.0));
}

TEST_CASE("order conditions of the methods and their embeddings") {
  for (SspKind k : kAll) {
    const ShuOsherScheme sc = ssp_scheme(k);
    const ButcherTableau tab = to_butcher(sc);
    CHECK(row_sum_defect(tab) < 1e-14);
    CHECK(satisfied_order(tab, tab.b) == sc.order);
    CHECK(satisfied_order(tab, tab.b_embed) == sc.embed_order);
  }
}

TEST_CASE("scalar amplification matches the expanded polynomials") {
  const fixtures::MatrixProblem p(Eigen::MatrixXd::Constant(1, 1, -1.0));
  SspStepper st(p.layout());
  for (SspKind k : kAll) {
    const ShuOsherScheme sc = ssp_scheme(k);
    for (double h : {0.01, 0.3, 1.0, 1.9}) {
      REQUIRE(st.step(p.rhs_function(), 0.0, p.initial_condition(), h, sc));
      CHECK(st.f_next()[0] == doctest::Approx(poly(amplification(k), -h)).epsilon(1e-13).scale(1.0));
      CHECK(st.rhs_evals() == sc.s);
    }
  }
}

TEST_CASE("low-storage kernels agree with the all-stage reference") {
  const Eigen::MatrixXd a = fixtures::symmetric_with_spectrum({-0.1, -1.0, -3.0, -5.0, -8.0}, 5);
  const fixtures::MatrixProblem p(a, {1.0, -2.0, 0.5, 3.0, 0.25});
  SspStepper st(p.layout());
  StateVector f(p.layout()), e(p.layout());
  for (SspKind k : kAll) {
    const ShuOsherScheme sc = ssp_scheme(k);
    REQUIRE(st.step(p.rhs_function(), 0.3, p.initial_condition(), 0.07, sc));
    ssp_step_reference(p.rhs_function(), 0.3, p.initial_condition(), 0.07, sc, f, e);
    for (std::size_t i = 0; i < f.size(); ++i) {
      CHECK(st.f_next()[i] == doctest::Approx(f[i]).epsilon(1e-13));
      CHECK(st.error()[i] == doctest::Approx(e[i]).epsilon(1e-10).scale(1e-14));
    }
  }
}

TEST_CASE("quiescent system") {
  const GridLayout l = GridLayout::flat(4);
  const fixtures::ZeroProblem p(fixtures::random_state(l, 3));
  SspStepper st(l);
  for (SspKind k : kAll) {
    REQUIRE(st.step(p.rhs_function(), 0.0, p.initial_condition(), 0.5, ssp_scheme(k)));
    for (std::size_t i = 0; i < l.size(); ++i) {
      CHECK(st.f_next()[i] == doctest::Approx(p.initial_condition()[i]).epsilon(1e-15));
      CHECK(st.error()[i] == 0.0);
    }
  }
}

TEST_CASE("linear-in-time forcing is integrated exactly") {
  const GridLayout l = GridLayout::flat(2);
  const double a = -1.2, b = 4.0, t0 = 0.5, h = 0.2;
  const RhsFunction forcing = [&](double t, std::span<const double>, std::span<double> du) {
    std::fill(du.begin(), du.end(), a + b * t);
  };
  SspStepper st(l);
  const double exact = 1.0 + a * h + b * ((t0 + h) * (t0 + h) - t0 * t0) / 2.0;
  for (SspKind k : kAll) {
    REQUIRE(st.step(forcing, t0, StateVector(l, 1.0), h, ssp_scheme(k)));
    CHECK(st.f_next()[0] == doctest::Approx(exact).epsilon(1e-14));
  }
  // the SSP(2,2) embedding is first order, so its difference sees the forcing slope
  REQUIRE(st.step(forcing, t0, StateVector(l, 1.0), h, ssp_scheme(2)));
  CHECK(std::fabs(st.error()[0]) > 0.0);
}

TEST_CASE("embedded error scales with the embedding order") {
  const fixtures::MatrixProblem p(Eigen::MatrixXd::Constant(1, 1, -1.0));
  SspStepper st(p.layout());
  for (SspKind k : kAll) {
    const ShuOsherScheme sc = ssp_scheme(k);
    std::vector<double> hs, errs;
    for (int m = 0; m <= 4; ++m) {
      const double h = 0.2 / std::pow(2.0, m);
      REQUIRE(st.step(p.rhs_function(), 0.0, p.initial_condition(), h, sc));
      hs.push_back(h);
      errs.push_back(std::fabs(st.error()[0]));
    }
    CHECK(fixtures::observed_order(hs, errs) == doctest::Approx(sc.embed_order + 1.0).epsilon(0.2 / (sc.embed_order + 1)));
  }
}

TEST_CASE("total variation does not grow for upwind advection within the SSP step limit") {
  const int n = 50;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  const double dx = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    a(i, i) = -1.0 / dx;
    a(i, (i + n - 1) % n) = 1.0 / dx;
  }
  std::vector<double> u0(n, 0.0);
  for (int i = 10; i < 25; ++i) u0[i] = 1.0;
  const fixtures::MatrixProblem p(a, u0);
  auto tv = [](const StateVector& u) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += std::fabs(u[(i + 1) % u.size()] - u[i]);
    return s;
  };
  SspStepper st(p.layout());
  for (SspKind k : kAll) {
    const ShuOsherScheme sc = ssp_scheme(k);
    const double h = ssp_coefficient(sc) * dx;  // forward Euler limit is dx
    StateVector u = p.initial_condition();
    for (int step = 0; step < 40; ++step) {
      REQUIRE(st.step(p.rhs_function(), 0.0, u, h, sc));
      CHECK(tv(st.f_next()) <= tv(u) + 1e-12);
      u = st.f_next();
    }
  }
}

TEST_CASE("SSP(2,2) blow-up detection sits at the stability boundary z = -2") {
  const fixtures::MatrixProblem p(Eigen::MatrixXd::Constant(1, 1, -1.0));
  auto run = [&](double h) {
    FixedOptions opt;
    opt.method = Method::SSP2;
    opt.h = h;
    opt.t_f = 2000.0 * h;
    opt.sample_times = {opt.t_f};
    return advance_fixed(p, opt);
  };
  CHECK_FALSE(run(0.95 * 2.0).blew_up());
  CHECK(run(1.05 * 2.0).blew_up());
}

TEST_CASE("blow-up predicate") {
  const GridLayout l = GridLayout::flat(2);
  CHECK_FALSE(blew_up(StateVector(l, 1.0), 1.0));
  CHECK(blew_up(StateVector(l, 2e10), 1.0));
  CHECK(blew_up(StateVector(l, std::nan("")), 1.0));
}
