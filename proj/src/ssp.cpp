#include "superstep/ssp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace superstep {

namespace {

ShuOsherScheme blank(SspKind kind, std::string name, int s, int order) {
  ShuOsherScheme sc;
  sc.kind = kind;
  sc.name = std::move(name);
  sc.s = s;
  sc.alpha.assign(s + 1, std::vector<double>(s, 0.0));
  sc.beta.assign(s + 1, std::vector<double>(s, 0.0));
  sc.order = order;
  sc.embed_order = order - 1;
  return sc;
}

}  // namespace

ShuOsherScheme ssp_scheme(int order) {
  switch (order) {
    case 2:
      return ssp_scheme(SspKind::SSP22);
    case 3:
      return ssp_scheme(SspKind::SSP43);
    case 4:
      return ssp_scheme(SspKind::SSP104);
    default:
      throw std::invalid_argument("unsupported SSP order " + std::to_string(order));
  }
}

ShuOsherScheme ssp_scheme(SspKind kind) {
  switch (kind) {
    case SspKind::SSP22: {
      ShuOsherScheme sc = blank(kind, "ssp2", 2, 2);
      sc.alpha[1][0] = 1.0;
      sc.beta[1][0] = 1.0;
      sc.alpha[2][0] = 0.5;
      sc.alpha[2][1] = 0.5;
      sc.beta[2][1] = 0.5;
      sc.c = {0.0, 1.0};
      sc.b = {0.5, 0.5};
      sc.b_embed = {0.75, 0.25};
      return sc;
    }
    case SspKind::SSP43: {
      ShuOsherScheme sc = blank(kind, "ssp3", 4, 3);
      sc.alpha[1][0] = 1.0;
      sc.beta[1][0] = 0.5;
      sc.alpha[2][1] = 1.0;
      sc.beta[2][1] = 0.5;
      sc.alpha[3][0] = 2.0 / 3.0;
      sc.alpha[3][2] = 1.0 / 3.0;
      sc.beta[3][2] = 1.0 / 6.0;
      sc.alpha[4][3] = 1.0;
      sc.beta[4][3] = 0.5;
      sc.c = {0.0, 0.5, 1.0, 0.5};
      sc.b = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 0.5};
      sc.b_embed = {0.25, 0.25, 0.25, 0.25};
      return sc;
    }
    case SspKind::SSP104: {
      ShuOsherScheme sc = blank(kind, "ssp4", 10, 4);
      for (int i = 1; i <= 9; ++i) {
        if (i == 5) continue;
        sc.alpha[i][i - 1] = 1.0;
        sc.beta[i][i - 1] = 1.0 / 6.0;
      }
      sc.alpha[5][0] = 3.0 / 5.0;
      sc.alpha[5][4] = 2.0 / 5.0;
      sc.beta[5][4] = 1.0 / 15.0;
      sc.alpha[10][0] = 1.0 / 25.0;
      sc.alpha[10][4] = 9.0 / 25.0;
      sc.beta[10][4] = 3.0 / 50.0;
      sc.alpha[10][9] = 3.0 / 5.0;
      sc.beta[10][9] = 1.0 / 10.0;
      sc.c = {0.0, 1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0, 4.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0, 4.0 / 6.0, 5.0 / 6.0, 1.0};
      sc.b.assign(10, 0.1);
      sc.b_embed = {0.2, 0.0, 0.0, 0.3, 0.0, 0.0, 0.2, 0.0, 0.3, 0.0};
      return sc;
    }
  }
  throw std::invalid_argument("unknown SSP scheme");
}

ButcherTableau to_butcher(const ShuOsherScheme& sc) {
  const int s = sc.s;
  // rows[i] = Butcher row of u^(i) in terms of F_0..F_{s-1}
  std::vector<std::vector<double>> rows(s + 1, std::vector<double>(s, 0.0));
  for (int i = 1; i <= s; ++i) {
    for (int j = 0; j < i; ++j) {
      for (int k = 0; k < s; ++k) rows[i][k] += sc.alpha[i][j] * rows[j][k];
      rows[i][j] += sc.beta[i][j];
    }
  }
  ButcherTableau tab;
  tab.name = sc.name;
  tab.s = s;
  tab.a.assign(rows.begin(), rows.begin() + s);
  tab.b = rows[s];
  tab.b_embed = sc.b_embed;
  tab.c.resize(s);
  for (int i = 0; i < s; ++i) {
    double sum = 0.0;
    for (double x : tab.a[i]) sum += x;
    tab.c[i] = sum;
  }
  tab.order = sc.order;
  tab.embed_order = sc.embed_order;
  return tab;
}

double ssp_coefficient(const ShuOsherScheme& sc) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= sc.s; ++i) {
    for (int j = 0; j < i; ++j) {
      if (sc.beta[i][j] > 0.0) best = std::min(best, sc.alpha[i][j] / sc.beta[i][j]);
    }
  }
  return best;
}

SspStepper::SspStepper(const GridLayout& layout) : q1_(layout), q2_(layout), err_(layout), g_(layout) {}

void SspStepper::stage(const RhsFunction& rhs, double t, const StateVector& u, double h, double err_weight) {
  rhs(t, u.values(), g_.values());
  ++rhs_evals_;
  axpy(h * err_weight, g_.values(), err_.values());
}

bool SspStepper::step(const RhsFunction& rhs, double t_n, const StateVector& f_n, double h,
                      const ShuOsherScheme& sc) {
  require_same_layout(f_n, q1_, "ssp step");
  rhs_evals_ = 0;
  err_.fill(0.0);
  const std::size_t n = f_n.size();
  auto w = [&](int i) { return sc.b[i] - sc.b_embed[i]; };

  switch (sc.kind) {
    case SspKind::SSP22: {
      stage(rhs, t_n, f_n, h, w(0));
      for (std::size_t i = 0; i < n; ++i) q1_[i] = f_n[i] + h * g_[i];
      stage(rhs, t_n + h, q1_, h, w(1));
      for (std::size_t i = 0; i < n; ++i) q1_[i] = 0.5 * f_n[i] + 0.5 * (q1_[i] + h * g_[i]);
      break;
    }
    case SspKind::SSP43: {
      const double hh = 0.5 * h;
      stage(rhs, t_n, f_n, h, w(0));
      for (std::size_t i = 0; i < n; ++i) q1_[i] = f_n[i] + hh * g_[i];
      stage(rhs, t_n + 0.5 * h, q1_, h, w(1));
      axpy(hh, g_.values(), q1_.values());
      stage(rhs, t_n + h, q1_, h, w(2));
      for (std::size_t i = 0; i < n; ++i) q1_[i] = (2.0 * f_n[i] + q1_[i] + hh * g_[i]) / 3.0;
      stage(rhs, t_n + 0.5 * h, q1_, h, w(3));
      axpy(hh, g_.values(), q1_.values());
      break;
    }
    case SspKind::SSP104: {
      const double h6 = h / 6.0;
      std::copy(f_n.values().begin(), f_n.values().end(), q1_.values().begin());
      std::copy(f_n.values().begin(), f_n.values().end(), q2_.values().begin());
      for (int k = 0; k < 5; ++k) {
        stage(rhs, t_n + sc.c[k] * h, q1_, h, w(k));
        axpy(h6, g_.values(), q1_.values());
      }
      for (std::size_t i = 0; i < n; ++i) {
        q2_[i] = q2_[i] / 25.0 + 9.0 * q1_[i] / 25.0;
        q1_[i] = 15.0 * q2_[i] - 5.0 * q1_[i];
      }
      for (int k = 5; k < 9; ++k) {
        stage(rhs, t_n + sc.c[k] * h, q1_, h, w(k));
        axpy(h6, g_.values(), q1_.values());
      }
      stage(rhs, t_n + sc.c[9] * h, q1_, h, w(9));
      for (std::size_t i = 0; i < n; ++i) q1_[i] = q2_[i] + 0.6 * q1_[i] + 0.1 * h * g_[i];
      break;
    }
  }
  return q1_.all_finite() && err_.all_finite();
}

void ssp_step_reference(const RhsFunction& rhs, double t_n, const StateVector& f_n, double h,
                        const ShuOsherScheme& sc, StateVector& f_next, StateVector& error) {
  const std::size_t n = f_n.size();
  std::vector<StateVector> u(sc.s + 1, StateVector(f_n.layout()));
  std::vector<StateVector> g(sc.s, StateVector(f_n.layout()));
  u[0] = f_n;
  for (int i = 1; i <= sc.s; ++i) {
    rhs(t_n + sc.c[i - 1] * h, u[i - 1].values(), g[i - 1].values());
    for (std::size_t k = 0; k < n; ++k) {
      double v = 0.0;
      for (int j = 0; j < i; ++j) v += sc.alpha[i][j] * u[j][k] + h * sc.beta[i][j] * g[j][k];
      u[i][k] = v;
    }
  }
  f_next = u[sc.s];
  error = StateVector(f_n.layout());
  for (int j = 0; j < sc.s; ++j) axpy(h * (sc.b[j] - sc.b_embed[j]), g[j].values(), error.values());
}

bool blew_up(const StateVector& u, double initial_max, double factor) {
  const double m = max_abs(u.values());
  return !std::isfinite(m) || m > factor * initial_max;
}

}  // namespace superstep
