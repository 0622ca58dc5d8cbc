#include "superstep/sts.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace superstep {

namespace {

void require_stages(int s) {
  if (s < 2) throw std::invalid_argument("STS stage count must be at least 2, got " + std::to_string(s));
}

// T_j(x), T_j'(x), T_j''(x) for j = 0..s by the three-term recurrence.
struct ChebyshevTable {
  std::vector<double> t, dt, ddt;
};

ChebyshevTable chebyshev(int s, double x) {
  ChebyshevTable tab;
  tab.t.assign(s + 1, 0.0);
  tab.dt.assign(s + 1, 0.0);
  tab.ddt.assign(s + 1, 0.0);
  tab.t[0] = 1.0;
  if (s >= 1) {
    tab.t[1] = x;
    tab.dt[1] = 1.0;
  }
  for (int j = 1; j < s; ++j) {
    tab.t[j + 1] = 2.0 * x * tab.t[j] - tab.t[j - 1];
    tab.dt[j + 1] = 2.0 * tab.t[j] + 2.0 * x * tab.dt[j] - tab.dt[j - 1];
    tab.ddt[j + 1] = 4.0 * tab.dt[j] + 2.0 * x * tab.ddt[j] - tab.ddt[j - 1];
  }
  return tab;
}

// w0 and w1 of the damped construction without building the full coefficient set.
std::pair<double, double> rkc_shift_and_scale(int s, double eps) {
  const double w0 = 1.0 + eps / (static_cast<double>(s) * s);
  double t0 = 1.0, t1 = w0;
  double d0 = 0.0, d1 = 1.0;
  double e0 = 0.0, e1 = 0.0;
  for (int j = 1; j < s; ++j) {
    const double t2 = 2.0 * w0 * t1 - t0;
    const double d2 = 2.0 * t1 + 2.0 * w0 * d1 - d0;
    const double e2 = 4.0 * d1 + 2.0 * w0 * e1 - e0;
    t0 = t1, t1 = t2, d0 = d1, d1 = d2, e0 = e1, e1 = e2;
  }
  return {w0, d1 / e1};
}

// Abscissae from the recursion applied to f' = 1 (z_0 = 0).
void fill_abscissae(StsCoefficients& co) {
  co.c.assign(co.s + 1, 0.0);
  co.c[1] = co.mu_tilde[1];
  for (int j = 2; j <= co.s; ++j) {
    co.c[j] = co.mu[j] * co.c[j - 1] + co.nu[j] * co.c[j - 2] + co.mu_tilde[j] + co.gamma_tilde[j];
  }
}

}  // namespace

std::string_view to_string(StsFamily family) { return family == StsFamily::RKC2 ? "rkc" : "rkl"; }

StsCoefficients rkl2_coefficients(int s) {
  require_stages(s);
  StsCoefficients co;
  co.family = StsFamily::RKL2;
  co.s = s;
  std::vector<double> b(s + 1), a(s + 1);
  for (int j = 2; j <= s; ++j) b[j] = (static_cast<double>(j) * j + j - 2.0) / (2.0 * j * (j + 1.0));
  b[0] = b[1] = 1.0 / 3.0;
  for (int j = 0; j <= s; ++j) a[j] = 1.0 - b[j];
  const double w1 = 4.0 / (static_cast<double>(s) * s + s - 2.0);

  co.mu.assign(s + 1, 0.0);
  co.nu.assign(s + 1, 0.0);
  co.mu_tilde.assign(s + 1, 0.0);
  co.gamma_tilde.assign(s + 1, 0.0);
  co.mu_tilde[1] = b[1] * w1;
  for (int j = 2; j <= s; ++j) {
    co.mu[j] = (2.0 * j - 1.0) / j * b[j] / b[j - 1];
    co.nu[j] = -(j - 1.0) / j * b[j] / b[j - 2];
    co.mu_tilde[j] = co.mu[j] * w1;
    co.gamma_tilde[j] = -a[j - 1] * co.mu_tilde[j];
  }
  fill_abscissae(co);
  co.stability_bound = stability_interval(StsFamily::RKL2, s);
  return co;
}

StsCoefficients rkc2_coefficients(int s, double eps) {
  require_stages(s);
  StsCoefficients co;
  co.family = StsFamily::RKC2;
  co.s = s;
  const double w0 = 1.0 + eps / (static_cast<double>(s) * s);
  const ChebyshevTable tab = chebyshev(s, w0);
  const double w1 = tab.dt[s] / tab.ddt[s];

  std::vector<double> b(s + 1), a(s + 1);
  for (int j = 2; j <= s; ++j) b[j] = tab.ddt[j] / (tab.dt[j] * tab.dt[j]);
  b[0] = b[1] = b[2];
  for (int j = 0; j <= s; ++j) a[j] = 1.0 - b[j] * tab.t[j];

  co.mu.assign(s + 1, 0.0);
  co.nu.assign(s + 1, 0.0);
  co.mu_tilde.assign(s + 1, 0.0);
  co.gamma_tilde.assign(s + 1, 0.0);
  co.mu_tilde[1] = b[1] * w1;
  for (int j = 2; j <= s; ++j) {
    co.mu[j] = 2.0 * w0 * b[j] / b[j - 1];
    co.nu[j] = -b[j] / b[j - 2];
    co.mu_tilde[j] = 2.0 * w1 * b[j] / b[j - 1];
    co.gamma_tilde[j] = -a[j - 1] * co.mu_tilde[j];
  }
  fill_abscissae(co);
  co.stability_bound = (1.0 + w0) / w1;
  return co;
}

StsCoefficients sts_coefficients(StsFamily family, int s) {
  return family == StsFamily::RKC2 ? rkc2_coefficients(s) : rkl2_coefficients(s);
}

double stability_interval(StsFamily family, int s) {
  require_stages(s);
  if (family == StsFamily::RKL2) return (static_cast<double>(s) * s + s - 2.0) / 2.0;
  const auto [w0, w1] = rkc_shift_and_scale(s, 2.0 / 13.0);
  return (1.0 + w0) / w1;
}

double stability_function(const StsCoefficients& co, double z) {
  const double y0 = 1.0;
  double ym2 = y0;
  double ym1 = 1.0 + co.mu_tilde[1] * z;
  for (int j = 2; j <= co.s; ++j) {
    const double y = co.mu[j] * ym1 + co.nu[j] * ym2 + (1.0 - co.mu[j] - co.nu[j]) * y0 + co.mu_tilde[j] * z * ym1 +
                     co.gamma_tilde[j] * z * y0;
    ym2 = ym1;
    ym1 = y;
  }
  return ym1;
}

int stage_count(double h, double lambda_eff, StsFamily family, int max_stages) {
  if (!(h > 0.0)) throw std::invalid_argument("stage_count: step size must be positive");
  if (!(lambda_eff >= 0.0)) throw std::invalid_argument("stage_count: lambda_eff must be non-negative");
  if (max_stages < 2) throw std::invalid_argument("stage_count: cap must be at least 2");
  const double need = h * lambda_eff;
  if (stability_interval(family, 2) >= need) return 2;
  if (stability_interval(family, max_stages) < need) {
    std::ostringstream msg;
    msg << "h*lambda = " << need << " needs more than " << max_stages << " stages; reduce the step size";
    throw StageCountError(msg.str());
  }
  // beta(s) is increasing in s
  int lo = 2, hi = max_stages;
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (stability_interval(family, mid) >= need) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double max_stable_step(double lambda_eff, StsFamily family, int max_stages) {
  if (!(lambda_eff > 0.0)) return std::numeric_limits<double>::infinity();
  return stability_interval(family, max_stages) / lambda_eff;
}

StsStepper::StsStepper(const GridLayout& layout) : a_(layout), b_(layout), g0_(layout), scratch_(layout) {}

bool StsStepper::step(const RhsFunction& rhs, double t_n, const StateVector& f_n, double h,
                      const StsCoefficients& co) {
  require_same_layout(f_n, a_, "sts step");
  rhs_evals_ = 0;
  zm1_ = &a_;
  zm2_ = &b_;
  const std::size_t n = f_n.size();
  const double* z0 = f_n.values().data();
  double* g0 = g0_.values().data();

  rhs(t_n, f_n.values(), g0_.values());
  ++rhs_evals_;

  {
    double* z1 = zm1_->values().data();
    double* zz = zm2_->values().data();
    const double m1 = h * co.mu_tilde[1];
    for (std::size_t i = 0; i < n; ++i) {
      zz[i] = z0[i];
      z1[i] = z0[i] + m1 * g0[i];
    }
  }

  for (int j = 2; j <= co.s; ++j) {
    rhs(t_n + co.c[j - 1] * h, zm1_->values(), scratch_.values());
    ++rhs_evals_;
    const double mu = co.mu[j];
    const double nu = co.nu[j];
    const double rest = 1.0 - mu - nu;
    const double hm = h * co.mu_tilde[j];
    const double hg = h * co.gamma_tilde[j];
    const double* y1 = zm1_->values().data();
    double* y2 = zm2_->values().data();
    const double* g = scratch_.values().data();
    for (std::size_t i = 0; i < n; ++i) {
      y2[i] = mu * y1[i] + nu * y2[i] + rest * z0[i] + hm * g[i] + hg * g0[i];
    }
    std::swap(zm1_, zm2_);
  }

  rhs(t_n + h, zm1_->values(), scratch_.values());
  ++rhs_evals_;
  return zm1_->all_finite() && scratch_.all_finite();
}

void hermite_error(const StateVector& f_n, const StateVector& f_next, const StateVector& g_n,
                   const StateVector& g_next, double h, StateVector& out) {
  require_same_layout(f_n, f_next, "hermite_error");
  require_same_layout(f_n, g_n, "hermite_error");
  require_same_layout(f_n, g_next, "hermite_error");
  require_same_layout(f_n, out, "hermite_error");
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (12.0 * (f_n[i] - f_next[i]) + 6.0 * h * (g_n[i] + g_next[i])) / 15.0;
  }
}

StateVector hermite_error(const StateVector& f_n, const StateVector& f_next, const StateVector& g_n,
                          const StateVector& g_next, double h) {
  StateVector out(f_n.layout());
  hermite_error(f_n, f_next, g_n, g_next, h, out);
  return out;
}

}  // namespace superstep
