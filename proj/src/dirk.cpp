#include "superstep/dirk.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace superstep {

ButcherTableau dirk_tableau(int order) {
  ButcherTableau tab;
  if (order == 2) {
    const double g = 1.0 - 1.0 / std::numbers::sqrt2;
    const double w = 1.0 / (2.0 * std::numbers::sqrt2);
    tab.name = "dirk2";
    tab.s = 3;
    tab.a = {{0.0, 0.0, 0.0}, {g, g, 0.0}, {w, w, g}};
    tab.c = {0.0, 2.0 * g, 1.0};
    tab.b = {w, w, g};
    const double e = (4.0 - std::numbers::sqrt2) / 8.0;
    tab.b_embed = {e, e, w};
    tab.order = 2;
    tab.embed_order = 1;
    return tab;
  }
  if (order == 3) {
    const double g = 9.0 / 40.0;
    tab.name = "dirk3";
    tab.s = 5;
    tab.a = {
        {0.0, 0.0, 0.0, 0.0, 0.0},
        {g, g, 0.0, 0.0, 0.0},
        {19.0 / 72.0, 14.0 / 45.0, g, 0.0, 0.0},
        {3337.0 / 11520.0, 233.0 / 720.0, 207.0 / 1280.0, g, 0.0},
        {7415.0 / 34776.0, 9920.0 / 30429.0, 4845.0 / 9016.0, -5827.0 / 19320.0, g},
    };
    tab.c = {0.0, 9.0 / 20.0, 4.0 / 5.0, 1.0, 1.0};
    tab.b = tab.a[4];
    tab.b_embed = {23705.0 / 104328.0, 29720.0 / 91287.0, 4225.0 / 9016.0, -69304987.0 / 337732920.0,
                   42843.0 / 233080.0};
    tab.order = 3;
    tab.embed_order = 2;
    return tab;
  }
  throw std::invalid_argument("unsupported DIRK order " + std::to_string(order));
}

void NewtonConfig::validate() const {
  if (!(tolerance > 0.0)) throw std::invalid_argument("Newton tolerance must be positive");
  if (max_newton_iters < 1 || max_cg_iters < 1) throw std::invalid_argument("iteration caps must be positive");
  if (!(cg_factor > 0.0)) throw std::invalid_argument("CG tolerance factor must be positive");
}

CgResult cg_solve(const LinearOperator& apply_a, std::span<const double> b, std::span<const double> precond_diag,
                  double tol, int max_iters, std::span<double> x) {
  const std::size_t n = b.size();
  if (x.size() != n || (!precond_diag.empty() && precond_diag.size() != n)) {
    throw std::invalid_argument("cg_solve: size mismatch");
  }
  std::vector<double> r(b.begin(), b.end()), z(n), p(n), ap(n);
  std::fill(x.begin(), x.end(), 0.0);
  CgResult res;
  const double bnorm = norm2(b);
  if (bnorm == 0.0) return res;

  auto precondition = [&] {
    for (std::size_t i = 0; i < n; ++i) z[i] = precond_diag.empty() ? r[i] : r[i] / precond_diag[i];
  };
  precondition();
  p = z;
  double rz = dot(r, z);
  for (int k = 1; k <= max_iters; ++k) {
    apply_a(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) {
      res.status = CgStatus::Indefinite;
      res.iters = k;
      res.relative_residual = norm2(r) / bnorm;
      return res;
    }
    const double alpha = rz / pap;
    axpy(alpha, p, x);
    axpy(-alpha, ap, r);
    res.iters = k;
    res.relative_residual = norm2(r) / bnorm;
    if (res.relative_residual <= tol) return res;
    precondition();
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  res.status = CgStatus::MaxIters;
  return res;
}

DirkStepper::DirkStepper(const GridLayout& layout, const ButcherTableau& tableau)
    : tab_(tableau),
      stage_g_(tableau.s, StateVector(layout)),
      z_(layout),
      known_(layout),
      residual_(layout),
      delta_(layout),
      work_(layout),
      f_next_(layout),
      err_(layout),
      precond_(layout.size()) {}

DirkStepResult DirkStepper::step(const RhsFunction& rhs, double t_n, const StateVector& f_n, double h,
                                 const NewtonConfig& newton, const ToleranceSpec& tol,
                                 std::span<const double> jac_diag) {
  newton.validate();
  require_same_layout(f_n, z_, "dirk step");
  DirkStepResult out;
  const std::size_t n = f_n.size();
  const int s = tab_.s;

  for (int i = 0; i < s; ++i) {
    const double t_i = t_n + tab_.c[i] * h;
    known_ = f_n;
    for (int j = 0; j < i; ++j) {
      if (tab_.a[i][j] != 0.0) axpy(h * tab_.a[i][j], stage_g_[j].values(), known_.values());
    }
    const double hg = h * tab_.a[i][i];
    if (hg == 0.0) {
      rhs(t_i, known_.values(), stage_g_[i].values());
      ++out.rhs_evals;
      continue;
    }

    if (!jac_diag.empty()) {
      for (std::size_t k = 0; k < n; ++k) precond_[k] = 1.0 - hg * jac_diag[k];
    }
    const std::span<const double> pc = jac_diag.empty() ? std::span<const double>{} : std::span<const double>(precond_);

    z_ = f_n;
    StateVector& g = stage_g_[i];
    bool converged = false;
    for (int it = 0;; ++it) {
      rhs(t_i, z_.values(), g.values());
      ++out.rhs_evals;
      for (std::size_t k = 0; k < n; ++k) residual_[k] = z_[k] - hg * g[k] - known_[k];
      if (!residual_.all_finite()) {
        out.ok = false;
        out.failure = "non-finite stage residual";
        return out;
      }
      if (wrms(newton.norm, residual_, f_n, tol) <= newton.tolerance) {
        converged = true;
        break;
      }
      if (it == newton.max_newton_iters) break;

      // (I - hg J) delta = -residual, J v by difference quotient about z
      for (std::size_t k = 0; k < n; ++k) residual_[k] = -residual_[k];
      LinearOperator apply = [&](std::span<const double> v, std::span<double> y) {
        double v2 = 0.0;
        for (double x : v) v2 += x * x;
        if (v2 == 0.0) {
          std::fill(y.begin(), y.end(), 0.0);
          return;
        }
        StateVector dir(f_n.layout(), std::vector<double>(v.begin(), v.end()));
        const double vn = wrms(newton.norm, dir, z_, tol);
        const double sigma = 1.0 / vn;
        for (std::size_t k = 0; k < n; ++k) work_[k] = z_[k] + sigma * v[k];
        rhs(t_i, work_.values(), y);
        ++out.rhs_evals;
        for (std::size_t k = 0; k < n; ++k) y[k] = v[k] - hg * (y[k] - g[k]) / sigma;
      };
      const CgResult cg = cg_solve(apply, residual_.values(), pc, newton.cg_factor * newton.tolerance,
                                   newton.max_cg_iters, delta_.values());
      out.cg_iters += cg.iters;
      if (cg.status == CgStatus::Indefinite) {
        out.ok = false;
        out.failure = "CG detected an indefinite stage matrix";
        return out;
      }
      axpy(1.0, delta_.values(), z_.values());
      ++out.newton_iters;
    }
    if (!converged) {
      out.ok = false;
      out.failure = "Newton iteration did not converge";
      return out;
    }
  }

  f_next_ = f_n;
  err_.fill(0.0);
  for (int i = 0; i < s; ++i) {
    axpy(h * tab_.b[i], stage_g_[i].values(), f_next_.values());
    axpy(h * (tab_.b[i] - tab_.b_embed[i]), stage_g_[i].values(), err_.values());
  }
  if (!f_next_.all_finite()) {
    out.ok = false;
    out.failure = "non-finite solution";
  }
  return out;
}

}  // namespace superstep
