#include "superstep/domeig.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <utility>
#include <vector>

namespace superstep {

namespace {

StateVector start_vector(const GridLayout& layout, const PowerIterConfig& cfg, std::uint64_t seed,
                         const NullspaceProjector& nullspace) {
  StateVector v(layout);
  if (!cfg.initial_vector.empty() && seed == cfg.seed) {
    if (cfg.initial_vector.size() != v.size()) throw std::invalid_argument("power iteration: start vector size");
    std::copy(cfg.initial_vector.begin(), cfg.initial_vector.end(), v.values().begin());
  } else {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (double& x : v.values()) x = dist(gen);
  }
  nullspace.apply(v.values());
  const double n = norm2(v.values());
  if (!(n > 0.0)) return v;
  for (double& x : v.values()) x /= n;
  return v;
}

}  // namespace

void PowerIterConfig::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must lie in (0, 1)");
  if (max_iters < 2) throw std::invalid_argument("max_iters must be at least 2");
  if (warmup_iters < 0) throw std::invalid_argument("warmup_iters must be non-negative");
  if (!(residual_tol >= 0.0)) throw std::invalid_argument("residual_tol must be non-negative");
}

void EigSafety::validate() const {
  if (!(q_lambda > 0.0)) throw std::invalid_argument("q_lambda must be positive");
}

StateVector matvec_dq(const RhsFunction& rhs, double t, const StateVector& f, const StateVector& v,
                      const ToleranceSpec& tol, NormKind norm, const StateVector* g_f) {
  require_same_layout(f, v, "matvec_dq");
  const double vnorm = wrms(norm, v, f, tol);
  if (!(vnorm > 0.0)) throw std::invalid_argument("matvec_dq: direction has zero WRMS norm");
  const double sigma = 1.0 / vnorm;

  StateVector base(f.layout());
  if (g_f == nullptr) {
    rhs(t, f.values(), base.values());
    g_f = &base;
  }
  StateVector shifted(f.layout());
  lincomb(shifted.values(), 1.0, f.values(), sigma, v.values());
  StateVector out(f.layout());
  rhs(t, shifted.values(), out.values());
  const double inv = 1.0 / sigma;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (out[i] - (*g_f)[i]) * inv;
  return out;
}

NullspaceProjector::NullspaceProjector(std::span<const StateVector> basis) {
  std::vector<char> used(basis.empty() ? 0 : basis.front().size(), 0);
  for (const StateVector& e : basis) {
    std::vector<std::pair<std::size_t, double>> nz;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] == 0.0) continue;
      nz.emplace_back(i, e[i]);
      if (i >= used.size() || used[i]) {
        disjoint_ = false;
      } else {
        used[i] = 1;
      }
    }
    double nn = 0.0;
    for (const auto& entry : nz) nn += entry.second * entry.second;
    if (nn > 0.0) {
      const double inv = 1.0 / std::sqrt(nn);
      for (auto& entry : nz) entry.second *= inv;
    }
    vectors_.push_back(std::move(nz));
  }
}

void NullspaceProjector::apply(std::span<double> v) const {
  // disjoint supports make the sweep an exact orthogonal projection; otherwise reorthogonalize once
  const int passes = disjoint_ ? 1 : 2;
  for (int pass = 0; pass < passes; ++pass) {
    for (const auto& e : vectors_) {
      double d = 0.0;
      for (const auto& [i, x] : e) d += x * v[i];
      for (const auto& [i, x] : e) v[i] -= d * x;
    }
  }
}

DomEigEstimate power_iterate(const RhsFunction& rhs, double t, const StateVector& f, const PowerIterConfig& cfg,
                             const ToleranceSpec& tol, std::span<const StateVector> nullspace) {
  return power_iterate(rhs, t, f, cfg, tol, NullspaceProjector(nullspace));
}

DomEigEstimate power_iterate(const RhsFunction& rhs, double t, const StateVector& f, const PowerIterConfig& cfg,
                             const ToleranceSpec& tol, const NullspaceProjector& nullspace) {
  cfg.validate();
  tol.validate();
  DomEigEstimate est;
  const std::size_t n = f.size();

  StateVector g_f(f.layout());
  rhs(t, f.values(), g_f.values());
  est.rhs_evals = 1;
  if (!g_f.all_finite()) throw DomEigError("power iteration: non-finite right-hand side at linearization state");

  StateVector shifted(f.layout());
  StateVector jv(f.layout());
  // jv <- projected difference quotient along v; returns false when ||v||_WRMS vanishes
  auto apply = [&](const StateVector& v) {
    const double vnorm = wrms(cfg.norm, v, f, tol);
    if (!(vnorm > 0.0)) return false;
    const double sigma = 1.0 / vnorm;
    lincomb(shifted.values(), 1.0, f.values(), sigma, v.values());
    rhs(t, shifted.values(), jv.values());
    ++est.rhs_evals;
    for (std::size_t i = 0; i < n; ++i) jv[i] = (jv[i] - g_f[i]) * vnorm;
    nullspace.apply(jv.values());
    if (!jv.all_finite()) throw DomEigError("power iteration: non-finite matrix-vector product");
    return true;
  };

  std::uint64_t seed = cfg.seed;
  for (int attempt = 0; attempt < 2; ++attempt) {
    StateVector v = start_vector(f.layout(), cfg, seed, nullspace);
    bool degenerate = !(norm2(v.values()) > 0.0);

    for (int k = 0; k < cfg.warmup_iters && !degenerate; ++k) {
      double jj = 0.0;
      if (apply(v)) jj = dot(jv.values(), jv.values());
      if (!(jj > 0.0)) {
        degenerate = true;
        break;
      }
      const double inv = 1.0 / std::sqrt(jj);
      for (std::size_t i = 0; i < n; ++i) v[i] = jv[i] * inv;
      ++est.warmup_iters;
    }

    double prev = 0.0;
    for (int k = 1; k <= cfg.max_iters && !degenerate; ++k) {
      if (!apply(v)) {
        degenerate = true;
        break;
      }
      double vj = 0.0, vv = 0.0, jj = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        vj += v[i] * jv[i];
        vv += v[i] * v[i];
        jj += jv[i] * jv[i];
      }
      const double lambda = vj / vv;
      if (!std::isfinite(lambda)) throw DomEigError("power iteration: non-finite Rayleigh quotient");
      est.iters = k;
      est.lambda_approx = lambda;
      if (!(jj > 0.0)) {
        degenerate = true;
        break;
      }
      // ||Jv - lambda v||^2 = ||Jv||^2 - (v.Jv)^2 / ||v||^2
      const double res2 = std::max(0.0, jj - vj * lambda);
      if (std::sqrt(res2) <= cfg.residual_tol * std::fabs(lambda) * std::sqrt(vv)) {
        est.converged = true;
        return est;
      }
      if (k > 1 && lambda != 0.0 && std::fabs(lambda - prev) / std::fabs(lambda) < cfg.tau) {
        est.converged = true;
        return est;
      }
      prev = lambda;
      const double inv = 1.0 / std::sqrt(jj);
      for (std::size_t i = 0; i < n; ++i) v[i] = jv[i] * inv;
    }
    if (!degenerate) return est;

    // Jv vanished: try one fresh start vector.
    if (attempt == 0) {
      est.reseeded = true;
      est.iters = 0;
      seed = std::mt19937_64(cfg.seed)() ^ 0x9e3779b97f4a7c15ULL;
    }
  }
  throw DomEigError("power iteration: Jacobian-vector product vanished after reseeding");
}

DomEigEstimate power_iterate(const Problem& problem, double t, const StateVector& f, const PowerIterConfig& cfg,
                             const ToleranceSpec& tol) {
  const std::vector<StateVector> ns = problem.nullspace();
  return power_iterate(problem.rhs_function(), t, f, cfg, tol, ns);
}

double effective_lambda(const DomEigEstimate& est, const EigSafety& safety) {
  safety.validate();
  if (!est.converged) throw DomEigError("effective_lambda: estimate did not converge");
  if (est.lambda_approx > safety.positive_tol) {
    std::ostringstream msg;
    msg << "dominant eigenvalue estimate " << est.lambda_approx << " is positive";
    throw DomEigError(msg.str());
  }
  return safety.q_lambda * std::fabs(est.lambda_approx);
}

std::optional<std::string> eigsafety_warning(const EigSafety& safety, double tau) {
  const double bound = 1.0 / (1.0 - tau);
  if (safety.q_lambda > bound) return std::nullopt;
  std::ostringstream msg;
  msg << "q_lambda = " << safety.q_lambda << " does not exceed 1/(1 - tau) = " << bound
      << "; stage counts may be unstable";
  return msg.str();
}

}  // namespace superstep
