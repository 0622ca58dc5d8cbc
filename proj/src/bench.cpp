#include "superstep/bench.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "superstep/problem_dg.hpp"
#include "superstep/problem_fd.hpp"

namespace superstep {

namespace {

constexpr int kSampleCount = 20;
// Newton and difference-quotient weights for fixed-step runs.
constexpr double kFixedStepRtol = 1e-8;

class Fnv1a {
 public:
  Fnv1a& add(std::string_view s) {
    for (unsigned char ch : s) {
      hash_ ^= ch;
      hash_ *= 1099511628211ULL;
    }
    hash_ ^= 0xff;  // field separator
    hash_ *= 1099511628211ULL;
    return *this;
  }
  Fnv1a& add(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", x);
    return add(std::string_view(buf));
  }
  Fnv1a& add(std::uint64_t x) { return add(std::string_view(std::to_string(x))); }
  [[nodiscard]] std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 14695981039346656037ULL;
};

std::string hex(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

std::string sci(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", x);
  return buf;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

EigenPolicy eigen_policy(const ExperimentConfig& cfg) {
  EigenPolicy pol;
  pol.mode = cfg.eig_mode;
  pol.refresh = cfg.refresh;
  pol.safety.q_lambda = cfg.q_lambda;
  pol.power.tau = cfg.tau;
  pol.power.seed = cfg.seed;
  return pol;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (problem != "fd" && problem != "dg") throw std::invalid_argument("problem must be 'fd' or 'dg'");
  if (is_dirk(method) && problem != "fd") throw std::invalid_argument("DIRK methods run on the fd problem only");
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
  if (n_v == 0 || n_x == 0) throw std::invalid_argument("grid dimensions must be positive");
  if (!(atol >= 0.0)) throw std::invalid_argument("atol must be non-negative");
  if (!(t_f > 0.0)) throw std::invalid_argument("t_f must be positive");
  if (!(q_lambda > 0.0)) throw std::invalid_argument("q_lambda must be positive");
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must lie in (0, 1)");
  if (!(h0 >= 0.0)) throw std::invalid_argument("h0 must be non-negative");
  if (fixed_h.empty() && rtols.empty()) throw std::invalid_argument("need at least one rtol or fixed step");
  for (double r : rtols) {
    if (!(r > 0.0)) throw std::invalid_argument("rtol values must be positive");
  }
  for (double h : fixed_h) {
    if (!(h > 0.0)) throw std::invalid_argument("fixed step sizes must be positive");
  }
}

std::unique_ptr<Problem> make_problem(const ExperimentConfig& cfg) {
  if (cfg.problem == "fd") return std::make_unique<FdProblem>(cfg.nu, cfg.n_v, cfg.n_x);
  if (cfg.problem == "dg") {
    DgProblem::Options opt;
    opt.penalty = cfg.dg_penalty;
    return std::make_unique<DgProblem>(cfg.nu, cfg.n_v, cfg.n_x, opt);
  }
  throw std::invalid_argument("unknown problem '" + cfg.problem + "'");
}

std::string_view to_string(ReferenceProvenance p) {
  return p == ReferenceProvenance::DenseExponential ? "dense-exponential" : "rkl-rtol-1e-12";
}

std::uint64_t reference_fingerprint(const ExperimentConfig& cfg) {
  Fnv1a h;
  h.add(cfg.problem).add(cfg.nu).add(std::uint64_t{cfg.n_v}).add(std::uint64_t{cfg.n_x}).add(cfg.t_f);
  if (cfg.problem == "dg") h.add(cfg.dg_penalty);
  h.add(std::uint64_t{kSampleCount});
  return h.value();
}

std::uint64_t config_fingerprint(const ExperimentConfig& cfg) {
  Fnv1a h;
  h.add(reference_fingerprint(cfg)).add(to_string(cfg.method)).add(to_string(cfg.norm)).add(to_string(cfg.eig_mode));
  h.add(to_string(cfg.refresh)).add(cfg.atol).add(cfg.q_lambda).add(cfg.tau).add(cfg.seed).add(cfg.h0);
  h.add("rtol");
  for (double r : cfg.rtols) h.add(r);
  h.add("h");
  for (double x : cfg.fixed_h) h.add(x);
  return h.value();
}

std::optional<ReferenceSolution> dense_reference(const Problem& problem, const std::vector<double>& times) {
  const GridLayout& layout = problem.layout();
  const std::size_t n = layout.size();
  const BlockStructure bs = problem.blocks();
  if (bs.blocks.empty()) return std::nullopt;
  const std::size_t m = bs.blocks.front().size();
  std::size_t covered = 0;
  for (const auto& b : bs.blocks) {
    if (b.size() != m) return std::nullopt;
    covered += b.size();
  }
  if (m > kDenseBlockLimit || covered != n) return std::nullopt;

  const auto& idx0 = bs.blocks.front();
  const StateVector zero(layout);
  const StateVector g0 = problem.rhs(0.0, zero);
  Eigen::MatrixXd a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  StateVector e(layout);
  for (std::size_t j = 0; j < m; ++j) {
    e.fill(0.0);
    e[idx0[j]] = 1.0;
    const StateVector g = problem.rhs(0.0, e);
    for (std::size_t i = 0; i < m; ++i) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = g[idx0[i]] - g0[idx0[i]];
    }
  }
  const double scale = a.cwiseAbs().maxCoeff();
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0)) return std::nullopt;

  const StateVector u0 = problem.initial_condition();
  // every block must act like block 0
  const StateVector gu0 = problem.rhs(0.0, u0);
  const double gscale = std::max(max_abs(gu0.values()), 1e-300);
  for (const auto& b : bs.blocks) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) x(static_cast<Eigen::Index>(i)) = u0[b[i]];
    const Eigen::VectorXd y = a * x;
    for (std::size_t i = 0; i < m; ++i) {
      if (std::fabs(y(static_cast<Eigen::Index>(i)) - (gu0[b[i]] - g0[b[i]])) > 1e-9 * gscale) return std::nullopt;
    }
  }

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  if (eig.info() != Eigen::Success) return std::nullopt;
  const Eigen::MatrixXd& v = eig.eigenvectors();
  const Eigen::VectorXd& lam = eig.eigenvalues();

  ReferenceSolution ref;
  ref.times = times;
  ref.provenance = ReferenceProvenance::DenseExponential;
  ref.snapshots.assign(times.size(), StateVector(layout));
  for (const auto& b : bs.blocks) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) x(static_cast<Eigen::Index>(i)) = u0[b[i]];
    const Eigen::VectorXd c = v.transpose() * x;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const Eigen::VectorXd y = v * (lam.array() * times[k]).exp().matrix().cwiseProduct(c);
      for (std::size_t i = 0; i < m; ++i) ref.snapshots[k][b[i]] = y(static_cast<Eigen::Index>(i));
    }
  }
  return ref;
}

ReferenceSolution tight_reference(const Problem& problem, const std::vector<double>& times, double t_f) {
  AdaptiveOptions opt;
  opt.method = Method::RKL;
  opt.tol = ToleranceSpec{1e-12, 1e-14};
  opt.norm = NormKind::Cellwise;
  opt.t_f = t_f;
  opt.sample_times = times;
  opt.controller.max_consecutive_rejections = 50;
  opt.controller.estimate_h0 = true;
  const RunResult run = advance_adaptive(problem, opt);
  if (!run.ok() || run.samples.size() != times.size()) {
    throw std::runtime_error("reference integration failed: " + run.message);
  }
  ReferenceSolution ref;
  ref.times = times;
  ref.snapshots = run.samples;
  ref.provenance = ReferenceProvenance::TightRkl;
  return ref;
}

namespace {

constexpr char kMagic[8] = {'S', 'S', 'T', 'P', 'R', 'E', 'F', '1'};
constexpr std::uint32_t kEndianMarker = 0x01020304u;

template <class T>
void put(std::ostream& os, const T& x) {
  os.write(reinterpret_cast<const char*>(&x), sizeof x);
}

template <class T>
bool get(std::istream& is, T& x) {
  return static_cast<bool>(is.read(reinterpret_cast<char*>(&x), sizeof x));
}

}  // namespace

void save_reference(const std::filesystem::path& file, const ReferenceSolution& ref, const GridLayout& layout) {
  if (!file.parent_path().empty()) std::filesystem::create_directories(file.parent_path());
  const std::filesystem::path tmp = file.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write reference cache " + tmp.string());
    os.write(kMagic, sizeof kMagic);
    put(os, kEndianMarker);
    put(os, static_cast<std::uint32_t>(layout.kind == LayoutKind::DG ? 1 : 0));
    put(os, static_cast<std::uint32_t>(ref.provenance == ReferenceProvenance::TightRkl ? 1 : 0));
    put(os, static_cast<std::uint64_t>(layout.n_v));
    put(os, static_cast<std::uint64_t>(layout.n_x));
    put(os, static_cast<std::uint64_t>(layout.n_b));
    put(os, static_cast<std::uint64_t>(ref.times.size()));
    put(os, ref.fingerprint);
    os.write(reinterpret_cast<const char*>(ref.times.data()),
             static_cast<std::streamsize>(ref.times.size() * sizeof(double)));
    for (const StateVector& s : ref.snapshots) {
      os.write(reinterpret_cast<const char*>(s.raw().data()), static_cast<std::streamsize>(s.size() * sizeof(double)));
    }
    if (!os) throw std::runtime_error("failed writing reference cache " + tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

std::optional<ReferenceSolution> load_reference(const std::filesystem::path& file, const GridLayout& layout,
                                                std::uint64_t fingerprint) {
  std::ifstream is(file, std::ios::binary);
  if (!is) return std::nullopt;
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) return std::nullopt;
  std::uint32_t endian = 0, kind = 0, prov = 0;
  std::uint64_t nv = 0, nx = 0, nb = 0, count = 0, fp = 0;
  if (!get(is, endian) || endian != kEndianMarker) return std::nullopt;
  if (!get(is, kind) || !get(is, prov) || !get(is, nv) || !get(is, nx) || !get(is, nb) || !get(is, count) ||
      !get(is, fp)) {
    return std::nullopt;
  }
  if (kind != (layout.kind == LayoutKind::DG ? 1u : 0u) || nv != layout.n_v || nx != layout.n_x ||
      nb != layout.n_b || fp != fingerprint || count > 100000) {
    return std::nullopt;
  }
  ReferenceSolution ref;
  ref.fingerprint = fp;
  ref.provenance = prov == 1 ? ReferenceProvenance::TightRkl : ReferenceProvenance::DenseExponential;
  ref.times.resize(count);
  if (!is.read(reinterpret_cast<char*>(ref.times.data()), static_cast<std::streamsize>(count * sizeof(double)))) {
    return std::nullopt;
  }
  for (std::uint64_t k = 0; k < count; ++k) {
    std::vector<double> v(layout.size());
    if (!is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)))) {
      return std::nullopt;
    }
    ref.snapshots.emplace_back(layout, std::move(v));
  }
  return ref;
}

ReferenceSolution compute_reference(const ExperimentConfig& cfg) {
  const auto problem = make_problem(cfg);
  const std::uint64_t fp = reference_fingerprint(cfg);
  std::filesystem::path file;
  if (!cfg.cache_dir.empty()) {
    file = cfg.cache_dir / ("ref_" + hex(fp) + ".bin");
    if (auto cached = load_reference(file, problem->layout(), fp)) return std::move(*cached);
  }
  const std::vector<double> times = sample_times(cfg.t_f, kSampleCount);
  std::optional<ReferenceSolution> ref = dense_reference(*problem, times);
  if (!ref) ref = tight_reference(*problem, times, cfg.t_f);
  ref->fingerprint = fp;
  if (!file.empty()) save_reference(file, *ref, problem->layout());
  return std::move(*ref);
}

ErrorMetrics error_metrics(const std::vector<StateVector>& samples, const std::vector<StateVector>& ref) {
  if (samples.size() != ref.size()) throw std::invalid_argument("error_metrics: sample count mismatch");
  ErrorMetrics m;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    require_same_layout(samples[k], ref[k], "error_metrics");
    const double rn = max_abs(ref[k].values());
    if (!(rn > 0.0)) throw std::invalid_argument("error_metrics: reference snapshot is identically zero");
    double d = 0.0;
    for (std::size_t i = 0; i < ref[k].size(); ++i) {
      const double e = std::fabs(samples[k][i] - ref[k][i]);
      if (std::isnan(e)) {
        d = e;
        break;
      }
      d = std::max(d, e);
    }
    m.maxmax = std::max(m.maxmax, d);
    m.linf20 = std::max(m.linf20, d / rn);
    if (std::isnan(d)) m.maxmax = m.linf20 = d;
  }
  return m;
}

std::vector<CsvRow> run_experiment(const ExperimentConfig& cfg, const ReferenceSolution* reference) {
  cfg.validate();
  const auto problem = make_problem(cfg);
  std::optional<ReferenceSolution> own;
  if (reference == nullptr) {
    own = compute_reference(cfg);
    reference = &*own;
  }
  if (reference->snapshots.size() != static_cast<std::size_t>(kSampleCount)) {
    throw std::invalid_argument("reference must hold 20 snapshots");
  }
  const std::vector<double>& times = reference->times;
  const bool fixed = !cfg.fixed_h.empty();
  const std::vector<double>& points = fixed ? cfg.fixed_h : cfg.rtols;

  std::ofstream log_os;
  if (!cfg.step_log.empty()) {
    log_os.open(cfg.step_log, std::ios::app);
    if (!log_os) throw std::runtime_error("cannot open step log " + cfg.step_log.string());
  }

  std::vector<CsvRow> rows;
  for (double point : points) {
    CsvRow row;
    row.cfg = cfg;
    row.fixed = fixed;
    row.rtol_or_h = point;
    RunResult run;
    if (fixed) {
      row.cfg.fixed_h = {point};
      FixedOptions opt;
      opt.method = cfg.method;
      opt.h = point;
      opt.t_f = cfg.t_f;
      opt.sample_times = times;
      opt.eig = eigen_policy(cfg);
      opt.tol = ToleranceSpec{kFixedStepRtol, cfg.atol};
      opt.norm = cfg.norm;
      opt.record_log = log_os.is_open();
      run = advance_fixed(*problem, opt);
    } else {
      row.cfg.rtols = {point};
      AdaptiveOptions opt;
      opt.method = cfg.method;
      opt.tol = ToleranceSpec{point, cfg.atol};
      opt.norm = cfg.norm;
      opt.eig = eigen_policy(cfg);
      opt.t_f = cfg.t_f;
      opt.sample_times = times;
      opt.controller.h0 = cfg.h0;
      opt.controller.estimate_h0 = cfg.h0 == 0.0;
      opt.record_log = log_os.is_open();
      run = advance_adaptive(*problem, opt);
    }
    if (log_os.is_open()) {
      log_os << "# " << to_string(cfg.method) << ' ' << cfg.problem << " nu=" << cfg.nu << (fixed ? " h=" : " rtol=")
             << point << '\n';
      write_step_log(log_os, run.log);
    }
    row.stats = run.stats;
    row.status = run.status;
    if (run.ok() && run.samples.size() == reference->snapshots.size()) {
      row.error = error_metrics(run.samples, reference->snapshots);
    } else {
      row.error.linf20 = row.error.maxmax = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_csv_header(std::ostream& os) {
  os << "study,method,problem,nu,n_v,n_x,mode,rtol_or_h,atol,norm,eig_mode,q_lambda,tau,error_linf20,error_maxmax,"
        "runtime_s,steps,rejected,failure_rate,rhs_evals,stages_total,domeig_iters,blew_up,status,seed,fingerprint\n";
}

void write_csv(std::ostream& os, const std::vector<CsvRow>& rows, bool header) {
  if (header) write_csv_header(os);
  for (const CsvRow& r : rows) {
    const ExperimentConfig& c = r.cfg;
    os << (r.study.empty() ? "run" : r.study) << ',' << to_string(c.method) << ',' << c.problem << ',' << num(c.nu)
       << ',' << c.n_v << ',' << c.n_x << ',' << (r.fixed ? "fixed" : "adaptive") << ',' << sci(r.rtol_or_h) << ','
       << sci(c.atol) << ',' << to_string(c.norm) << ',' << to_string(c.eig_mode) << ',' << num(c.q_lambda) << ','
       << num(c.tau) << ',' << sci(r.error.linf20) << ',' << sci(r.error.maxmax) << ',' << sci(r.stats.wall_seconds)
       << ',' << r.stats.accepted << ',' << r.stats.rejected << ',' << num(r.stats.failure_rate()) << ','
       << r.stats.rhs_evals << ',' << r.stats.stages_total << ',' << r.stats.domeig_iters << ','
       << (r.status == RunStatus::BlewUp ? 1 : 0) << ',' << to_string(r.status) << ',' << c.seed << ','
       << hex(config_fingerprint(c)) << '\n';
  }
}

std::vector<std::string> study_names() { return {"efficiency", "stability", "eigsafety", "normcompare", "eigmode"}; }

std::vector<CsvRow> run_study(std::string_view name, const ExperimentConfig& base) {
  const std::vector<std::string> names = study_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw std::invalid_argument("unknown study '" + std::string(name) + "'");
  }
  const std::vector<double> nus{0.1, 1.0, 10.0};
  const std::vector<double> wide_rtols{1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};

  std::vector<ExperimentConfig> plan;
  auto with = [&](auto&& edit) {
    for (double nu : nus) {
      ExperimentConfig c = base;
      c.nu = nu;
      edit(c, plan);
    }
  };

  if (name == "efficiency") {
    with([&](ExperimentConfig c, std::vector<ExperimentConfig>& out) {
      c.fixed_h.clear();
      std::vector<Method> methods{Method::RKC, Method::RKL, Method::SSP2, Method::SSP3, Method::SSP4};
      if (c.problem == "fd") {
        methods.push_back(Method::DIRK2);
        methods.push_back(Method::DIRK3);
      }
      for (Method m : methods) {
        c.method = m;
        out.push_back(c);
      }
    });
  } else if (name == "stability") {
    with([&](ExperimentConfig c, std::vector<ExperimentConfig>& out) {
      c.fixed_h.clear();
      for (int k = 0; k <= 4; ++k) c.fixed_h.push_back(0.01 / std::ldexp(1.0, k));
      for (Method m : {Method::RKC, Method::RKL, Method::SSP2, Method::SSP3, Method::SSP4}) {
        c.method = m;
        out.push_back(c);
      }
    });
  } else if (name == "eigsafety") {
    with([&](ExperimentConfig c, std::vector<ExperimentConfig>& out) {
      c.fixed_h.clear();
      c.rtols = wide_rtols;
      c.eig_mode = EigMode::Power;
      for (Method m : {Method::RKL, Method::RKC}) {
        for (double q : {1.0, 1.05, 1.1, 1.2}) {
          c.method = m;
          c.q_lambda = q;
          out.push_back(c);
        }
      }
    });
  } else if (name == "normcompare") {
    with([&](ExperimentConfig c, std::vector<ExperimentConfig>& out) {
      c.fixed_h.clear();
      c.rtols = wide_rtols;
      for (Method m : {Method::RKL, Method::SSP4}) {
        for (NormKind n : {NormKind::Component, NormKind::Cellwise}) {
          c.method = m;
          c.norm = n;
          out.push_back(c);
        }
      }
    });
  } else {
    with([&](ExperimentConfig c, std::vector<ExperimentConfig>& out) {
      c.fixed_h.clear();
      c.rtols = wide_rtols;
      for (Method m : {Method::RKL, Method::RKC}) {
        for (EigMode e : {EigMode::User, EigMode::Power}) {
          c.method = m;
          c.eig_mode = e;
          out.push_back(c);
        }
      }
    });
  }

  std::map<std::uint64_t, ReferenceSolution> refs;
  std::vector<CsvRow> rows;
  for (const ExperimentConfig& c : plan) {
    const std::uint64_t fp = reference_fingerprint(c);
    auto it = refs.find(fp);
    if (it == refs.end()) it = refs.emplace(fp, compute_reference(c)).first;
    for (CsvRow& r : run_experiment(c, &it->second)) {
      r.study = std::string(name);
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

}  // namespace superstep
