#pragma once

#include "polycd/baselines.hpp"
#include "polycd/kde_huber.hpp"
#include "polycd/least_squares.hpp"
#include "polycd/logistic.hpp"
#include "polycd/polycd_away.hpp"
#include "polycd/problems.hpp"
#include "polycd/verify.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace polycd {

inline constexpr const char* kVersion = "1.0.0";

using json = nlohmann::json;

/// (f_hat - f_star) / max(|f_star|, 1)
inline double compute_gap(double f_hat, double f_star) { return (f_hat - f_star) / std::max(std::abs(f_star), 1.0); }

enum class Preset { Lasso, Logistic, Kde, SimplexQuadratic };

inline std::string to_string(Preset p) {
  switch (p) {
    case Preset::Lasso: return "lasso";
    case Preset::Logistic: return "logistic";
    case Preset::Kde: return "kde";
    case Preset::SimplexQuadratic: return "custom-simplex-quadratic";
  }
  return "?";
}

enum class SolverMethod { PolyCD, PolyCDwA, FW, AFW, FISTA, TwoCD };

inline std::string to_string(SolverMethod m) {
  switch (m) {
    case SolverMethod::PolyCD: return "polycd";
    case SolverMethod::PolyCDwA: return "polycdwa";
    case SolverMethod::FW: return "fw";
    case SolverMethod::AFW: return "afw";
    case SolverMethod::FISTA: return "fista";
    case SolverMethod::TwoCD: return "2cd";
  }
  return "?";
}

inline SolverMethod parse_method(const std::string& s) {
  for (auto m : {SolverMethod::PolyCD, SolverMethod::PolyCDwA, SolverMethod::FW, SolverMethod::AFW,
                 SolverMethod::FISTA, SolverMethod::TwoCD})
    if (to_string(m) == s) return m;
  throw ContractViolation("unknown solver method '" + s + "' (expected polycd, polycdwa, fw, afw, fista or 2cd)");
}

inline Preset parse_preset(const std::string& s) {
  for (auto p : {Preset::Lasso, Preset::Logistic, Preset::Kde, Preset::SimplexQuadratic})
    if (to_string(p) == s) return p;
  throw ContractViolation("unknown preset '" + s + "' (expected lasso, logistic, kde or custom-simplex-quadratic)");
}

inline StepRule parse_step_rule(const std::string& s) {
  if (s == "line-search") return StepRule::ExactLineSearch;
  if (s == "gradient") return StepRule::OneDimGradient;
  throw ContractViolation("unknown step rule '" + s + "' (expected line-search or gradient)");
}

struct ProblemSpec {
  Index n = 200;
  Index d = 200;
  Index r = 20;
  double snr = 1.0;
  double rho = 0.1;
  double s = 1.0;
  /// Radius of the l1 ball; 0 means ||x*||_1.
  double radius = 0.0;
  Index m = 10;
  double outlier_fraction = 0.01;
  double sigma_kernel = 1.0;
  double mu_huber = 0.4;
};

struct SolverSpec {
  SolverMethod method = SolverMethod::PolyCDwA;
  std::string label;
  StepRule step_rule = StepRule::ExactLineSearch;
  int max_outer = 100;
  double tol = 1e-8;
  bool skip_inactive = false;
  /// Iteration budget for baselines; 0 picks the method default.
  int max_iter = 0;
  /// Stagnation window for baselines; -1 picks the method default.
  int window = -1;
  double window_tol = 1e-8;
  /// Wall-clock budget for baselines; 0 means none.
  double max_seconds = 0.0;

  std::string name() const { return label.empty() ? to_string(method) : label; }
};

struct ExperimentConfig {
  Preset preset = Preset::Lasso;
  ProblemSpec problem;
  std::vector<SolverSpec> solvers;
  int repetitions = 5;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
};

namespace detail {

inline void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ContractViolation(where + " must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw ContractViolation("unknown key '" + key + "' in " + where);
}

template <class T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline std::set<std::string> problem_keys(Preset p) {
  switch (p) {
    case Preset::Lasso: return {"n", "d", "r", "snr", "rho", "radius"};
    case Preset::Logistic: return {"n", "d", "r", "s", "rho", "radius"};
    case Preset::Kde: return {"n", "d", "m", "outlier_fraction", "sigma_kernel", "mu_huber"};
    case Preset::SimplexQuadratic: return {"n", "d", "r", "snr", "rho"};
  }
  return {};
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& j) {
  detail::reject_unknown(j, {"preset", "problem", "solvers", "repetitions", "seed", "output_dir"}, "config");
  ExperimentConfig cfg;
  try {
    if (j.contains("preset")) cfg.preset = parse_preset(j.at("preset").get<std::string>());
    if (j.contains("problem")) {
      const json& pj = j.at("problem");
      detail::reject_unknown(pj, detail::problem_keys(cfg.preset), "problem (preset " + to_string(cfg.preset) + ")");
      auto& p = cfg.problem;
      detail::read_if(pj, "n", p.n);
      detail::read_if(pj, "d", p.d);
      detail::read_if(pj, "r", p.r);
      detail::read_if(pj, "snr", p.snr);
      detail::read_if(pj, "rho", p.rho);
      detail::read_if(pj, "s", p.s);
      detail::read_if(pj, "radius", p.radius);
      detail::read_if(pj, "m", p.m);
      detail::read_if(pj, "outlier_fraction", p.outlier_fraction);
      detail::read_if(pj, "sigma_kernel", p.sigma_kernel);
      detail::read_if(pj, "mu_huber", p.mu_huber);
    }
    if (j.contains("solvers")) {
      for (const json& sj : j.at("solvers")) {
        detail::reject_unknown(sj,
                               {"method", "label", "step_rule", "max_outer", "tol", "skip_inactive", "max_iter",
                                "window", "window_tol", "max_seconds"},
                               "solver entry");
        SolverSpec s;
        if (!sj.contains("method")) throw ContractViolation("solver entry needs a 'method'");
        s.method = parse_method(sj.at("method").get<std::string>());
        detail::read_if(sj, "label", s.label);
        if (sj.contains("step_rule")) s.step_rule = parse_step_rule(sj.at("step_rule").get<std::string>());
        detail::read_if(sj, "max_outer", s.max_outer);
        detail::read_if(sj, "tol", s.tol);
        detail::read_if(sj, "skip_inactive", s.skip_inactive);
        detail::read_if(sj, "max_iter", s.max_iter);
        detail::read_if(sj, "window", s.window);
        detail::read_if(sj, "window_tol", s.window_tol);
        detail::read_if(sj, "max_seconds", s.max_seconds);
        cfg.solvers.push_back(s);
      }
    }
    detail::read_if(j, "repetitions", cfg.repetitions);
    detail::read_if(j, "seed", cfg.seed);
    detail::read_if(j, "output_dir", cfg.output_dir);
  } catch (const json::exception& e) {
    throw ContractViolation(std::string("config: ") + e.what());
  }
  require(!cfg.solvers.empty(), "config: at least one solver is required");
  require(cfg.repetitions >= 1, "config: repetitions must be at least 1");
  std::set<std::string> names;
  for (const auto& s : cfg.solvers)
    require(names.insert(s.name()).second, "config: duplicate solver name '" + s.name() + "'");
  return cfg;
}

inline json to_json(const ExperimentConfig& cfg) {
  json problem;
  const auto keys = detail::problem_keys(cfg.preset);
  const auto& p = cfg.problem;
  const std::map<std::string, json> all{{"n", p.n},
                                        {"d", p.d},
                                        {"r", p.r},
                                        {"snr", p.snr},
                                        {"rho", p.rho},
                                        {"s", p.s},
                                        {"radius", p.radius},
                                        {"m", p.m},
                                        {"outlier_fraction", p.outlier_fraction},
                                        {"sigma_kernel", p.sigma_kernel},
                                        {"mu_huber", p.mu_huber}};
  for (const auto& [k, v] : all)
    if (keys.count(k)) problem[k] = v;
  json solvers = json::array();
  for (const auto& s : cfg.solvers) {
    json e{{"method", to_string(s.method)},
           {"step_rule", to_string(s.step_rule)},
           {"max_outer", s.max_outer},
           {"tol", s.tol},
           {"skip_inactive", s.skip_inactive},
           {"max_iter", s.max_iter},
           {"window", s.window},
           {"window_tol", s.window_tol},
           {"max_seconds", s.max_seconds}};
    if (!s.label.empty()) e["label"] = s.label;
    solvers.push_back(e);
  }
  return json{{"preset", to_string(cfg.preset)}, {"problem", problem},         {"solvers", solvers},
              {"repetitions", cfg.repetitions},  {"seed", cfg.seed},           {"output_dir", cfg.output_dir}};
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ContractViolation("config file '" + path + "': " + e.what());
  }
  return parse_config(j);
}

/// One generated problem instance, owning the data shared by the objectives.
struct Instance {
  Preset preset = Preset::Lasso;
  std::shared_ptr<const Matrix> a;
  std::shared_ptr<const Vector> b;
  std::shared_ptr<const Matrix> points;
  double radius = 1.0;
  ProblemSpec spec;
};

inline Instance make_instance(Preset preset, const ProblemSpec& spec, std::uint64_t seed) {
  Instance inst;
  inst.preset = preset;
  inst.spec = spec;
  switch (preset) {
    case Preset::Lasso:
    case Preset::SimplexQuadratic: {
      auto data = gen_lasso({spec.n, spec.d, spec.r, spec.snr, spec.rho, seed});
      inst.a = std::make_shared<const Matrix>(std::move(data.a));
      inst.b = std::make_shared<const Vector>(std::move(data.b));
      inst.radius = preset == Preset::Lasso && spec.radius > 0.0 ? spec.radius : data.radius;
      break;
    }
    case Preset::Logistic: {
      auto data = gen_logistic({spec.n, spec.d, spec.r, spec.s, spec.rho, seed});
      inst.a = std::make_shared<const Matrix>(std::move(data.a));
      inst.b = std::make_shared<const Vector>(std::move(data.b));
      inst.radius = spec.radius > 0.0 ? spec.radius : data.radius;
      break;
    }
    case Preset::Kde: {
      KdeSpec ks;
      ks.n = spec.n;
      ks.d = spec.d;
      ks.m = spec.m;
      ks.outlier_fraction = spec.outlier_fraction;
      ks.sigma_kernel = spec.sigma_kernel;
      ks.mu_huber = spec.mu_huber;
      ks.seed = seed;
      inst.points = std::make_shared<const Matrix>(gen_kde(ks).points);
      break;
    }
  }
  return inst;
}

struct RunRecord {
  std::string solver;
  int rep = 0;
  SolveResult result;
  /// Wall time around the solve call.
  double seconds = 0.0;
  double f_final = 0.0;
  Index nnz = 0;
  std::string error;
  bool ok() const { return error.empty(); }
};

namespace detail {

inline SolveConfig solve_config(const SolverSpec& s) {
  SolveConfig c;
  c.step_rule = s.step_rule;
  c.max_outer = s.max_outer;
  c.rel_improve_tol = s.tol;
  c.skip_inactive = s.skip_inactive;
  return c;
}

/// Defaults: FW and AFW 5000 iterations with the 50-iteration stagnation
/// window; FISTA 1000 iterations; 2-CD 100 d iterations (d the dimension
/// of the original variable). FISTA and 2-CD run their full budget.
inline BaselineConfig baseline_config(const SolverSpec& s, BaselineMethod m, Index dim, std::uint64_t seed) {
  BaselineConfig c;
  c.method = m;
  c.window_tol = s.window_tol;
  c.max_seconds = s.max_seconds;
  c.seed = seed;
  const bool windowed = m == BaselineMethod::FW || m == BaselineMethod::AFW;
  c.window = s.window >= 0 ? s.window : (windowed ? 50 : 0);
  if (s.max_iter > 0) {
    c.max_iter = s.max_iter;
  } else {
    switch (m) {
      case BaselineMethod::FW:
      case BaselineMethod::AFW: c.max_iter = 5000; break;
      case BaselineMethod::FISTA: c.max_iter = 1000; break;
      case BaselineMethod::TwoCD: c.max_iter = static_cast<int>(100 * dim); break;
    }
  }
  // 2-CD traces are long; keep about a thousand records.
  if (m == BaselineMethod::TwoCD) c.trace_every = std::max(1, c.max_iter / 1000);
  return c;
}

template <SegmentObjective Obj>
SolveResult dispatch(Obj& obj, const VertexPolytope& p, const SolverSpec& s, std::uint64_t seed, Index var_dim) {
  switch (s.method) {
    case SolverMethod::PolyCD: return polycd_solve(obj, p, solve_config(s));
    case SolverMethod::PolyCDwA: return polycdwa_solve(obj, p, solve_config(s));
    case SolverMethod::FW: return fw_solve(obj, p, baseline_config(s, BaselineMethod::FW, p.dim(), seed));
    case SolverMethod::AFW: return afw_solve(obj, p, baseline_config(s, BaselineMethod::AFW, p.dim(), seed));
    case SolverMethod::FISTA: return fista_solve(obj, p, baseline_config(s, BaselineMethod::FISTA, p.dim(), seed));
    case SolverMethod::TwoCD: {
      if constexpr (PairwiseObjective<Obj>) {
        if (p.kind() == PolytopeKind::StandardSimplex)
          return twocd_solve(obj, p, baseline_config(s, BaselineMethod::TwoCD, var_dim, seed));
      }
      throw ContractViolation("2cd needs a pairwise objective on the standard simplex");
    }
  }
  throw ContractViolation("unhandled solver");
}

}  // namespace detail

/**
 * Runs one solver on an instance. The l1-ball presets are lifted to the
 * simplex of size 2d for 2-CD; the reported iterate is mapped back.
 */
inline RunRecord run_solver(const Instance& inst, const SolverSpec& s, int rep, std::uint64_t seed) {
  RunRecord rec;
  rec.solver = s.name();
  rec.rep = rep;
  try {
    const bool lift = s.method == SolverMethod::TwoCD &&
                      (inst.preset == Preset::Lasso || inst.preset == Preset::Logistic);
    auto timed = [&](auto& obj, const VertexPolytope& p) {
      detail::Stopwatch clock;
      rec.result = detail::dispatch(obj, p, s, seed, lift ? p.dim() / 2 : p.dim());
      rec.seconds = clock.seconds();
    };
    switch (inst.preset) {
      case Preset::Lasso:
      case Preset::Logistic: {
        std::shared_ptr<const Matrix> a = inst.a;
        VertexPolytope p = VertexPolytope::l1_ball(inst.a->cols(), inst.radius);
        if (lift) {
          a = std::make_shared<const Matrix>(lift_l1_to_simplex(*inst.a, inst.radius));
          p = VertexPolytope::simplex(a->cols());
        }
        if (inst.preset == Preset::Lasso) {
          LeastSquaresObjective obj(a, inst.b);
          timed(obj, p);
        } else {
          LogisticObjective obj(a, inst.b);
          timed(obj, p);
        }
        if (lift) rec.result.x = unlift_simplex_point(rec.result.x, inst.radius);
        break;
      }
      case Preset::SimplexQuadratic: {
        LeastSquaresObjective obj(inst.a, inst.b);
        timed(obj, VertexPolytope::simplex(inst.a->cols()));
        break;
      }
      case Preset::Kde: {
        KdeHuberObjective obj(inst.points, inst.spec.sigma_kernel, inst.spec.mu_huber);
        timed(obj, VertexPolytope::simplex(inst.points->cols()));
        break;
      }
    }
    rec.f_final = rec.result.trace.back().f_value;
    rec.nnz = count_nonzeros(rec.result.x);
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return rec;
}

struct SolverSummary {
  std::string solver;
  double mean_seconds = 0.0;
  double mean_gap = 0.0;
  double mean_nnz = 0.0;
  int runs = 0;
  int failures = 0;
};

struct Summary {
  std::vector<double> f_star;
  std::vector<SolverSummary> solvers;
  std::vector<RunRecord> runs;
  std::vector<std::string> warnings;

  const SolverSummary& at(const std::string& name) const {
    for (const auto& s : solvers)
      if (s.solver == name) return s;
    throw ContractViolation("no solver named '" + name + "' in summary");
  }
};

/// Header and rows of a trace file.
inline void write_trace_csv(std::ostream& os, const RunRecord& rec, double f_star, bool header = true) {
  if (header) os << "solver,rep,t,seconds,f_value,gap,nnz\n";
  os << std::setprecision(17);
  for (const auto& r : rec.result.trace)
    os << rec.solver << ',' << rec.rep << ',' << r.t << ',' << r.elapsed << ',' << r.f_value << ','
       << compute_gap(r.f_value, f_star) << ',' << r.nnz << '\n';
}

/// Gap series for plotting: one row per outer-boundary trace record.
inline void emit_plot_data(std::ostream& os, const std::vector<std::pair<std::string, std::vector<TraceRecord>>>& traces,
                           double f_star) {
  os << "solver,t,seconds,gap\n" << std::setprecision(17);
  for (const auto& [name, trace] : traces)
    for (const auto& r : trace)
      if (r.inner == 0) os << name << ',' << r.t << ',' << r.elapsed << ',' << compute_gap(r.f_value, f_star) << '\n';
}

inline json summary_json(const ExperimentConfig& cfg, const Summary& s) {
  json solvers = json::object();
  for (const auto& v : s.solvers)
    solvers[v.solver] = {{"mean_seconds", v.mean_seconds},
                         {"mean_gap", v.mean_gap},
                         {"mean_nnz", v.mean_nnz},
                         {"runs", v.runs},
                         {"failures", v.failures}};
  return json{{"library", "polycd"}, {"version", kVersion},     {"rng", Rng::kName},
              {"f_star", s.f_star},  {"solvers", solvers},      {"warnings", s.warnings},
              {"config", to_json(cfg)}};
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  body(out);
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace detail

/**
 * Runs every solver on every repetition. Repetition k uses seed + k.
 * f* is the best final value across solvers within a repetition; gaps
 * are relative to it. With `write_files`, one trace CSV per (solver, rep),
 * a plot CSV for repetition 0 and summary.json go to output_dir.
 */
inline Summary run_experiment(const ExperimentConfig& cfg, bool write_files = true, std::ostream* log = nullptr) {
  require(!cfg.solvers.empty(), "run_experiment: no solvers configured");
  require(cfg.repetitions >= 1, "run_experiment: repetitions must be at least 1");
  Summary summary;
  std::filesystem::path dir(cfg.output_dir);
  if (write_files) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
  }
  std::map<std::string, SolverSummary> acc;
  for (const auto& s : cfg.solvers) acc[s.name()].solver = s.name();

  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(rep);
    const Instance inst = make_instance(cfg.preset, cfg.problem, seed);
    std::vector<RunRecord> recs;
    double f_star = kInf;
    for (const auto& s : cfg.solvers) {
      RunRecord rec = run_solver(inst, s, rep, seed);
      if (log) {
        *log << "rep " << rep << ' ' << rec.solver << ": ";
        if (rec.ok())
          *log << "f=" << std::setprecision(12) << rec.f_final << " time=" << rec.seconds << "s\n";
        else
          *log << "failed: " << rec.error << '\n';
      }
      if (rec.ok()) {
        f_star = std::min(f_star, rec.f_final);
      } else {
        summary.warnings.push_back("rep " + std::to_string(rep) + " " + rec.solver + ": " + rec.error);
      }
      recs.push_back(std::move(rec));
    }
    summary.f_star.push_back(f_star);
    for (auto& rec : recs) {
      auto& a = acc[rec.solver];
      if (!rec.ok()) {
        ++a.failures;
        continue;
      }
      ++a.runs;
      a.mean_seconds += rec.seconds;
      a.mean_gap += compute_gap(rec.f_final, f_star);
      a.mean_nnz += static_cast<double>(rec.nnz);
      if (write_files) {
        detail::write_file(dir / (rec.solver + "_rep" + std::to_string(rep) + ".csv"),
                           [&](std::ostream& os) { write_trace_csv(os, rec, f_star); });
      }
    }
    if (write_files && rep == 0) {
      std::vector<std::pair<std::string, std::vector<TraceRecord>>> traces;
      for (const auto& rec : recs)
        if (rec.ok()) traces.emplace_back(rec.solver, rec.result.trace);
      detail::write_file(dir / "plot.csv", [&](std::ostream& os) { emit_plot_data(os, traces, f_star); });
    }
    for (auto& rec : recs) summary.runs.push_back(std::move(rec));
  }
  for (const auto& s : cfg.solvers) {
    auto a = acc[s.name()];
    if (a.runs > 0) {
      a.mean_seconds /= a.runs;
      a.mean_gap /= a.runs;
      a.mean_nnz /= a.runs;
    }
    summary.solvers.push_back(a);
  }
  if (write_files)
    detail::write_file(dir / "summary.json",
                       [&](std::ostream& os) { os << std::setw(2) << summary_json(cfg, summary) << '\n'; });
  return summary;
}

}  // namespace polycd
