#include "polycd/harness.hpp"
#include "polycd/quadratic.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <random>

using namespace polycd;

namespace {

struct SolveOptions {
  std::string preset = "lasso";
  Index n = 200;
  Index d = 200;
  Index r = 20;
  double snr = 1.0;
  double c = 0.0;
  std::string solver = "polycdwa";
  std::string step_rule = "line-search";
  int max_outer = 100;
  double tol = 1e-8;
  std::uint64_t seed = 1;
  std::string out = "out";
};

int run_solve(const SolveOptions& o) {
  ExperimentConfig cfg;
  cfg.preset = parse_preset(o.preset);
  cfg.problem.n = o.n;
  cfg.problem.d = o.d;
  cfg.problem.r = o.r;
  cfg.problem.snr = o.snr;
  cfg.problem.radius = o.c;
  SolverSpec s;
  s.method = parse_method(o.solver);
  s.step_rule = parse_step_rule(o.step_rule);
  s.max_outer = o.max_outer;
  s.tol = o.tol;
  cfg.solvers.push_back(s);
  cfg.repetitions = 1;
  cfg.seed = o.seed;
  cfg.output_dir = o.out;
  const Summary sum = run_experiment(cfg, true);
  const RunRecord& rec = sum.runs.front();
  if (!rec.ok()) {
    std::cerr << "solve failed: " << rec.error << '\n';
    return 1;
  }
  std::cout << std::setprecision(12) << "solver     " << rec.solver << "\n"
            << "f          " << rec.f_final << "\n"
            << "iterations " << rec.result.outer_iterations << "\n"
            << "seconds    " << rec.seconds << "\n"
            << "nnz        " << rec.nnz << "\n"
            << "trace      " << (std::filesystem::path(o.out) / (rec.solver + "_rep0.csv")).string() << "\n";
  return 0;
}

int run_bench(const std::string& config_path, const std::string& out_override) {
  ExperimentConfig cfg = load_config(config_path);
  if (!out_override.empty()) cfg.output_dir = out_override;
  const Summary sum = run_experiment(cfg, true, &std::cerr);
  std::cout << std::setw(2) << summary_json(cfg, sum) << '\n';
  return sum.warnings.empty() ? 0 : 2;
}

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

int run_verify(std::uint64_t seed) {
  std::vector<Check> checks;
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  auto random_matrix = [&](Index r, Index c) {
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) m(i, j) = normal(gen);
    return m;
  };
  auto random_simplex = [&](Index m) {
    Vector w(m);
    std::exponential_distribution<double> e;
    for (Index j = 0; j < m; ++j) w[j] = e(gen);
    return Vector(w / w.sum());
  };

  {
    QuadraticObjective q(2.0 * Matrix::Identity(3, 3), Vector::Zero(3));
    const auto ref = reference_solve(q, VertexPolytope::simplex(3));
    checks.push_back({"reference: ||x||^2 on the 3-simplex is 1/3", std::abs(ref.f - 1.0 / 3.0) <= 1e-10,
                      "f = " + std::to_string(ref.f)});
  }
  {
    double worst = 0.0;
    bool support = true;
    for (int k = 0; k < 10000; ++k) {
      const Vector a = random_simplex(6);
      Vector b = random_simplex(6);
      const auto dec = simplex_decompose(a, b);
      worst = std::max(worst, (a - b - 0.5 * dec.eta * (dec.p - dec.q)).cwiseAbs().maxCoeff());
      for (Index j = 0; j < 6; ++j)
        if (dec.p[j] > 0.0 && a[j] <= 0.0) support = false;
    }
    checks.push_back({"simplex decomposition reconstructs a - b", worst <= 1e-14 && support,
                      "max error " + std::to_string(worst)});
  }
  {
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const Matrix b = random_matrix(4, 4);
      QuadraticObjective q(b.transpose() * b, random_matrix(4, 1).col(0));
      std::vector<Vector> xs;
      std::vector<Vector> gs;
      for (int i = 0; i < 6; ++i) {
        xs.push_back(random_simplex(4));
        gs.push_back(q.gradient_at(xs.back()));
      }
      worst = std::max(worst, check_reduction_identity(gs, xs, random_simplex(4)));
    }
    checks.push_back({"telescoping gradient identities", worst <= 1e-9, "max discrepancy " + std::to_string(worst)});
  }
  {
    std::vector<double> a;
    for (int k = 1; k <= 1000; ++k) a.push_back(1.0 / k);
    const auto rep = check_sequence_lemma(a, 1.0);
    checks.push_back({"sequence lemma on a_k = 1/k", rep.outcome == LemmaOutcome::Holds, to_string(rep.outcome)});
  }
  {
    const Matrix a = random_matrix(30, 10);
    LeastSquaresObjective ls(a, random_matrix(30, 1).col(0));
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const Vector x = random_matrix(10, 1).col(0);
      const Vector g = ls.gradient_at(x);
      worst = std::max(worst, (finite_diff_gradient(ls, x, 1e-5) - g).norm() / std::max(1.0, g.norm()));
    }
    checks.push_back({"least-squares gradient vs central differences", worst <= 1e-4,
                      "max relative error " + std::to_string(worst)});
  }
  int failed = 0;
  for (const auto& c : checks) {
    std::cout << (c.pass ? "PASS  " : "FAIL  ") << c.name << "  (" << c.detail << ")\n";
    failed += c.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}

int run_gen(const SolveOptions& o) {
  const Preset preset = parse_preset(o.preset);
  std::ofstream out(o.out);
  if (!out) {
    std::cerr << "cannot open '" << o.out << "' for writing\n";
    return 1;
  }
  switch (preset) {
    case Preset::Lasso:
    case Preset::SimplexQuadratic: {
      const auto data = gen_lasso({o.n, o.d, o.r, o.snr, 0.1, o.seed});
      write_tsv(out, data.a, data.b);
      break;
    }
    case Preset::Logistic: {
      const auto data = gen_logistic({o.n, o.d, o.r, 1.0, 0.1, o.seed});
      write_tsv(out, data.a, data.b);
      break;
    }
    case Preset::Kde: {
      KdeSpec ks;
      ks.n = o.n;
      ks.d = o.d;
      ks.seed = o.seed;
      write_tsv(out, gen_kde(ks).points);
      break;
    }
  }
  return 0;
}

void add_problem_flags(CLI::App* cmd, SolveOptions& o) {
  cmd->add_option("--preset", o.preset, "lasso, logistic, kde or custom-simplex-quadratic")->capture_default_str();
  cmd->add_option("--n", o.n, "samples")->capture_default_str();
  cmd->add_option("--d", o.d, "features (kde: point dimension)")->capture_default_str();
  cmd->add_option("--r", o.r, "support size of x*")->capture_default_str();
  cmd->add_option("--snr", o.snr, "signal-to-noise ratio")->capture_default_str();
  cmd->add_option("--seed", o.seed, "data seed")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polyhedral coordinate descent solvers and experiments"};
  app.require_subcommand(1);

  SolveOptions solve_opts;
  auto* solve = app.add_subcommand("solve", "Solve one generated problem with one solver");
  add_problem_flags(solve, solve_opts);
  solve->add_option("--c", solve_opts.c, "l1-ball radius (0 = ||x*||_1)")->capture_default_str();
  solve->add_option("--solver", solve_opts.solver, "polycd, polycdwa, fw, afw, fista or 2cd")->capture_default_str();
  solve->add_option("--step-rule", solve_opts.step_rule, "line-search or gradient")->capture_default_str();
  solve->add_option("--max-outer", solve_opts.max_outer, "outer iterations")->capture_default_str();
  solve->add_option("--tol", solve_opts.tol, "relative improvement tolerance")->capture_default_str();
  solve->add_option("--out", solve_opts.out, "output directory")->capture_default_str();

  std::string config_path;
  std::string bench_out;
  auto* bench = app.add_subcommand("bench", "Run a comparison described by a JSON config");
  bench->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
  bench->add_option("--out", bench_out, "override output_dir");

  std::uint64_t verify_seed = 7;
  auto* verify = app.add_subcommand("verify", "Run the oracle and lemma checks");
  verify->add_option("--seed", verify_seed, "seed for the random cases")->capture_default_str();

  SolveOptions gen_opts;
  gen_opts.out = "data.tsv";
  auto* gen = app.add_subcommand("gen", "Write a generated dataset as TSV");
  add_problem_flags(gen, gen_opts);
  gen->add_option("--out", gen_opts.out, "output file")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*solve) return run_solve(solve_opts);
    if (*bench) return run_bench(config_path, bench_out);
    if (*verify) return run_verify(verify_seed);
    if (*gen) return run_gen(gen_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
