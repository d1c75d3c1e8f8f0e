#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "crs/montecarlo.hpp"

namespace {

using namespace crs;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool env_verbose() {
  const char* v = std::getenv("CRS_VERBOSE");
  return v && *v && std::string(v) != "0";
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
}

struct SolveArgs {
  std::string channels;
  double pt = 100, pr = -1, eps = 1e-3;
  std::string scheme = "crs", out;
  bool cold = false;
};

int run_solve(const SolveArgs& a, bool verbose) {
  SchemeId scheme;
  try {
    scheme = parse_scheme(a.scheme);
  } catch (const ParseError& e) {
    throw UsageError(e.what());
  }
  const std::string bytes = read_file(a.channels);
  const ChannelSet cs = order_users(channel_set_from_string(bytes));
  const PowerBudget pb{a.pt, a.pr < 0 ? a.pt : a.pr};
  ScaConfig cfg;
  cfg.epsilon = a.eps;

  Solution sol;
  if (scheme == SchemeId::kCRS && !a.cold) {
    std::vector<std::pair<SchemeId, Solution>> base;
    for (SchemeId s : {SchemeId::kNRS, SchemeId::kMULP, SchemeId::kCNOMA})
      base.emplace_back(s, solve_scheme(s, cs, pb, cfg));
    std::vector<std::pair<SchemeId, const Solution*>> seeds;
    for (const auto& [s, b] : base) seeds.emplace_back(s, &b);
    sol = solve_crs_nested(cs, pb, cfg, seeds);
  } else {
    sol = solve_scheme(scheme, cs, pb, cfg);
  }
  sol.fingerprint = fingerprint(bytes);
  if (verbose)
    std::cerr << "scheme " << sol.scheme << " ssr " << sol.ssr() << " case "
              << case_number(sol.best.case_id) << " status " << to_string(sol.best.status)
              << " fingerprint " << sol.fingerprint << "\n";
  write_text(a.out, to_json(sol).dump(2) + "\n");
  return 0;
}

struct MonteArgs {
  int trials = 100, nt = 2, threads = 1;
  std::string snr = "0:5:30", schemes = "crs,nrs,mulp,cnoma", out, summary;
  double sigma_h1 = 1.0, sigma_h2 = 1.0, eps = 1e-3;
  std::uint64_t seed = 1;
  bool timing = false;
};

int run_montecarlo_cmd(const MonteArgs& a, bool verbose) {
  MonteCarloConfig cfg;
  try {
    cfg.snr_grid_db = parse_snr_grid(a.snr);
    cfg.schemes = parse_scheme_list(a.schemes);
  } catch (const ParseError& e) {
    throw UsageError(e.what());
  }
  cfg.trials = a.trials;
  cfg.n_t = a.nt;
  cfg.stats.h1 = a.sigma_h1;
  cfg.stats.h2 = a.sigma_h2;
  cfg.seed = a.seed;
  cfg.epsilon = a.eps;
  cfg.threads = a.threads;
  cfg.timing = a.timing;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  CellCallback progress;
  if (verbose)
    progress = [](const std::vector<TrialRecord>& cell) {
      for (const auto& r : cell)
        std::cerr << "snr " << r.snr_db << " trial " << r.trial << " " << to_string(r.scheme)
                  << " ssr " << r.ssr << " channel " << r.fingerprint << "\n";
    };
  const auto records = run_montecarlo(cfg, progress);

  std::ostringstream csv;
  write_csv(csv, records);
  write_text(a.out, csv.str());

  std::ostringstream sum;
  write_summary(sum, summarize(records));
  if (!a.summary.empty()) write_text(a.summary, sum.str());
  if (!a.out.empty() && a.out != "-") std::cout << sum.str();
  return 0;
}

struct GenArgs {
  std::uint64_t seed = 1;
  int nt = 2;
  double sigma_h1 = 1.0, sigma_h2 = 1.0;
  std::string out;
};

int run_gen(const GenArgs& a) {
  ChannelStats st;
  st.h1 = a.sigma_h1;
  st.h2 = a.sigma_h2;
  const auto cs = generate_channel_set(a.seed, a.nt, st);
  write_text(a.out, channel_set_to_string(cs));
  return 0;
}

// Quick invariant sweep: surrogate bound directions, a solver oracle, SCA
// monotonicity/feasibility on one channel and the scheme nesting.
int run_check(bool verbose) {
  int failures = 0;
  auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << "  " << detail << "\n";
    if (!ok) ++failures;
  };

  CounterRng rng(2024);
  double worst = 0;
  for (int i = 0; i < 20000; ++i) {
    const double th0 = rng.next_unit(), b0 = 4 * rng.next_unit() - 1;
    const double th = rng.next_unit(), b = 4 * rng.next_unit() - 1;
    worst = std::max(worst, phi_lb(th, b, {th0, b0}) - th * b);
    worst = std::max(worst, th * b - theta_ub(th, b, {th0, b0}));
    worst = std::max(worst, gamma_tangent(b, b0) - std::exp2(b));
    CVec h(2), p(2), p0(2), q(2), q0(2);
    for (int k = 0; k < 2; ++k) {
      h[k] = rng.next_complex_gaussian(1);
      p[k] = rng.next_complex_gaussian(1);
      p0[k] = rng.next_complex_gaussian(1);
      q[k] = rng.next_complex_gaussian(1);
      q0[k] = rng.next_complex_gaussian(1);
    }
    const double rho = 0.05 + rng.next_unit(), rho0 = 0.05 + rng.next_unit();
    worst = std::max(worst, psi_lb(p, h, rho, p0, rho0) - std::norm(h.dot(p)) / rho);
    worst = std::max(worst, omega_lb(p, q, h, p0, q0) - std::norm(h.dot(p)) - std::norm(h.dot(q)));
  }
  report("surrogate-bounds", worst <= 1e-12, "worst excess " + std::to_string(worst));

  ConvexProgram lp;
  lp.add_var("x", 0, 10);
  lp.add_var("y", -kInf, 3);
  Constraint e;
  e.kind = BlockKind::kExponential;
  e.name = "2^x<=1+y";
  e.exponent.add(0, 1.0);
  e.affine.add(1, -1.0).shift(-1.0);
  lp.constraints.push_back(e);
  lp.objective.add(0, 1.0);
  const auto sr = solve(lp);
  report("solver-oracle", sr.status == SolverStatus::kOptimal && std::abs(sr.objective - 2.0) < 1e-6,
         "objective " + std::to_string(sr.objective) + " status " + to_string(sr.status));

  const auto cs = generate_channel_set(7, 2, ChannelStats{});
  const PowerBudget pb{100, 100};
  ScaConfig cfg;
  cfg.parallel_cases = false;
  double drop = 0, resid = 1;
  for (CaseId cid : kAllCases) {
    const auto init = initialize(cid, cs, pb, cfg);
    if (!init) continue;
    const auto c = sca_solve_case(cid, *init, cs, pb, cfg);
    for (std::size_t i = 1; i < c.trace.size(); ++i) drop = std::max(drop, c.trace[i - 1] - c.trace[i]);
    resid = std::min(resid, c.min_residual);
    if (verbose)
      std::cerr << "case " << case_number(cid) << " " << to_string(c.status) << " ssr " << c.ssr
                << " iterations " << c.iterations << "\n";
  }
  report("sca-monotone", drop <= 1e-6, "largest drop " + std::to_string(drop));
  report("sca-feasible", resid >= -1e-6, "worst residual " + std::to_string(resid));

  std::vector<std::pair<SchemeId, Solution>> base;
  for (SchemeId s : {SchemeId::kNRS, SchemeId::kMULP, SchemeId::kCNOMA})
    base.emplace_back(s, solve_scheme(s, cs, pb, cfg));
  std::vector<std::pair<SchemeId, const Solution*>> seeds;
  double best_base = 0;
  for (const auto& [s, b] : base) {
    seeds.emplace_back(s, &b);
    best_base = std::max(best_base, b.ssr());
  }
  const double crs = solve_crs_nested(cs, pb, cfg, seeds).ssr();
  report("scheme-nesting", crs >= best_base - 1e-3,
         "crs " + std::to_string(crs) + " best baseline " + std::to_string(best_base));
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secrecy sum-rate optimizer for cooperative rate-splitting"};
  app.require_subcommand(1);
  app.fallthrough();
  bool verbose = env_verbose();
  app.add_flag("-v,--verbose", verbose, "Progress and diagnostics on stderr (or set CRS_VERBOSE=1)");

  SolveArgs sa;
  auto* solve_cmd = app.add_subcommand("solve", "Optimize one channel realization");
  solve_cmd->add_option("--channels", sa.channels, "Channel JSON file")->required();
  solve_cmd->add_option("--pt", sa.pt, "Transmit power P_T")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--pr", sa.pr, "Relay power P_R (default: P_T)");
  solve_cmd->add_option("--eps", sa.eps, "SCA convergence tolerance")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--scheme", sa.scheme, "One of: " + scheme_list());
  solve_cmd->add_option("--out", sa.out, "Solution JSON path (default: stdout)");
  solve_cmd->add_flag("--cold", sa.cold, "Do not warm-start CRS from the baselines");

  MonteArgs ma;
  auto* mc_cmd = app.add_subcommand("montecarlo", "Average SSR versus SNR over random channels");
  mc_cmd->add_option("--trials", ma.trials, "Channel realizations per SNR point");
  mc_cmd->add_option("--snr", ma.snr, "SNR grid in dB, start:step:stop or a comma list");
  mc_cmd->add_option("--nt", ma.nt, "Transmit antennas");
  mc_cmd->add_option("--sigma-h1", ma.sigma_h1, "Variance of h1 entries")->check(CLI::PositiveNumber);
  mc_cmd->add_option("--sigma-h2", ma.sigma_h2, "Variance of h2 entries")->check(CLI::PositiveNumber);
  mc_cmd->add_option("--schemes", ma.schemes, "Comma list of: " + scheme_list());
  mc_cmd->add_option("--seed", ma.seed, "Master seed");
  mc_cmd->add_option("--eps", ma.eps, "SCA convergence tolerance")->check(CLI::PositiveNumber);
  mc_cmd->add_option("--threads", ma.threads, "Worker threads");
  mc_cmd->add_option("--out", ma.out, "CSV path (default: stdout)");
  mc_cmd->add_option("--summary", ma.summary, "Per-(snr, scheme) mean and standard error CSV");
  mc_cmd->add_flag("--timing", ma.timing, "Record solver wall time in solve_ms");

  GenArgs ga;
  auto* gen_cmd = app.add_subcommand("gen-channels", "Draw one channel set and write it as JSON");
  gen_cmd->add_option("--seed", ga.seed, "Seed");
  gen_cmd->add_option("--nt", ga.nt, "Transmit antennas");
  gen_cmd->add_option("--sigma-h1", ga.sigma_h1, "Variance of h1 entries")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--sigma-h2", ga.sigma_h2, "Variance of h2 entries")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--out", ga.out, "Output path (default: stdout)");

  auto* check_cmd = app.add_subcommand("check", "Run the built-in invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*solve_cmd) return run_solve(sa, verbose);
    if (*mc_cmd) return run_montecarlo_cmd(ma, verbose);
    if (*gen_cmd) return run_gen(ga);
    if (*check_cmd) return run_check(verbose);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\nschemes: " << scheme_list() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
