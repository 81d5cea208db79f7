// pofd command line: simulate, estimate, test, experiment.
//
// Exit codes: 0 success, 1 usage error, 2 data/parse error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pofd/pofd.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw pofd::PreconditionError("cannot write " + path.string());
  return os;
}

pofd::FunctionalSample load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw pofd::PreconditionError("cannot open " + path);
  return pofd::csv::read_sample(is);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw pofd::PreconditionError("cannot create directory " + dir.string() + ": " + ec.message());
}

// Longest run of grid points observed by every curve.
pofd::IndexRange common_subdomain(const pofd::FunctionalSample& s) {
  const pofd::ObservationSummary summary = pofd::summarize_observation(s);
  const auto& c = summary.d_f_candidates;
  if (c.empty()) throw pofd::PreconditionError("no grid point is observed by every curve");
  pofd::IndexRange best{c[0], c[0]}, run{c[0], c[0]};
  for (std::size_t k = 1; k < c.size(); ++k) {
    run = c[k] == run.last + 1 ? pofd::IndexRange{run.first, c[k]} : pofd::IndexRange{c[k], c[k]};
    if (run.size() > best.size()) best = run;
  }
  return best;
}

struct SimulateOptions {
  std::string dgp = "depdis";
  std::size_t n = 100;
  std::size_t p = 501;
  std::uint64_t seed = 1;
  std::string out = ".";
};

int simulate(const SimulateOptions& o) {
  pofd::DgpConfig cfg;
  cfg.kind = pofd::parse_dgp_kind(o.dgp);
  cfg.n = o.n;
  cfg.p = o.p;
  cfg.seed = o.seed;
  const pofd::DgpDraw draw = pofd::draw_sample(cfg);
  ensure_dir(o.out);
  auto sample_os = open_out(fs::path(o.out) / "sample.csv");
  pofd::csv::write_sample(sample_os, draw.sample);
  auto coef_os = open_out(fs::path(o.out) / "coefficients.csv");
  pofd::csv::write_coefficients(coef_os, draw.d, draw.xi);
  return kOk;
}

struct EstimateOptions {
  std::string input;
  std::optional<double> d_f;
  bool fpc = false;
  std::string out = ".";
};

int estimate(const EstimateOptions& o) {
  const pofd::FunctionalSample sample = load(o.input);
  const pofd::SampleDerivatives d(sample, 1);
  pofd::MeanEstimate m_ftc = o.d_f ? pofd::ftc_mean_general(d, *o.d_f) : pofd::ftc_mean(d);
  pofd::CovEstimate c_ftc = o.d_f ? pofd::ftc_cov_general(d, *o.d_f) : pofd::ftc_cov(d);
  const pofd::Grid& g = sample.grid();
  ensure_dir(o.out);
  const fs::path dir(o.out);
  {
    auto os = open_out(dir / "mean_classical.csv");
    pofd::csv::write_curve(os, g, pofd::mean_est(d, 0).values, "mean_classical");
  }
  {
    auto os = open_out(dir / "mean_ftc.csv");
    pofd::csv::write_curve(os, g, m_ftc.values, "mean_ftc");
  }
  {
    auto os = open_out(dir / "cov_classical.csv");
    pofd::csv::write_surface(os, g, pofd::cov_est(d, 0, 0).values);
  }
  {
    auto os = open_out(dir / "cov_ftc.csv");
    pofd::csv::write_surface(os, g, c_ftc.values);
  }
  if (o.fpc) {
    const pofd::FpcaResult f = pofd::fpca_scores(sample, common_subdomain(sample));
    auto os = open_out(dir / "fpc_scores.csv");
    os << "# subdomain=" << pofd::csv::format_double(g[f.subdomain.first]) << ','
       << pofd::csv::format_double(g[f.subdomain.last]) << "\n# explained=";
    for (Eigen::Index c = 0; c < f.explained.size(); ++c)
      os << (c ? "," : "") << pofd::csv::format_double(f.explained(c));
    os << "\ni";
    for (Eigen::Index c = 0; c < f.scores.cols(); ++c) os << ",score_" << (c + 1);
    os << '\n';
    for (Eigen::Index i = 0; i < f.scores.rows(); ++i) {
      os << (i + 1);
      for (Eigen::Index c = 0; c < f.scores.cols(); ++c) os << ',' << pofd::csv::format_double(f.scores(i, c));
      os << '\n';
    }
  }
  if (m_ftc.anchor_shift != 0.0)
    std::cerr << "note: anchor snapped to t = " << g[*m_ftc.anchor_index] << '\n';
  return kOk;
}

struct TestOptions {
  std::string input;
  std::size_t j_max = 51;
  double alpha = 0.05;
  std::size_t bootstrap = 1000;
  std::uint64_t seed = 1;
  std::string out;
};

int run_test(const TestOptions& o) {
  const pofd::FunctionalSample sample = load(o.input);
  const pofd::TestReport report = pofd::classify_and_test(sample, o.j_max, o.alpha, o.bootstrap, o.seed);
  const std::string text = pofd::serialize(report);
  if (o.out.empty()) {
    std::cout << text;
  } else {
    auto os = open_out(o.out);
    os << text;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean/covariance estimation and MCAR-violation testing for partially observed functional data"};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Draw a simulated sample (sample.csv, coefficients.csv)");
  sim_cmd->add_option("--dgp", sim.dgp, "depdis|depcon|inddis|indcon|depdis-mirrored|v2-depdis")->capture_default_str();
  sim_cmd->add_option("--n", sim.n, "Number of curves")->capture_default_str()->check(CLI::PositiveNumber);
  sim_cmd->add_option("--p", sim.p, "Grid points on [0, 1]")->capture_default_str()->check(CLI::Range(3, 1000000));
  sim_cmd->add_option("--seed", sim.seed)->capture_default_str();
  sim_cmd->add_option("--out", sim.out, "Output directory")->capture_default_str();

  EstimateOptions est;
  auto* est_cmd = app.add_subcommand("estimate", "Classical and FTC mean/covariance estimates");
  est_cmd->add_option("input", est.input, "Sample CSV")->required();
  est_cmd->add_option("--d-f", est.d_f, "Anchor observed by every curve (required for non-interval patterns)");
  est_cmd->add_flag("--fpc", est.fpc, "Also write FPC scores on the common observed subdomain");
  est_cmd->add_option("--out", est.out, "Output directory")->capture_default_str();

  TestOptions tst;
  auto* tst_cmd = app.add_subcommand("test", "Stepdown test for the violation type");
  tst_cmd->add_option("input", tst.input, "Sample CSV")->required();
  tst_cmd->add_option("--j-max", tst.j_max)->capture_default_str();
  tst_cmd->add_option("--alpha", tst.alpha)->capture_default_str();
  tst_cmd->add_option("--bootstrap", tst.bootstrap, "Bootstrap replications R")->capture_default_str();
  tst_cmd->add_option("--seed", tst.seed)->capture_default_str();
  tst_cmd->add_option("--out", tst.out, "Report file (default: stdout)");

  pofd::ExperimentSpec spec;
  std::string config, mode, dgps, ns, exp_out;
  std::optional<std::size_t> reps, p, j_max, bootstrap;
  std::optional<double> alpha;
  std::optional<std::uint64_t> seed;
  bool no_cov = false, full = false;
  auto* exp_cmd = app.add_subcommand("experiment", "Monte-Carlo bias/variance or test-selection tables");
  exp_cmd->add_option("--config", config, "key=value file; flags override it");
  exp_cmd->add_option("--mode", mode, "bias_variance|test_selection");
  exp_cmd->add_option("--dgp", dgps, "Comma-separated DGP list");
  exp_cmd->add_option("--n", ns, "Comma-separated sample sizes");
  exp_cmd->add_option("--reps", reps, "Replications");
  exp_cmd->add_option("--p", p, "Grid points");
  exp_cmd->add_option("--j-max", j_max);
  exp_cmd->add_option("--alpha", alpha);
  exp_cmd->add_option("--bootstrap", bootstrap);
  exp_cmd->add_option("--seed", seed);
  exp_cmd->add_flag("--no-cov", no_cov, "Skip the covariance estimators");
  exp_cmd->add_flag("--full", full, "Full-fidelity scale: 500 replications, p = 501");
  exp_cmd->add_option("--out", exp_out, "Result CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*sim_cmd) return simulate(sim);
    if (*est_cmd) return estimate(est);
    if (*tst_cmd) return run_test(tst);

    if (!config.empty()) {
      std::ifstream is(config);
      if (!is) throw pofd::PreconditionError("cannot open " + config);
      pofd::read_config(is, spec);
    }
    if (full) {
      spec.replications = 500;
      spec.p = 501;
    }
    if (!mode.empty()) pofd::apply_setting(spec, "mode", mode);
    if (!dgps.empty()) pofd::apply_setting(spec, "dgp", dgps);
    if (!ns.empty()) pofd::apply_setting(spec, "n", ns);
    if (reps) spec.replications = *reps;
    if (p) spec.p = *p;
    if (j_max) spec.j_max = *j_max;
    if (alpha) spec.alpha = *alpha;
    if (bootstrap) spec.bootstrap = *bootstrap;
    if (seed) spec.seed = *seed;
    if (no_cov) spec.include_cov = false;
    const pofd::ExperimentResult result = pofd::run_experiment(spec);
    if (exp_out.empty()) {
      pofd::write_result(std::cout, result);
    } else {
      auto os = open_out(exp_out);
      pofd::write_result(os, result);
    }
    std::cerr << "elapsed: " << result.seconds << " s\n";
    return kOk;
  } catch (const pofd::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kData;
  } catch (const pofd::PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const pofd::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const pofd::ArgumentError& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
}
