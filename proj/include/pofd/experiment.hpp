#ifndef POFD_EXPERIMENT_HPP
#define POFD_EXPERIMENT_HPP

// Monte-Carlo experiment runner: integrated squared bias / variance of the
// classical and FTC estimators, and selection rates of the stepdown test.
//
// Replications run concurrently in waves; every replication seed is a pure
// function of (seed, dgp, n, replication) and results are reduced in
// replication order, so output does not depend on the worker count.

#include <charconv>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pofd/calculus.hpp"
#include "pofd/csv.hpp"
#include "pofd/dgp.hpp"
#include "pofd/estimators.hpp"
#include "pofd/mcar_test.hpp"
#include "pofd/parallel.hpp"
#include "pofd/rng.hpp"

namespace pofd {

enum class ExperimentMode { BiasVariance, TestSelection };

inline std::string_view to_string(ExperimentMode m) {
  return m == ExperimentMode::BiasVariance ? "bias_variance" : "test_selection";
}

inline ExperimentMode parse_experiment_mode(std::string_view s) {
  if (s == "bias_variance") return ExperimentMode::BiasVariance;
  if (s == "test_selection") return ExperimentMode::TestSelection;
  throw ArgumentError("unknown experiment mode '" + std::string(s) + "'");
}

struct ExperimentSpec {
  ExperimentMode mode = ExperimentMode::BiasVariance;
  std::vector<DgpKind> dgps{DgpKind::DepDis, DgpKind::DepCon, DgpKind::IndDis, DgpKind::IndCon};
  std::vector<std::size_t> ns{50, 150, 250, 500};
  std::size_t replications = 200;
  std::size_t p = 201;
  std::size_t j_max = 51;
  double alpha = 0.05;
  std::size_t bootstrap = 1000;
  std::uint64_t seed = 1;
  bool include_cov = true;  // bias_variance: also run the covariance estimators
  std::size_t workers = 0;  // 0: POFD_WORKERS or hardware concurrency

  void validate() const {
    if (replications < 1) throw ArgumentError("replications must be >= 1");
    if (dgps.empty() || ns.empty()) throw ArgumentError("experiment needs at least one DGP and one n");
    if (p < 3) throw ArgumentError("p must be >= 3");
    if (mode == ExperimentMode::TestSelection && (j_max < 3 || j_max % 2 == 0))
      throw ArgumentError("J_max must be odd and >= 3");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  }
};

namespace detail {

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  for (auto f : csv::split(s))
    if (!csv::trim(f).empty()) out.emplace_back(csv::trim(f));
  return out;
}

inline std::size_t parse_count(std::string_view s, std::string_view key) {
  std::size_t v = 0;
  const auto t = csv::trim(s);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
    throw ArgumentError("invalid value '" + std::string(s) + "' for " + std::string(key));
  return v;
}

}  // namespace detail

/// Applies one `key=value` setting; keys mirror the CLI long flags.
inline void apply_setting(ExperimentSpec& spec, std::string_view key, std::string_view value) {
  key = csv::trim(key);
  value = csv::trim(value);
  if (key == "mode") {
    spec.mode = parse_experiment_mode(value);
  } else if (key == "dgp") {
    spec.dgps.clear();
    for (const auto& s : detail::split_list(value)) spec.dgps.push_back(parse_dgp_kind(s));
  } else if (key == "n") {
    spec.ns.clear();
    for (const auto& s : detail::split_list(value)) spec.ns.push_back(detail::parse_count(s, key));
  } else if (key == "reps") {
    spec.replications = detail::parse_count(value, key);
  } else if (key == "p") {
    spec.p = detail::parse_count(value, key);
  } else if (key == "j-max" || key == "j_max") {
    spec.j_max = detail::parse_count(value, key);
  } else if (key == "alpha") {
    try {
      spec.alpha = csv::parse_double(value, 0);
    } catch (const ParseError&) {
      throw ArgumentError("invalid value '" + std::string(value) + "' for alpha");
    }
  } else if (key == "bootstrap") {
    spec.bootstrap = detail::parse_count(value, key);
  } else if (key == "seed") {
    spec.seed = detail::parse_count(value, key);
  } else if (key == "cov") {
    spec.include_cov = detail::parse_count(value, key) != 0;
  } else {
    throw ArgumentError("unknown setting '" + std::string(key) + "'");
  }
}

/// Line-oriented `key=value` config; `#` starts a comment.
inline void read_config(std::istream& is, ExperimentSpec& spec) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view v = line;
    if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
    v = csv::trim(v);
    if (v.empty()) continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key=value", lineno);
    try {
      apply_setting(spec, v.substr(0, eq), v.substr(eq + 1));
    } catch (const ArgumentError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
}

struct BiasVarianceRow {
  DgpKind dgp;
  std::size_t n;
  std::string estimator;
  double bias = 0.0;      // (doubly) integrated squared bias
  double variance = 0.0;  // (doubly) integrated variance
  double excluded_fraction = 0.0;  // grid cells defined in < 50% of replications
  bool degenerate = false;         // single replication: variance set to 0
};

struct SelectionRow {
  DgpKind dgp;
  std::size_t n;
  double null_pct = 0.0;
  double v_pct = 0.0;
  double other_pct = 0.0;
  std::size_t failures = 0;  // replications aborted by numerical errors
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<BiasVarianceRow> bias_variance;
  std::vector<SelectionRow> selection;
  double seconds = 0.0;
};

inline std::uint64_t replication_seed(std::uint64_t seed, DgpKind kind, std::size_t n, std::size_t rep) {
  const std::uint64_t stream = (static_cast<std::uint64_t>(kind) << 56) ^ (static_cast<std::uint64_t>(n) << 28) ^
                               static_cast<std::uint64_t>(rep);
  return derive_seed(seed, stream);
}

namespace detail {

/// Welford moments per cell with per-cell counts of defined values.
class CellMoments {
 public:
  explicit CellMoments(Eigen::Index size)
      : count_(Vector::Zero(size)), mean_(Vector::Zero(size)), m2_(Vector::Zero(size)) {}

  void add(const double* x) {
    for (Eigen::Index k = 0; k < count_.size(); ++k) {
      if (!is_defined(x[k])) continue;
      count_(k) += 1.0;
      const double delta = x[k] - mean_(k);
      mean_(k) += delta / count_(k);
      m2_(k) += delta * (x[k] - mean_(k));
    }
  }

  struct Summary {
    Vector bias_sq;
    Vector variance;
    double excluded_fraction;
  };

  Summary summarize(const double* truth, std::size_t reps) const {
    Summary s{Vector::Zero(count_.size()), Vector::Zero(count_.size()), 0.0};
    std::size_t excluded = 0;
    for (Eigen::Index k = 0; k < count_.size(); ++k) {
      if (count_(k) == 0.0 || 2.0 * count_(k) < static_cast<double>(reps)) {
        ++excluded;
        continue;
      }
      const double b = mean_(k) - truth[k];
      s.bias_sq(k) = b * b;
      s.variance(k) = count_(k) > 1.0 ? std::max(0.0, m2_(k) / (count_(k) - 1.0)) : 0.0;
    }
    s.excluded_fraction = static_cast<double>(excluded) / static_cast<double>(count_.size());
    return s;
  }

 private:
  Vector count_, mean_, m2_;
};

struct ReplicationEstimates {
  Vector mean_classical, mean_ftc;
  Matrix cov_classical, cov_ftc;
};

inline std::size_t wave_size(const ExperimentSpec& spec) {
  return spec.workers ? spec.workers : worker_count();
}

}  // namespace detail

inline ExperimentResult run_bias_variance(const ExperimentSpec& spec) {
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result;
  result.spec = spec;
  const std::size_t workers = detail::wave_size(spec);
  const Grid grid = make_grid(spec.p, 0.0, 1.0);
  const auto p = static_cast<Eigen::Index>(spec.p);

  for (DgpKind kind : spec.dgps) {
    for (std::size_t n : spec.ns) {
      DgpConfig cfg;
      cfg.kind = kind;
      cfg.n = n;
      cfg.p = spec.p;
      const Vector mu = true_mean_on(grid, cfg);
      const Matrix sigma = true_cov_on(grid, cfg);

      detail::CellMoments m_classical(p), m_ftc(p), c_classical(p * p), c_ftc(p * p);
      std::vector<detail::ReplicationEstimates> wave;
      for (std::size_t first = 0; first < spec.replications; first += workers) {
        const std::size_t count = std::min(workers, spec.replications - first);
        wave.assign(count, {});
        parallel_for(count, workers, [&](std::size_t k) {
          DgpConfig c = cfg;
          c.seed = replication_seed(spec.seed, kind, n, first + k);
          const DgpDraw draw = draw_sample(c);
          const SampleDerivatives d(draw.sample, 1);
          auto& out = wave[k];
          out.mean_classical = mean_est(d, 0).values;
          out.mean_ftc = ftc_mean(d).values;
          if (spec.include_cov) {
            out.cov_classical = cov_est(d, 0, 0).values;
            out.cov_ftc = ftc_cov(d).values;
          }
        });
        for (const auto& e : wave) {
          m_classical.add(e.mean_classical.data());
          m_ftc.add(e.mean_ftc.data());
          if (spec.include_cov) {
            c_classical.add(e.cov_classical.data());
            c_ftc.add(e.cov_ftc.data());
          }
        }
      }

      const bool degenerate = spec.replications == 1;
      auto mean_row = [&](const detail::CellMoments& m, const char* name) {
        const auto s = m.summarize(mu.data(), spec.replications);
        return BiasVarianceRow{kind, n, name, integrate(s.bias_sq, grid), integrate(s.variance, grid),
                               s.excluded_fraction, degenerate};
      };
      auto cov_row = [&](const detail::CellMoments& m, const char* name) {
        const auto s = m.summarize(sigma.data(), spec.replications);
        const Eigen::Map<const Matrix> b(s.bias_sq.data(), p, p), v(s.variance.data(), p, p);
        return BiasVarianceRow{kind, n, name, integrate2d(b, grid), integrate2d(v, grid), s.excluded_fraction,
                               degenerate};
      };
      result.bias_variance.push_back(mean_row(m_ftc, "mean_ftc"));
      result.bias_variance.push_back(mean_row(m_classical, "mean_classical"));
      if (spec.include_cov) {
        result.bias_variance.push_back(cov_row(c_ftc, "cov_ftc"));
        result.bias_variance.push_back(cov_row(c_classical, "cov_classical"));
      }
    }
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

inline ExperimentResult run_test_selection(const ExperimentSpec& spec) {
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result;
  result.spec = spec;
  const std::size_t workers = detail::wave_size(spec);

  for (DgpKind kind : spec.dgps) {
    for (std::size_t n : spec.ns) {
      // -1 marks a replication aborted by a numerical error.
      std::vector<int> outcomes(spec.replications, -1);
      parallel_for(spec.replications, workers, [&](std::size_t r) {
        DgpConfig c;
        c.kind = kind;
        c.n = n;
        c.p = spec.p;
        c.seed = replication_seed(spec.seed, kind, n, r);
        const DgpDraw draw = draw_sample(c);
        try {
          const TestReport rep =
              classify_and_test(draw.sample, spec.j_max, spec.alpha, spec.bootstrap, derive_seed(c.seed, 77));
          outcomes[r] = static_cast<int>(rep.outcome);
        } catch (const NumericalError&) {
          outcomes[r] = -1;
        }
      });
      SelectionRow row{kind, n};
      std::size_t counts[3] = {0, 0, 0};
      for (int o : outcomes) {
        if (o < 0)
          ++row.failures;
        else
          ++counts[o];
      }
      const double ok = static_cast<double>(spec.replications - row.failures);
      if (ok > 0) {
        row.null_pct = 100.0 * static_cast<double>(counts[0]) / ok;
        row.v_pct = 100.0 * static_cast<double>(counts[1]) / ok;
        row.other_pct = 100.0 * static_cast<double>(counts[2]) / ok;
      }
      result.selection.push_back(row);
    }
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
  return spec.mode == ExperimentMode::BiasVariance ? run_bias_variance(spec) : run_test_selection(spec);
}

/// Self-describing CSV: `# key=value` lines for every spec field, then the
/// table. Timing is not written so equal specs give byte-identical files.
inline void write_result(std::ostream& os, const ExperimentResult& r) {
  const ExperimentSpec& s = r.spec;
  os << "# mode=" << to_string(s.mode) << '\n' << "# dgp=";
  for (std::size_t k = 0; k < s.dgps.size(); ++k) os << (k ? "," : "") << to_string(s.dgps[k]);
  os << "\n# n=";
  for (std::size_t k = 0; k < s.ns.size(); ++k) os << (k ? "," : "") << s.ns[k];
  os << "\n# reps=" << s.replications << "\n# p=" << s.p << "\n# j_max=" << s.j_max
     << "\n# alpha=" << csv::format_double(s.alpha) << "\n# bootstrap=" << s.bootstrap << "\n# seed=" << s.seed
     << "\n# cov=" << (s.include_cov ? 1 : 0) << '\n';
  if (s.mode == ExperimentMode::BiasVariance) {
    os << "dgp,n,estimator,bias,variance,excluded_fraction,degenerate\n";
    for (const auto& row : r.bias_variance)
      os << to_string(row.dgp) << ',' << row.n << ',' << row.estimator << ',' << csv::format_double(row.bias) << ','
         << csv::format_double(row.variance) << ',' << csv::format_double(row.excluded_fraction) << ','
         << (row.degenerate ? 1 : 0) << '\n';
  } else {
    os << "dgp,n,null_pct,v_pct,other_pct,failures\n";
    for (const auto& row : r.selection)
      os << to_string(row.dgp) << ',' << row.n << ',' << csv::format_double(row.null_pct) << ','
         << csv::format_double(row.v_pct) << ',' << csv::format_double(row.other_pct) << ',' << row.failures << '\n';
  }
}

}  // namespace pofd

#endif  // POFD_EXPERIMENT_HPP
