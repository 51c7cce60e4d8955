#pragma once

// Experiment runner: problems x methods x noise levels x seeds (x stepsizes
// for the non-adaptive scheme), with CSV / JSON persistence and summaries.

#include <cstdint>
#include <functional>
#include <optional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "stosqp/adaptive.hpp"
#include "stosqp/local.hpp"

namespace stosqp::bench {

enum class Method { AdaptiveNewton, AdaptiveGd, NonAdaptive };

std::string_view method_name(Method m);
/// Throws std::invalid_argument for unknown names.
Method parse_method(std::string_view name);

/// "0.5" for a constant step, "t^-0.6" for a decaying one.
std::string stepsize_spec(const Stepsize& s);
Stepsize parse_stepsize(std::string_view spec);

std::vector<Stepsize> default_stepsizes();
std::vector<double> default_sigma2_levels();

struct ExperimentPlan {
  std::vector<std::string> problems;
  std::vector<Method> methods;
  std::vector<double> sigma2_levels;
  std::vector<std::uint64_t> seeds;
  std::vector<Stepsize> stepsizes;
  int max_iters = 100000;
  double tol = 1e-5;
  SamplingMode sampling = SamplingMode::Aggregated;
  int jobs = 1;

  /// Full default protocol over the built-in suite.
  static ExperimentPlan defaults();
  /// Throws std::invalid_argument for empty lists or unknown problem names.
  void validate() const;
};

struct Cell {
  std::string problem;
  Method method = Method::AdaptiveNewton;
  double sigma2 = 0.0;
  std::uint64_t seed = 0;
  std::optional<Stepsize> stepsize;  // non-adaptive only
};

/// Cells in output order: problem, method, sigma2, seed, stepsize.
std::vector<Cell> enumerate_cells(const ExperimentPlan& plan);

struct ResultRow {
  std::string problem;
  std::string method;
  double sigma2 = 0.0;
  std::uint64_t seed = 0;
  std::string stepsize;  // empty for adaptive methods
  std::string status;
  int iters = 0;
  double terminal_kkt_residual = 0.0;
  double terminal_alpha = 0.0;
  double eps_final = 0.0;
  double nu_final = 0.0;
  std::int64_t total_samples = 0;
  double wallclock_ms = 0.0;

  bool operator==(const ResultRow&) const = default;
};

/// Runs a single cell; `trace_out`, when non-null, receives the full trace.
ResultRow run_cell(const Cell& cell, const ExperimentPlan& plan, RunTrace* trace_out = nullptr);

/// Runs every cell (up to plan.jobs concurrently). `on_row` is invoked in plan
/// order as soon as the ordered prefix of finished rows grows.
std::vector<ResultRow> run_plan(const ExperimentPlan& plan,
                                const std::function<void(const ResultRow&)>& on_row = {});

inline constexpr std::string_view kCsvHeader =
    "problem,method,sigma2,seed,stepsize,status,iters,terminal_kkt_residual,terminal_alpha,eps_final,nu_final,"
    "total_samples,wallclock_ms";

/// Shortest round-trip decimal representation.
std::string format_double(double v);

std::string csv_line(const ResultRow& row);
void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);
/// Throws std::runtime_error on malformed input.
std::vector<ResultRow> parse_csv(std::istream& is);

std::string to_json(const std::vector<ResultRow>& rows);
std::vector<ResultRow> from_json(const std::string& text);

bool is_converged_status(std::string_view status);

struct SummaryRow {
  std::string method;
  double sigma2 = 0.0;
  std::size_t count = 0;
  double median_residual = 0.0;
  double q1_residual = 0.0;
  double q3_residual = 0.0;
  double convergence_rate = 0.0;
  double median_wallclock_ms = 0.0;
};

/// Per (method, sigma2), in first-appearance order.
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& summary);

/// Linear-interpolation quantile (p in [0, 1]) of an unsorted sample.
double quantile(std::vector<double> values, double p);

}  // namespace stosqp::bench
