#include "stosqp/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "stosqp/suite.hpp"

namespace stosqp::bench {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::AdaptiveNewton:
      return "adaptive-newton";
    case Method::AdaptiveGd:
      return "adaptive-gd";
    case Method::NonAdaptive:
      return "nonadaptive";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::AdaptiveNewton, Method::AdaptiveGd, Method::NonAdaptive}) {
    if (method_name(m) == name) return m;
  }
  throw std::invalid_argument("unknown method: " + std::string(name));
}

namespace {

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  }
  return v;
}

template <typename Int>
Int parse_int(std::string_view s) {
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
  }
  return v;
}

constexpr std::string_view kDecayPrefix = "t^-";

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

std::string stepsize_spec(const Stepsize& s) {
  if (const auto* c = std::get_if<ConstStep>(&s)) return format_double(c->alpha);
  return std::string(kDecayPrefix) + format_double(std::get<DecayStep>(s).exponent);
}

Stepsize parse_stepsize(std::string_view spec) {
  if (spec.substr(0, kDecayPrefix.size()) == kDecayPrefix) {
    return DecayStep{parse_double(spec.substr(kDecayPrefix.size()))};
  }
  return ConstStep{parse_double(spec)};
}

std::vector<Stepsize> default_stepsizes() {
  return {ConstStep{0.01}, ConstStep{0.1}, ConstStep{0.5}, ConstStep{1.0}, DecayStep{0.6}, DecayStep{0.9}};
}

std::vector<double> default_sigma2_levels() { return {1e-8, 1e-4, 1e-2, 1e-1, 1.0}; }

ExperimentPlan ExperimentPlan::defaults() {
  ExperimentPlan plan;
  plan.problems = builtin_problem_names();
  plan.methods = {Method::AdaptiveNewton, Method::AdaptiveGd, Method::NonAdaptive};
  plan.sigma2_levels = default_sigma2_levels();
  plan.seeds = {1, 2, 3, 4, 5};
  plan.stepsizes = default_stepsizes();
  return plan;
}

void ExperimentPlan::validate() const {
  if (problems.empty()) throw std::invalid_argument("plan has no problems");
  if (methods.empty()) throw std::invalid_argument("plan has no methods");
  if (sigma2_levels.empty()) throw std::invalid_argument("plan has no noise levels");
  if (seeds.empty()) throw std::invalid_argument("plan has no seeds");
  for (const auto& name : problems) (void)find_problem(name);
  for (double s2 : sigma2_levels) {
    if (!(s2 >= 0.0) || !std::isfinite(s2)) throw std::invalid_argument("noise variance must be finite and >= 0");
  }
  if (std::find(methods.begin(), methods.end(), Method::NonAdaptive) != methods.end() && stepsizes.empty()) {
    throw std::invalid_argument("nonadaptive method requires at least one stepsize");
  }
  for (const auto& s : stepsizes) {
    LocalConfig probe;
    probe.stepsize = s;
    probe.validate();
  }
  if (max_iters < 0) throw std::invalid_argument("max_iters must be nonnegative");
  if (!(tol >= 0.0)) throw std::invalid_argument("tol must be nonnegative");
  if (jobs < 1) throw std::invalid_argument("jobs must be at least 1");
}

std::vector<Cell> enumerate_cells(const ExperimentPlan& plan) {
  std::vector<Cell> cells;
  for (const auto& problem : plan.problems) {
    for (Method method : plan.methods) {
      for (double sigma2 : plan.sigma2_levels) {
        for (std::uint64_t seed : plan.seeds) {
          if (method == Method::NonAdaptive) {
            for (const auto& s : plan.stepsizes) cells.push_back({problem, method, sigma2, seed, s});
          } else {
            cells.push_back({problem, method, sigma2, seed, std::nullopt});
          }
        }
      }
    }
  }
  return cells;
}

ResultRow run_cell(const Cell& cell, const ExperimentPlan& plan, RunTrace* trace_out) {
  const ProblemDef problem = find_problem(cell.problem);
  const NoiseModel noise{cell.sigma2, cell.seed, plan.sampling};

  const auto start = std::chrono::steady_clock::now();
  RunTrace trace;
  if (cell.method == Method::NonAdaptive) {
    if (!cell.stepsize) throw std::invalid_argument("nonadaptive cell without a stepsize");
    LocalConfig cfg;
    cfg.stepsize = *cell.stepsize;
    cfg.max_iters = plan.max_iters;
    cfg.tol = plan.tol;
    trace = run_local(problem, noise, cfg);
  } else {
    AdaptiveConfig cfg;
    cfg.fallback = cell.method == Method::AdaptiveNewton ? FallbackKind::RegNewton : FallbackKind::SteepestDescent;
    cfg.max_iters = plan.max_iters;
    cfg.tol = plan.tol;
    trace = run_adaptive(problem, noise, cfg);
  }
  const auto stop = std::chrono::steady_clock::now();

  ResultRow row;
  row.problem = cell.problem;
  row.method = std::string(method_name(cell.method));
  row.sigma2 = cell.sigma2;
  row.seed = cell.seed;
  row.stepsize = cell.stepsize ? stepsize_spec(*cell.stepsize) : std::string();
  row.status = to_string(trace.status);
  row.iters = trace.iterations;
  row.terminal_kkt_residual = trace.terminal_kkt_residual;
  row.terminal_alpha = trace.terminal_alpha;
  row.eps_final = trace.eps_final;
  row.nu_final = trace.nu_final;
  row.total_samples = trace.total_samples;
  row.wallclock_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  if (trace_out) *trace_out = std::move(trace);
  return row;
}

std::vector<ResultRow> run_plan(const ExperimentPlan& plan, const std::function<void(const ResultRow&)>& on_row) {
  plan.validate();
  const std::vector<Cell> cells = enumerate_cells(plan);
  const auto n = static_cast<std::int64_t>(cells.size());
  std::vector<ResultRow> rows(cells.size());
  std::vector<char> done(cells.size(), 0);
  std::size_t emitted = 0;

  // Rows are emitted in plan order: each finisher flushes the ready prefix.
#pragma omp parallel for schedule(dynamic, 1) num_threads(plan.jobs)
  for (std::int64_t i = 0; i < n; ++i) {
    ResultRow row = run_cell(cells[static_cast<std::size_t>(i)], plan);
#pragma omp critical(stosqp_run_plan)
    {
      rows[static_cast<std::size_t>(i)] = std::move(row);
      done[static_cast<std::size_t>(i)] = 1;
      while (emitted < rows.size() && done[emitted]) {
        if (on_row) on_row(rows[emitted]);
        ++emitted;
      }
    }
  }
  return rows;
}

std::string csv_line(const ResultRow& row) {
  std::string out;
  out += row.problem;
  out += ',' + row.method;
  out += ',' + format_double(row.sigma2);
  out += ',' + std::to_string(row.seed);
  out += ',' + row.stepsize;
  out += ',' + row.status;
  out += ',' + std::to_string(row.iters);
  out += ',' + format_double(row.terminal_kkt_residual);
  out += ',' + format_double(row.terminal_alpha);
  out += ',' + format_double(row.eps_final);
  out += ',' + format_double(row.nu_final);
  out += ',' + std::to_string(row.total_samples);
  out += ',' + format_double(row.wallclock_ms);
  return out;
}

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << kCsvHeader << '\n';
  for (const auto& row : rows) os << csv_line(row) << '\n';
}

std::vector<ResultRow> parse_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw std::runtime_error("CSV: missing or unexpected header");
  std::vector<ResultRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      f.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (f.size() != 13) throw std::runtime_error("CSV: wrong field count on line " + std::to_string(lineno));
    try {
      ResultRow row;
      row.problem = f[0];
      row.method = f[1];
      row.sigma2 = parse_double(f[2]);
      row.seed = parse_int<std::uint64_t>(f[3]);
      row.stepsize = f[4];
      row.status = f[5];
      row.iters = parse_int<int>(f[6]);
      row.terminal_kkt_residual = parse_double(f[7]);
      row.terminal_alpha = parse_double(f[8]);
      row.eps_final = parse_double(f[9]);
      row.nu_final = parse_double(f[10]);
      row.total_samples = parse_int<std::int64_t>(f[11]);
      row.wallclock_ms = parse_double(f[12]);
      rows.push_back(std::move(row));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("CSV line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

namespace {

// JSON has no NaN / infinity; such values travel as null.
nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

double number_from(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

std::string to_json(const std::vector<ResultRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"problem", r.problem},
                   {"method", r.method},
                   {"sigma2", number_or_null(r.sigma2)},
                   {"seed", r.seed},
                   {"stepsize", r.stepsize},
                   {"status", r.status},
                   {"iters", r.iters},
                   {"terminal_kkt_residual", number_or_null(r.terminal_kkt_residual)},
                   {"terminal_alpha", number_or_null(r.terminal_alpha)},
                   {"eps_final", number_or_null(r.eps_final)},
                   {"nu_final", number_or_null(r.nu_final)},
                   {"total_samples", r.total_samples},
                   {"wallclock_ms", number_or_null(r.wallclock_ms)}});
  }
  return arr.dump(2);
}

std::vector<ResultRow> from_json(const std::string& text) {
  const auto arr = nlohmann::json::parse(text);
  std::vector<ResultRow> rows;
  for (const auto& j : arr) {
    ResultRow r;
    r.problem = j.at("problem").get<std::string>();
    r.method = j.at("method").get<std::string>();
    r.sigma2 = number_from(j.at("sigma2"));
    r.seed = j.at("seed").get<std::uint64_t>();
    r.stepsize = j.at("stepsize").get<std::string>();
    r.status = j.at("status").get<std::string>();
    r.iters = j.at("iters").get<int>();
    r.terminal_kkt_residual = number_from(j.at("terminal_kkt_residual"));
    r.terminal_alpha = number_from(j.at("terminal_alpha"));
    r.eps_final = number_from(j.at("eps_final"));
    r.nu_final = number_from(j.at("nu_final"));
    r.total_samples = j.at("total_samples").get<std::int64_t>();
    r.wallclock_ms = number_from(j.at("wallclock_ms"));
    rows.push_back(std::move(r));
  }
  return rows;
}

bool is_converged_status(std::string_view status) {
  return status == to_string(RunStatus::Converged) || status == to_string(RunStatus::ConvergedByBatchCap);
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  std::vector<std::pair<std::string, double>> order;
  std::map<std::pair<std::string, double>, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows) {
    auto key = std::make_pair(r.method, r.sigma2);
    auto& g = groups[key];
    if (g.empty()) order.push_back(key);
    g.push_back(&r);
  }

  std::vector<SummaryRow> out;
  for (const auto& key : order) {
    const auto& g = groups[key];
    std::vector<double> res;
    std::vector<double> wall;
    std::size_t converged = 0;
    for (const ResultRow* r : g) {
      res.push_back(r->terminal_kkt_residual);
      wall.push_back(r->wallclock_ms);
      if (is_converged_status(r->status)) ++converged;
    }
    SummaryRow s;
    s.method = key.first;
    s.sigma2 = key.second;
    s.count = g.size();
    s.median_residual = quantile(res, 0.5);
    s.q1_residual = quantile(res, 0.25);
    s.q3_residual = quantile(res, 0.75);
    s.convergence_rate = static_cast<double>(converged) / static_cast<double>(g.size());
    s.median_wallclock_ms = quantile(wall, 0.5);
    out.push_back(s);
  }
  return out;
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& summary) {
  os << "method,sigma2,count,median_residual,q1_residual,q3_residual,convergence_rate,median_wallclock_ms\n";
  for (const auto& s : summary) {
    os << s.method << ',' << format_double(s.sigma2) << ',' << s.count << ',' << format_double(s.median_residual)
       << ',' << format_double(s.q1_residual) << ',' << format_double(s.q3_residual) << ','
       << format_double(s.convergence_rate) << ',' << format_double(s.median_wallclock_ms) << '\n';
  }
}

}  // namespace stosqp::bench
