#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lamplighter/config.hpp"
#include "lamplighter/csv.hpp"
#include "lamplighter/error.hpp"
#include "lamplighter/exact.hpp"
#include "lamplighter/lamp_group.hpp"
#include "lamplighter/montecarlo.hpp"
#include "lamplighter/rooted_graph.hpp"
#include "lamplighter/stats.hpp"
#include "lamplighter/verify.hpp"

namespace lamplighter::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitTruncation = 3,
  kExitBudget = 4,
};

struct CommandResult {
  int exit_code = kExitOk;
  std::string csv;
  std::string message;
};

namespace detail {

inline double parse_probability(const std::string& text) {
  if (auto slash = text.find('/'); slash != std::string::npos) {
    const double num = ExperimentConfig::parse_real("measure", text.substr(0, slash));
    const double den = ExperimentConfig::parse_real("measure", text.substr(slash + 1));
    if (den == 0.0) throw ConfigError("zero denominator in measure");
    return num / den;
  }
  return ExperimentConfig::parse_real("measure", text);
}

inline SwitchMeasure parse_measure(const LampGroup& group, const std::string& text) {
  std::vector<SwitchAtom> atoms;
  for (const auto& item : ExperimentConfig::split(text, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("measure entries are element:probability");
    atoms.push_back({ExperimentConfig::parse_integer("measure", item.substr(0, colon)),
                     parse_probability(item.substr(colon + 1))});
  }
  return SwitchMeasure(group, std::move(atoms));
}

inline LampGroup lamp_group(const ExperimentConfig& cfg, const std::string& default_kind = "cyclic") {
  const std::string kind = cfg.text_or("lamp-group", default_kind);
  if (kind == "cyclic") return LampGroup::cyclic(cfg.integer_or("lamp", 2));
  if (kind == "integers") return LampGroup::integers();
  throw ConfigError("lamp-group must be cyclic or integers");
}

/// Uniform on a cyclic group unless a measure is given.
inline SwitchMeasure switch_measure(const ExperimentConfig& cfg) {
  const LampGroup group = lamp_group(cfg);
  if (auto text = cfg.text("measure")) return parse_measure(group, *text);
  return make_uniform_measure(group);
}

/// lambda from exactly one of `p` and `lambda`.
inline double homesick_lambda(const ExperimentConfig& cfg) {
  const auto p = cfg.real("p");
  const auto lambda = cfg.real("lambda");
  if (p && lambda) throw ConfigError("give either p or lambda, not both");
  if (p) return BiasParams::from_p(*p).lambda();
  if (lambda) return BiasParams::from_lambda(*lambda).lambda();
  throw ConfigError("missing required option 'p' or 'lambda'");
}

inline double drift(const ExperimentConfig& cfg) {
  const auto p = cfg.real("p");
  const auto lambda = cfg.real("lambda");
  if (p && lambda) throw ConfigError("give either p or lambda, not both");
  if (p) return BiasParams::from_p(*p).p();
  if (lambda) return BiasParams::from_lambda(*lambda).p();
  throw ConfigError("missing required option 'p' or 'lambda'");
}

inline mc::GraphSpec graph_spec(const ExperimentConfig& cfg) {
  const std::string kind = cfg.text_or("graph", "line");
  if (kind == "line") return mc::GraphSpec::line();
  if (kind == "gamma_m") {
    const auto m = cfg.integer_or("m", 3);
    if (m < 2 || m > 1000) throw ConfigError("gamma_m needs 2 <= m <= 1000");
    return mc::GraphSpec::gamma(static_cast<int>(m));
  }
  if (kind == "edges") return mc::GraphSpec::edge_list(cfg.required_text("edges"));
  throw ConfigError("graph must be line, gamma_m or edges");
}

inline std::optional<int> radius(const ExperimentConfig& cfg) {
  auto r = cfg.integer("radius");
  if (!r) return std::nullopt;
  if (*r < 1 || *r > 100000000) throw ConfigError("radius out of range");
  return static_cast<int>(*r);
}

inline mc::Estimator estimator(const ExperimentConfig& cfg) {
  const std::string name = cfg.text_or("estimator", "indicator");
  if (name == "indicator") return mc::Estimator::indicator;
  if (name == "conditional") return mc::Estimator::conditional;
  throw ConfigError("estimator must be indicator or conditional");
}

inline std::uint64_t replicas(const ExperimentConfig& cfg, std::uint64_t fallback) {
  const auto n = cfg.count_or("replicas", fallback);
  if (n < 1) throw ConfigError("replicas must be >= 1");
  return n;
}

inline std::uint64_t budget(const ExperimentConfig& cfg) {
  const auto b = cfg.count_or("budget", kDefaultStepBudget);
  if (b < 1) throw ConfigError("budget must be >= 1");
  return b;
}

inline double tolerance(const ExperimentConfig& cfg, double fallback) {
  const double tol = cfg.real_or("tol", fallback);
  if (!(tol > 0.0)) throw ConfigError("tol must be positive");
  return tol;
}

inline int radius_at_least(const std::optional<int>& given, int needed) {
  if (given && *given < needed) throw ConfigError("radius too small for the requested query");
  return given.value_or(needed);
}

// Phase of the stationary walk on a cyclic lamp group over Z.
inline std::string regime(double lambda, std::int64_t order) {
  const double two_alpha = 2.0 * std::log(static_cast<double>(order)) / std::log(lambda);
  if (std::abs(two_alpha - 1.0) < 1e-9) return "critical-exploratory";
  return two_alpha > 1.0 ? "subcritical" : "supercritical";
}

inline bool uniform_on_line(const mc::GraphSpec& graph, const SwitchMeasure& measure) {
  return graph.kind == mc::GraphSpec::Kind::line && measure.is_uniform() &&
         measure.group().order() >= 2;
}

inline void flag_aborts(CommandResult& result, csv::Writer& out, std::uint64_t truncation,
                        std::uint64_t budget_aborts) {
  if (truncation + budget_aborts == 0) return;
  out.comment("partial: " + std::to_string(truncation) + " replicas hit the truncation boundary, " +
              std::to_string(budget_aborts) + " exceeded the step budget");
  result.exit_code = truncation > 0 ? kExitTruncation : kExitBudget;
  result.message = "partial output: some replicas aborted";
}

using Handler = std::function<void(const ExperimentConfig&, std::ostream&, CommandResult&)>;

// --- simulate ---------------------------------------------------------------

inline void simulate_returns(const ExperimentConfig& cfg, std::ostream& os, CommandResult& result) {
  const auto ks = cfg.required_counts("k");
  const mc::WalkConfig walk{graph_spec(cfg), homesick_lambda(cfg), switch_measure(cfg), budget(cfg),
                            radius(cfg)};
  const auto n = replicas(cfg, 10000);
  const auto seed = cfg.count_or("seed", 1);
  const auto method = estimator(cfg);
  const bool has_exact = uniform_on_line(walk.graph, walk.measure);
  const double tol = has_exact ? tolerance(cfg, exact::kDefaultSeriesTolerance) : 0.0;
  cfg.reject_unused();

  const auto estimates = mc::estimate_return_probs(ks, walk, n, seed, method);
  csv::Writer out(os, cfg.hash(),
                  {"config_hash", "seed", "graph", "lambda", "lamp", "k", "estimate", "stderr",
                   "replicas", "successes", "truncation_aborts", "budget_aborts", "inconclusive",
                   "exact"});
  std::optional<exact::ExcursionSeriesTable> table;
  if (has_exact) table.emplace(walk.lambda, walk.measure.group().order(), tol);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const auto& e = estimates[i];
    const double exact_value =
        table ? exact::ret_prob_at_rho_k(ks[i], *table) : std::numeric_limits<double>::quiet_NaN();
    out.row(cfg.hash(), seed, walk.graph.describe(), walk.lambda, walk.measure.group().describe(),
            ks[i], e.estimate, e.std_error, e.replicas, e.successes, e.truncation_aborts,
            e.budget_aborts, e.inconclusive, exact_value);
  }
  flag_aborts(result, out, estimates.front().truncation_aborts, estimates.front().budget_aborts);
}

inline void simulate_local_time(const ExperimentConfig& cfg, std::ostream& os, CommandResult& result) {
  const auto ns = cfg.required_counts("n");
  const mc::WalkConfig walk{graph_spec(cfg), homesick_lambda(cfg), switch_measure(cfg),
                            kDefaultStepBudget, radius(cfg)};
  const auto n = replicas(cfg, 1000);
  const auto seed = cfg.count_or("seed", 1);
  cfg.reject_unused();

  const std::string phase = uniform_on_line(walk.graph, walk.measure)
                                ? regime(walk.lambda, walk.measure.group().order())
                                : "unknown";
  const auto estimates = mc::estimate_local_times(ns, walk, n, seed);
  csv::Writer out(os, cfg.hash(),
                  {"config_hash", "seed", "graph", "lambda", "lamp", "n", "estimate", "stderr",
                   "replicas", "truncation_aborts", "budget_aborts", "inconclusive", "regime"});
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const auto& e = estimates[i];
    out.row(cfg.hash(), seed, walk.graph.describe(), walk.lambda, walk.measure.group().describe(),
            ns[i], e.estimate, e.std_error, e.replicas, e.truncation_aborts, e.budget_aborts,
            e.inconclusive, phase);
  }
  if (phase == "critical-exploratory")
    out.comment("exploratory: critical drift, recurrence at criticality is not settled");
  flag_aborts(result, out, estimates.front().truncation_aborts, estimates.front().budget_aborts);
}

inline void simulate_trajectories(const ExperimentConfig& cfg, std::ostream& os,
                                  CommandResult& result) {
  const auto k = cfg.required_count("k");
  const mc::WalkConfig walk{graph_spec(cfg), homesick_lambda(cfg), switch_measure(cfg), budget(cfg),
                            radius(cfg)};
  const auto n = replicas(cfg, 100);
  const auto seed = cfg.count_or("seed", 1);
  cfg.reject_unused();

  const auto batch = mc::simulate_trajectories(k, walk, n, seed);
  csv::Writer out(os, cfg.hash(),
                  {"config_hash", "seed", "replica", "replica_seed", "k", "rho_k", "m_plus",
                   "m_minus", "max_distance", "n_plus", "range", "identity_returns"});
  for (const auto& r : batch.rows)
    out.row(cfg.hash(), seed, r.replica, r.seed, r.k, r.return_time, r.max_projection,
            r.min_projection, r.max_distance, r.positive, r.range_size, r.identity_returns);
  flag_aborts(result, out, batch.aborts.truncation, batch.aborts.budget);
}

// --- exact ------------------------------------------------------------------

inline std::int64_t lamp_order(const ExperimentConfig& cfg) {
  const auto order = cfg.integer_or("lamp", 2);
  exact::require_lamp_order(order);
  return order;
}

inline void exact_phase_params(const ExperimentConfig& cfg, std::ostream& os, CommandResult&) {
  const double p = drift(cfg);
  const auto order = lamp_order(cfg);
  cfg.reject_unused();
  const auto pp = exact::phase_params(p, order);
  csv::Writer out(os, cfg.hash(),
                  {"config_hash", "p", "lambda", "lamp", "alpha", "critical_p", "mean_return_time",
                   "mgf_abscissa", "regime"});
  out.row(cfg.hash(), pp.p, pp.lambda, pp.lamp_order, pp.alpha, pp.critical_p, pp.mean_return_time,
          pp.mgf_abscissa, regime(pp.lambda, order));
}

inline void exact_extremes(const ExperimentConfig& cfg, std::ostream& os, CommandResult&) {
  const auto mplus = cfg.required_integer("mplus");
  const auto mminus = cfg.required_integer("mminus");
  const auto order = lamp_order(cfg);
  cfg.reject_unused();
  const double value = exact::ret_prob_given_extremes(mplus, mminus, order);
  csv::Writer out(os, cfg.hash(), {"config_hash", "mplus", "mminus", "lamp", "value", "truncation_point"});
  out.row(cfg.hash(), mplus, mminus, order, value, "");
}

inline void exact_max_cdf(const ExperimentConfig& cfg, std::ostream& os, CommandResult&) {
  const auto xs = cfg.required_counts("x");
  const double lambda = homesick_lambda(cfg);
  cfg.reject_unused();
  csv::Writer out(os, cfg.hash(), {"config_hash", "x", "lambda", "value", "truncation_point"});
  for (auto x : xs)
    out.row(cfg.hash(), x, lambda, exact::max_excursion_cdf(static_cast<std::int64_t>(x), lambda), "");
}

inline void exact_series(const ExperimentConfig& cfg, std::ostream& os, CommandResult&) {
  const auto ms = cfg.required_counts("count");
  const double lambda = homesick_lambda(cfg);
  const auto order = lamp_order(cfg);
  const double tol = tolerance(cfg, exact::kDefaultSeriesTolerance);
  cfg.reject_unused();
  csv::Writer out(os, cfg.hash(), {"config_hash", "count", "lambda", "lamp", "tol", "value", "truncation_point"});
  for (auto m : ms) {
    const auto s = exact::excursion_series(m, lambda, order, tol);
    out.row(cfg.hash(), m, lambda, order, tol, s.value, s.truncation_point);
  }
}

inline void exact_nplus(const ExperimentConfig& cfg, std::ostream& os, CommandResult&) {
  const auto k = cfg.required_count("k");
  const auto m = cfg.required_count("m-pos");
  const double lambda = homesick_lambda(cfg);
  const auto order = lamp_order(cfg);
  const double tol = tolerance(cfg, exact::kDefaultSeriesTolerance);
  cfg.reject_unused();
  const double value = exact::ret_prob_given_nplus(k, m, lambda, order, tol);
  csv::Writer out(os, cfg.hash(),
                  {"config_hash", "k", "m_pos", "lambda", "lamp", "tol", "value", "truncation_point"});
  out.row(cfg.hash(), k, m, lambda, order, tol, value, "");
}

inline void exact_ret_prob(const ExperimentConfig& cfg, std::ostream& os, CommandResult&) {
  const auto ks = cfg.required_counts("k");
  const double lambda = homesick_lambda(cfg);
  const auto order = lamp_order(cfg);
  const double tol = tolerance(cfg, exact::kDefaultSeriesTolerance);
  cfg.reject_unused();
  exact::ExcursionSeriesTable table(lambda, order, tol);
  csv::Writer out(os, cfg.hash(), {"config_hash", "k", "lambda", "lamp", "tol", "value", "truncation_point"});
  for (auto k : ks) out.row(cfg.hash(), k, lambda, order, tol, exact::ret_prob_at_rho_k(k, table), "");
}

inline void exact_partial_sum(const ExperimentConfig& cfg, std::ostream& os, CommandResult&) {
  const auto ks = cfg.required_counts("k");
  const double lambda = homesick_lambda(cfg);
  const auto order = lamp_order(cfg);
  const double tol = tolerance(cfg, exact::kDefaultSeriesTolerance);
  cfg.reject_unused();
  exact::ExcursionSeriesTable table(lambda, order, tol);
  csv::Writer out(os, cfg.hash(), {"config_hash", "k", "lambda", "lamp", "tol", "value", "truncation_point"});
  std::vector<std::uint64_t> sorted = ks;
  std::sort(sorted.begin(), sorted.end());
  std::map<std::uint64_t, double> sums;
  double sum = 1.0;
  std::uint64_t j = 0;
  for (auto k : sorted) {
    for (; j < k; ++j) sum += exact::ret_prob_at_rho_k(j + 1, table);
    sums[k] = sum;
  }
  for (auto k : ks) out.row(cfg.hash(), k, lambda, order, tol, sums[k], "");
}

inline void exact_rho1_pmf(const ExperimentConfig& cfg, std::ostream& os, CommandResult&) {
  const auto ts = cfg.required_counts("t");
  const double p = drift(cfg);
  cfg.reject_unused();
  csv::Writer out(os, cfg.hash(), {"config_hash", "t", "return_time", "p", "value", "truncation_point"});
  for (auto t : ts) out.row(cfg.hash(), t, 2 * t, p, exact::rho1_pmf(t, p), "");
}

inline void exact_mgf(const ExperimentConfig& cfg, std::ostream& os, CommandResult&) {
  const double s = cfg.required_real("s");
  const double p = drift(cfg);
  cfg.reject_unused();
  csv::Writer out(os, cfg.hash(), {"config_hash", "s", "p", "value", "truncation_point"});
  out.row(cfg.hash(), s, p, exact::mgf_rho1(s, p), "");
}

inline void exact_expected_rho(const ExperimentConfig& cfg, std::ostream& os, CommandResult&) {
  const auto ks = cfg.required_counts("k");
  const double p = drift(cfg);
  cfg.reject_unused();
  csv::Writer out(os, cfg.hash(), {"config_hash", "k", "p", "value", "truncation_point"});
  for (auto k : ks) out.row(cfg.hash(), k, p, exact::expected_return_time(k, p), "");
}

inline void exact_escape_bound(const ExperimentConfig& cfg, std::ostream& os, CommandResult&) {
  const auto rs = cfg.required_counts("r");
  const double lambda = homesick_lambda(cfg);
  const auto spec = graph_spec(cfg);
  const auto given = radius(cfg);
  cfg.reject_unused();
  const auto r_max = static_cast<int>(*std::max_element(rs.begin(), rs.end()));
  const RootedGraph graph = spec.build(radius_at_least(given, r_max + 1));
  csv::Writer out(os, cfg.hash(), {"config_hash", "graph", "lambda", "r", "value", "truncation_point"});
  for (auto r : rs)
    out.row(cfg.hash(), spec.describe(), lambda, r, exact::escape_prob_bound(graph, lambda, static_cast<int>(r)), "");
}

inline void exact_range_bound(const ExperimentConfig& cfg, std::ostream& os, CommandResult&) {
  const auto k = cfg.required_count("k");
  const double lambda = homesick_lambda(cfg);
  const double c = cfg.real_or("c", 0.5);
  const auto spec = graph_spec(cfg);
  const auto given = radius(cfg);
  cfg.reject_unused();
  exact::require_lambda(lambda);
  const int needed =
      static_cast<int>(std::floor(c * std::log(static_cast<double>(std::max<std::uint64_t>(k, 1))) /
                                  std::log(lambda))) + 1;
  const RootedGraph graph = spec.build(radius_at_least(given, std::max(needed, 2)));
  const auto b = exact::range_lower_tail_bound(k, lambda, graph, c);
  csv::Writer out(os, cfg.hash(), {"config_hash", "graph", "k", "lambda", "c", "n", "value", "truncation_point"});
  out.row(cfg.hash(), spec.describe(), k, lambda, c, b.n, b.bound, "");
}

inline void exact_local_times(const ExperimentConfig& cfg, std::ostream& os, CommandResult&) {
  const std::string text = cfg.required_text("local-times");
  const SwitchMeasure measure = switch_measure(cfg);
  cfg.reject_unused();
  std::vector<std::pair<Vertex, std::uint64_t>> counts;
  if (text != "none") {
    for (const auto& item : ExperimentConfig::split(text, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw ConfigError("local-times entries are vertex:count");
      const auto c = ExperimentConfig::parse_integer("local-times", item.substr(colon + 1));
      if (c < 1) throw ConfigError("local times must be positive");
      counts.emplace_back(static_cast<Vertex>(counts.size()), static_cast<std::uint64_t>(c));
    }
  }
  csv::Writer out(os, cfg.hash(), {"config_hash", "local_times", "measure", "value", "truncation_point"});
  out.row(cfg.hash(), text, measure.group().describe(), exact::ret_prob_given_local_times(counts, measure), "");
}

// --- scan -------------------------------------------------------------------

inline void scan(const ExperimentConfig& cfg, std::ostream& os, CommandResult& result) {
  const auto grid = cfg.required_reals("grid");
  const auto spec = graph_spec(cfg);
  const auto order = lamp_order(cfg);
  mc::PhaseScanOptions options;
  options.k_lo = cfg.count_or("k-lo", options.k_lo);
  options.k_hi = cfg.count_or("k-hi", options.k_hi);
  options.window_points = cfg.count_or("window", options.window_points);
  options.replicas = replicas(cfg, options.replicas);
  options.seed = cfg.count_or("seed", options.seed);
  options.step_budget = budget(cfg);
  options.radius = radius(cfg);
  options.estimator = estimator(cfg);
  cfg.reject_unused();
  if (!std::is_sorted(grid.begin(), grid.end())) throw ConfigError("grid must be sorted");
  if (options.k_lo < 1 || options.k_hi < 10 * options.k_lo)
    throw ConfigError("k window must span at least one decade");
  if (options.window_points < 3) throw ConfigError("window needs at least 3 points");

  const auto res = mc::phase_scan(grid, spec, order, options);
  csv::Writer out(os, cfg.hash(),
                  {"config_hash", "seed", "graph", "lamp", "lambda", "k_lo", "k_hi", "exponent",
                   "exponent_stderr", "points_used", "inconclusive", "side", "bracket_lo",
                   "bracket_hi"});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t truncation = 0, budget_aborts = 0;
  for (const auto& pt : res.points) {
    const std::string side = std::isnan(pt.exponent)   ? "none"
                             : pt.recurrent_side()     ? "recurrent"
                                                       : "transient";
    out.row(cfg.hash(), options.seed, spec.describe(), order, pt.lambda, pt.ks.front(), pt.ks.back(),
            pt.exponent, pt.exponent_stderr, pt.points_used, pt.inconclusive, side,
            res.bracket ? res.bracket->first : nan, res.bracket ? res.bracket->second : nan);
    truncation += pt.estimates.front().truncation_aborts;
    budget_aborts += pt.estimates.front().budget_aborts;
  }
  flag_aborts(result, out, truncation, budget_aborts);
}

// --- verify -----------------------------------------------------------------

inline void verify_uniform(const ExperimentConfig& cfg, std::ostream& os, CommandResult& result) {
  const auto max_len = cfg.integer_or("max-len", 6);
  const auto order = lamp_order(cfg);
  cfg.reject_unused();
  if (max_len < 2 || max_len > 12) throw ConfigError("max-len must lie in [2, 12]");
  const auto cases = verify::uniform_extremes_oracle(static_cast<int>(max_len), order);
  csv::Writer out(os, cfg.hash(),
                  {"config_hash", "path", "length", "max", "min", "draws", "identity_draws",
                   "expected_identity_draws", "lamps_uniform", "pass"});
  std::size_t failed = 0;
  for (const auto& c : cases) {
    out.row(cfg.hash(), verify::path_string(c.path), c.path.size(), c.max_pos, c.min_pos, c.draws,
            c.identity_draws, c.expected_identity_draws, c.lamps_uniform, c.pass());
    failed += !c.pass();
  }
  out.comment(std::string("result=") + (failed ? "FAIL" : "PASS") + " paths=" + std::to_string(cases.size()));
  if (failed) result.exit_code = kExitFailure;
}

inline void verify_measure(const ExperimentConfig& cfg, std::ostream& os, CommandResult& result) {
  const auto max_len = cfg.integer_or("max-len", 4);
  const double tol = tolerance(cfg, 1e-12);
  const SwitchMeasure measure = cfg.has("measure") || cfg.has("lamp-group") || cfg.has("lamp")
                                    ? switch_measure(cfg)
                                    : verify::three_point_integer_measure();
  cfg.reject_unused();
  if (max_len < 2 || max_len > 8) throw ConfigError("max-len must lie in [2, 8]");
  const auto cases = verify::measure_product_oracle(static_cast<int>(max_len), measure);
  csv::Writer out(os, cfg.hash(),
                  {"config_hash", "path", "length", "enumerated", "product", "abs_error", "pass"});
  std::size_t failed = 0;
  for (const auto& c : cases) {
    const bool pass = c.error() <= tol;
    out.row(cfg.hash(), verify::path_string(c.path), c.path.size(), c.enumerated, c.product, c.error(), pass);
    failed += !pass;
  }
  out.comment(std::string("result=") + (failed ? "FAIL" : "PASS") + " paths=" + std::to_string(cases.size()));
  if (failed) result.exit_code = kExitFailure;
}

inline void verify_max_law(const ExperimentConfig& cfg, std::ostream& os, CommandResult& result) {
  const std::vector<double> lambdas =
      cfg.has("lambda") ? cfg.required_reals("lambda") : std::vector<double>{2.0, 4.0};
  const auto samples = replicas(cfg, 100000);
  const auto seed = cfg.count_or("seed", 1);
  const auto step_budget = budget(cfg);
  cfg.reject_unused();
  csv::Writer out(os, cfg.hash(),
                  {"config_hash", "seed", "lambda", "samples", "ks_distance", "critical_value", "pass"});
  std::size_t failed = 0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double lambda = BiasParams::from_lambda(lambdas[i]).lambda();
    const auto maxima = mc::positive_excursion_maxima(lambda, samples, stream_seed(seed, i), step_budget);
    const double d = stats::empirical_cdf_distance_discrete(
        maxima, [&](std::int64_t x) { return x < 0 ? 0.0 : exact::max_excursion_cdf(x, lambda); });
    const double crit = stats::ks_critical_value_001(maxima.size());
    out.row(cfg.hash(), seed, lambda, maxima.size(), d, crit, d < crit);
    failed += !(d < crit);
  }
  out.comment(std::string("result=") + (failed ? "FAIL" : "PASS"));
  if (failed) result.exit_code = kExitFailure;
}

/// P(R_{rho_1} = id | one positive excursion) two ways: from the series and
/// by summing the excursion-maximum law against |F|^-(max + 1).
inline double positive_excursion_identity_by_max_law(double lambda, std::int64_t order, double tol) {
  const auto f = static_cast<double>(order);
  double sum = 0.0;
  double weight = 1.0 / f;  // |F|^-(x+1) at x = 0
  double prev = exact::max_excursion_cdf(0, lambda);
  for (std::int64_t x = 1;; ++x) {
    weight /= f;
    const double cdf = exact::max_excursion_cdf(x, lambda);
    sum += (cdf - prev) * weight;
    prev = cdf;
    if (weight / (f - 1.0) < tol * sum) break;
  }
  return sum;
}

inline void verify_series(const ExperimentConfig& cfg, std::ostream& os, CommandResult& result) {
  const double lambda = cfg.has("p") || cfg.has("lambda") ? homesick_lambda(cfg) : 4.0;
  const auto order = lamp_order(cfg);
  const double tol = tolerance(cfg, 1e-10);
  cfg.reject_unused();
  const double by_series = exact::ret_prob_given_nplus(1, 1, lambda, order, exact::kDefaultSeriesTolerance);
  const double by_law = positive_excursion_identity_by_max_law(lambda, order, 1e-15);
  const double diff = std::abs(by_series - by_law);
  csv::Writer out(os, cfg.hash(),
                  {"config_hash", "lambda", "lamp", "series_value", "max_law_value", "abs_error", "pass"});
  out.row(cfg.hash(), lambda, order, by_series, by_law, diff, diff <= tol);
  out.comment(std::string("result=") + (diff <= tol ? "PASS" : "FAIL"));
  if (!(diff <= tol)) result.exit_code = kExitFailure;
}

inline const std::map<std::string, std::map<std::string, Handler>>& handlers() {
  static const std::map<std::string, std::map<std::string, Handler>> table = {
      {"simulate",
       {{"returns", simulate_returns},
        {"local-time", simulate_local_time},
        {"trajectories", simulate_trajectories}}},
      {"exact",
       {{"phase-params", exact_phase_params},
        {"ret-prob-extremes", exact_extremes},
        {"max-excursion-cdf", exact_max_cdf},
        {"series", exact_series},
        {"ret-prob-nplus", exact_nplus},
        {"ret-prob", exact_ret_prob},
        {"partial-sum", exact_partial_sum},
        {"rho1-pmf", exact_rho1_pmf},
        {"mgf", exact_mgf},
        {"expected-rho", exact_expected_rho},
        {"escape-bound", exact_escape_bound},
        {"range-bound", exact_range_bound},
        {"ret-prob-local-times", exact_local_times}}},
      {"scan", {{"", scan}}},
      {"verify",
       {{"uniform-oracle", verify_uniform},
        {"measure-oracle", verify_measure},
        {"max-law", verify_max_law},
        {"series", verify_series}}},
  };
  return table;
}

}  // namespace detail

/// Alternative operation names, mapped to their primary names.
inline const std::map<std::string, std::string>& operation_aliases() {
  static const std::map<std::string, std::string> table = {
      {"prop2.2", "uniform-oracle"},
      {"prop5.2", "measure-oracle"},
      {"lemma2.3", "max-law"},
  };
  return table;
}

inline std::string resolve_operation(const std::string& command, const std::string& op) {
  if (command != "verify") return op;
  auto it = operation_aliases().find(op);
  return it == operation_aliases().end() ? op : it->second;
}

/// Names of the operations of `command` (empty string for scan).
inline std::vector<std::string> operations(const std::string& command) {
  std::vector<std::string> out;
  auto it = detail::handlers().find(command);
  if (it != detail::handlers().end())
    for (const auto& [name, h] : it->second) out.push_back(name);
  return out;
}

/// Runs one command and returns its CSV text; nothing is written anywhere.
inline CommandResult execute(const ExperimentConfig& config) {
  CommandResult result;
  std::ostringstream os;
  try {
    const auto& table = detail::handlers();
    auto cmd = table.find(config.command());
    if (cmd == table.end()) throw ConfigError("unknown command '" + config.command() + "'");
    auto op = cmd->second.find(resolve_operation(config.command(), config.op()));
    if (op == cmd->second.end())
      throw ConfigError("unknown operation '" + config.op() + "' for '" + config.command() + "'");
    op->second(config, os, result);
    result.csv = os.str();
  } catch (const ConfigError& e) {
    return {kExitConfig, "", std::string("config error: ") + e.what()};
  } catch (const DomainError& e) {
    return {kExitConfig, "", std::string("invalid parameters: ") + e.what()};
  } catch (const TruncationError& e) {
    return {kExitTruncation, os.str() + "# partial: truncation boundary reached\n", e.what()};
  } catch (const StepBudgetError& e) {
    return {kExitBudget, os.str() + "# partial: step budget exceeded\n", e.what()};
  } catch (const std::exception& e) {
    return {kExitFailure, "", std::string("error: ") + e.what()};
  }
  return result;
}

/// Executes and writes the CSV to the configured `out` path, or to `out`
/// when none is set. On a configuration error nothing is written.
inline int run_command(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  const CommandResult result = execute(config);
  if (!result.message.empty()) err << result.message << '\n';
  if (result.exit_code == kExitConfig || result.csv.empty()) return result.exit_code;
  if (config.has("out")) {
    const std::string path = config.values().at("out");
    std::ofstream file(path, std::ios::binary);
    if (!file) {
      err << "error: cannot write '" << path << "'\n";
      return kExitFailure;
    }
    file << result.csv;
  } else {
    out << result.csv;
  }
  return result.exit_code;
}

}  // namespace lamplighter::cli
