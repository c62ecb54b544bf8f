#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "lamplighter/base_walk.hpp"
#include "lamplighter/dynamics.hpp"
#include "lamplighter/error.hpp"
#include "lamplighter/lamp_group.hpp"
#include "lamplighter/rng.hpp"
#include "lamplighter/rooted_graph.hpp"
#include "lamplighter/stats.hpp"

namespace lamplighter::mc {

/// Estimates with fewer observed successes than this are inconclusive.
inline constexpr std::uint64_t kMinSuccesses = 30;

/// Worker threads: LAMPLIGHTER_THREADS when set, else the hardware count.
inline unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LAMPLIGHTER_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = static_cast<unsigned>(cap);
  }
  return n;
}

/// Replica-parallel fold. Replicas are cut into a fixed number of chunks
/// that depends only on `replicas`; chunk results are merged in chunk
/// order, so the result does not depend on the number of workers.
///
/// `work(acc, first, last)` processes replica indices [first, last).
/// `merge(into, from)` folds chunk results.
template <class Acc, class Make, class Work, class Merge>
Acc parallel_fold(std::uint64_t replicas, Make make, Work work, Merge merge,
                  unsigned workers = worker_count()) {
  const std::uint64_t chunk_count = std::min<std::uint64_t>(replicas, 256);
  std::vector<std::optional<Acc>> partial(chunk_count);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (;;) {
      const std::uint64_t c = next.fetch_add(1);
      if (c >= chunk_count) return;
      const std::uint64_t first = replicas * c / chunk_count;
      const std::uint64_t last = replicas * (c + 1) / chunk_count;
      try {
        Acc acc = make();
        work(acc, first, last);
        partial[c].emplace(std::move(acc));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(chunk_count);
      }
    }
  };
  const unsigned n = static_cast<unsigned>(std::min<std::uint64_t>(workers, chunk_count));
  if (n <= 1) {
    run();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n);
    for (unsigned i = 0; i < n; ++i) threads.emplace_back(run);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  Acc total = make();
  for (auto& p : partial)
    if (p) merge(total, *p);
  return total;
}

struct GraphSpec {
  enum class Kind { line, gamma_m, edge_list };
  Kind kind = Kind::line;
  int m = 3;
  std::string path;

  static GraphSpec line() { return {Kind::line, 0, {}}; }
  static GraphSpec gamma(int m) { return {Kind::gamma_m, m, {}}; }
  static GraphSpec edge_list(std::string path) { return {Kind::edge_list, 0, std::move(path)}; }

  std::string describe() const {
    switch (kind) {
      case Kind::line: return "line";
      case Kind::gamma_m: return "gamma_m(" + std::to_string(m) + ")";
      case Kind::edge_list: return "edges(" + path + ")";
    }
    return "?";
  }

  /// Builds the graph; `radius` is ignored for edge lists.
  RootedGraph build(int radius) const {
    switch (kind) {
      case Kind::line: return build_line_graph(radius);
      case Kind::gamma_m: return build_gamma_m(m, radius);
      case Kind::edge_list: return load_edge_list(path);
    }
    throw ConfigError("unknown graph kind");
  }
};

/// Everything needed to simulate one stationary walk.
struct WalkConfig {
  GraphSpec graph;
  double lambda;
  SwitchMeasure measure;
  std::uint64_t step_budget = kDefaultStepBudget;
  /// Truncation radius; chosen from lambda and the step horizon when unset.
  std::optional<int> radius;

  int resolved_radius(double horizon_steps) const {
    return radius ? *radius : default_truncation_radius(lambda, horizon_steps);
  }
};

struct EstimateWithCI {
  double estimate = 0.0;
  double std_error = 0.0;
  /// Replicas that completed (aborted ones are excluded).
  std::uint64_t replicas = 0;
  std::uint64_t seed = 0;
  /// Number of replicas with the event (return-probability estimates).
  std::uint64_t successes = 0;
  std::uint64_t truncation_aborts = 0;
  std::uint64_t budget_aborts = 0;
  bool inconclusive = false;

  std::uint64_t aborted() const noexcept { return truncation_aborts + budget_aborts; }
};

namespace detail {

struct AbortCounts {
  std::uint64_t truncation = 0;
  std::uint64_t budget = 0;

  void merge(const AbortCounts& o) {
    truncation += o.truncation;
    budget += o.budget;
  }
};

// Runs `body()` and records a truncation or step-budget abort; returns
// whether the replica completed.
template <class Body>
bool guarded(AbortCounts& aborts, Body&& body) {
  try {
    body();
    return true;
  } catch (const TruncationError&) {
    ++aborts.truncation;
  } catch (const StepBudgetError&) {
    ++aborts.budget;
  }
  return false;
}

inline void check_ks(const std::vector<std::uint64_t>& ks) {
  if (ks.empty()) throw DomainError("need at least one k");
  if (ks.front() < 1) throw DomainError("k must be >= 1");
  if (!std::is_sorted(ks.begin(), ks.end())) throw DomainError("k values must be sorted");
}

}  // namespace detail

/// How P(R_{rho_k} = id) is estimated from simulated replicas.
enum class Estimator {
  /// Fraction of replicas whose lamplighter state is the identity at rho_k.
  indicator,
  /// Mean over replicas of the exact conditional probability of the
  /// identity given the simulated base path: the product over visited
  /// vertices of mu^{*2c}(id), c the lamp exposure count. Unbiased for the
  /// same quantity, and usable where identity returns are too rare to count.
  conditional,
};

/// Conditional estimates with a larger relative standard error than this
/// are inconclusive.
inline constexpr double kMaxRelativeError = 0.2;

/// Exact P(lamps all identity | base path) for the path summarized by
/// `stats`. Caches convolution powers of the measure.
class ConditionalIdentityWeight {
 public:
  explicit ConditionalIdentityWeight(const SwitchMeasure& measure) : measure_(&measure) {}

  double operator()(const ExcursionStats& stats, Vertex root) {
    if (measure_->is_uniform()) {
      const auto order = static_cast<double>(measure_->group().order());
      return std::pow(order, -static_cast<double>(stats.range.size()));
    }
    const auto counts = lamp_exposure_counts(stats, root);
    std::uint64_t max_count = 0;
    for (const auto& [v, c] : counts) max_count = std::max(max_count, c);
    if (powers_.size() <= 2 * max_count)
      powers_ = convolution_powers_at_identity(
          *measure_, std::max<std::uint64_t>(2 * max_count, 2 * powers_.size()));
    double product = 1.0;
    for (const auto& [v, c] : counts) product *= powers_[2 * c];
    return product;
  }

 private:
  const SwitchMeasure* measure_;
  std::vector<double> powers_;
};

/// Estimates of P(R_{rho_k} = id) for each k in `ks` (sorted). Every
/// replica runs max(ks) excursions and is read at each k.
inline std::vector<EstimateWithCI> estimate_return_probs(const std::vector<std::uint64_t>& ks,
                                                         const WalkConfig& config,
                                                         std::uint64_t replicas, std::uint64_t seed,
                                                         Estimator estimator = Estimator::indicator) {
  detail::check_ks(ks);
  if (replicas < 1) throw DomainError("need at least one replica");
  const RootedGraph graph = config.graph.build(
      config.resolved_radius(static_cast<double>(config.step_budget)));
  const HomesickWalk walk(graph, HomesickParams(config.lambda));
  const std::uint64_t k_max = ks.back();

  struct Acc {
    std::vector<std::uint64_t> successes;
    std::vector<double> weight_sum;
    std::vector<double> weight_sq;
    std::uint64_t completed = 0;
    detail::AbortCounts aborts;
  };
  auto acc = parallel_fold<Acc>(
      replicas,
      [&] {
        return Acc{std::vector<std::uint64_t>(ks.size(), 0), std::vector<double>(ks.size(), 0.0),
                   std::vector<double>(ks.size(), 0.0), 0, {}};
      },
      [&](Acc& a, std::uint64_t first, std::uint64_t last) {
        ReturnsRun run(walk, config.measure, config.step_budget);
        ConditionalIdentityWeight weight(config.measure);
        std::vector<double> weights(ks.size());
        for (std::uint64_t i = first; i < last; ++i) {
          auto rng = replica_stream(seed, i);
          run.reset();
          const bool ok = detail::guarded(a.aborts, [&] {
            std::size_t q = 0;
            for (std::uint64_t j = 1; j <= k_max; ++j) {
              run.advance(rng);
              for (; q < ks.size() && ks[q] == j; ++q)
                if (estimator == Estimator::conditional) weights[q] = weight(run.stats(), graph.root());
            }
          });
          if (!ok) continue;
          ++a.completed;
          const auto& identity = run.stats().identity_at_return;
          for (std::size_t q = 0; q < ks.size(); ++q) {
            if (identity[ks[q] - 1]) ++a.successes[q];
            if (estimator == Estimator::conditional) {
              a.weight_sum[q] += weights[q];
              a.weight_sq[q] += weights[q] * weights[q];
            }
          }
        }
      },
      [](Acc& into, const Acc& from) {
        for (std::size_t q = 0; q < into.successes.size(); ++q) {
          into.successes[q] += from.successes[q];
          into.weight_sum[q] += from.weight_sum[q];
          into.weight_sq[q] += from.weight_sq[q];
        }
        into.completed += from.completed;
        into.aborts.merge(from.aborts);
      });

  std::vector<EstimateWithCI> out;
  for (std::size_t q = 0; q < ks.size(); ++q) {
    EstimateWithCI e;
    e.seed = seed;
    e.replicas = acc.completed;
    e.successes = acc.successes[q];
    e.truncation_aborts = acc.aborts.truncation;
    e.budget_aborts = acc.aborts.budget;
    const double n = static_cast<double>(acc.completed);
    if (estimator == Estimator::indicator) {
      if (acc.completed > 0) {
        e.estimate = static_cast<double>(e.successes) / n;
        e.std_error = std::sqrt(e.estimate * (1.0 - e.estimate) / n);
      }
      e.inconclusive = e.successes < kMinSuccesses;
    } else {
      if (acc.completed > 0) {
        e.estimate = acc.weight_sum[q] / n;
        const double var =
            acc.completed > 1 ? std::max(0.0, (acc.weight_sq[q] - n * e.estimate * e.estimate) / (n - 1.0)) : 0.0;
        e.std_error = std::sqrt(var / n);
      }
      e.inconclusive = acc.completed < 2 || !(e.estimate > 0.0) || e.std_error > kMaxRelativeError * e.estimate;
    }
    out.push_back(e);
  }
  return out;
}

inline EstimateWithCI estimate_return_prob(std::uint64_t k, const WalkConfig& config,
                                           std::uint64_t replicas, std::uint64_t seed,
                                           Estimator estimator = Estimator::indicator) {
  return estimate_return_probs({k}, config, replicas, seed, estimator).front();
}

/// Mean of xi(id, n) over replicas for each n in `ns` (sorted).
inline std::vector<EstimateWithCI> estimate_local_times(const std::vector<std::uint64_t>& ns,
                                                        const WalkConfig& config,
                                                        std::uint64_t replicas, std::uint64_t seed) {
  if (ns.empty() || !std::is_sorted(ns.begin(), ns.end()))
    throw DomainError("local-time horizons must be sorted and non-empty");
  if (replicas < 1) throw DomainError("need at least one replica");
  const RootedGraph graph = config.graph.build(
      config.resolved_radius(static_cast<double>(std::max<std::uint64_t>(ns.back(), 1))));
  const HomesickWalk walk(graph, HomesickParams(config.lambda));

  struct Acc {
    std::vector<std::uint64_t> sum;
    std::vector<std::uint64_t> sum_sq;
    std::uint64_t completed = 0;
    detail::AbortCounts aborts;
  };
  auto acc = parallel_fold<Acc>(
      replicas,
      [&] {
        return Acc{std::vector<std::uint64_t>(ns.size(), 0), std::vector<std::uint64_t>(ns.size(), 0),
                   0, {}};
      },
      [&](Acc& a, std::uint64_t first, std::uint64_t last) {
        LocalTimeRun run(walk, config.measure);
        for (std::uint64_t i = first; i < last; ++i) {
          auto rng = replica_stream(seed, i);
          LocalTimeSummary summary;
          if (!detail::guarded(a.aborts, [&] { summary = run.run(ns, rng); })) continue;
          ++a.completed;
          for (std::size_t q = 0; q < ns.size(); ++q) {
            const std::uint64_t xi = summary.identity_visits[q];
            a.sum[q] += xi;
            a.sum_sq[q] += xi * xi;
          }
        }
      },
      [](Acc& into, const Acc& from) {
        for (std::size_t q = 0; q < into.sum.size(); ++q) {
          into.sum[q] += from.sum[q];
          into.sum_sq[q] += from.sum_sq[q];
        }
        into.completed += from.completed;
        into.aborts.merge(from.aborts);
      });

  std::vector<EstimateWithCI> out;
  for (std::size_t q = 0; q < ns.size(); ++q) {
    EstimateWithCI e;
    e.seed = seed;
    e.replicas = acc.completed;
    e.truncation_aborts = acc.aborts.truncation;
    e.budget_aborts = acc.aborts.budget;
    if (acc.completed > 0) {
      const double n = static_cast<double>(acc.completed);
      const double mean = static_cast<double>(acc.sum[q]) / n;
      const double var = acc.completed > 1
                             ? std::max(0.0, (static_cast<double>(acc.sum_sq[q]) - n * mean * mean) /
                                                 (n - 1.0))
                             : 0.0;
      e.estimate = mean;
      e.std_error = std::sqrt(var / n);
    }
    e.inconclusive = acc.completed < 2;
    out.push_back(e);
  }
  return out;
}

inline EstimateWithCI estimate_local_time(std::uint64_t n, const WalkConfig& config,
                                          std::uint64_t replicas, std::uint64_t seed) {
  return estimate_local_times({n}, config, replicas, seed).front();
}

/// Per-replica trajectory summary after k excursions.
struct TrajectorySummary {
  std::uint64_t replica;
  std::uint64_t seed;  // stream seed of the replica
  std::uint64_t k;
  std::uint64_t return_time;
  std::int64_t max_projection;
  std::int64_t min_projection;
  int max_distance;
  std::uint64_t positive;
  std::size_t range_size;
  std::uint64_t identity_returns;
};

struct TrajectoryBatch {
  std::vector<TrajectorySummary> rows;
  detail::AbortCounts aborts;
  /// Lowest replica index that aborted, if any.
  std::optional<std::uint64_t> first_abort;
};

inline TrajectoryBatch simulate_trajectories(std::uint64_t k, const WalkConfig& config,
                                             std::uint64_t replicas, std::uint64_t seed) {
  if (k < 1) throw DomainError("k must be >= 1");
  const RootedGraph graph = config.graph.build(
      config.resolved_radius(static_cast<double>(config.step_budget)));
  const HomesickWalk walk(graph, HomesickParams(config.lambda));
  return parallel_fold<TrajectoryBatch>(
      replicas, [] { return TrajectoryBatch{}; },
      [&](TrajectoryBatch& batch, std::uint64_t first, std::uint64_t last) {
        ReturnsRun run(walk, config.measure, config.step_budget);
        for (std::uint64_t i = first; i < last; ++i) {
          auto rng = replica_stream(seed, i);
          run.reset();
          const bool ok = detail::guarded(batch.aborts, [&] {
            for (std::uint64_t j = 0; j < k; ++j) run.advance(rng);
          });
          if (!ok) {
            if (!batch.first_abort) batch.first_abort = i;
            continue;
          }
          const auto& s = run.stats();
          batch.rows.push_back({i, stream_seed(seed, i), k, s.last_return_time(), s.max_projection,
                                s.min_projection, s.max_distance, s.positive, s.range.size(),
                                s.identity_returns()});
        }
      },
      [](TrajectoryBatch& into, const TrajectoryBatch& from) {
        into.rows.insert(into.rows.end(), from.rows.begin(), from.rows.end());
        into.aborts.merge(from.aborts);
        if (from.first_abort && (!into.first_abort || *from.first_abort < *into.first_abort))
          into.first_abort = from.first_abort;
      });
}

/// Empirical P(max_{t < tau_o^+} dist(o, Z_t) >= r) for r = 1..r_max over
/// independent excursions from the root. Lamps play no role here, so the
/// trivial lamp group is used.
struct EscapeProfile {
  std::uint64_t excursions = 0;
  /// reached[r - 1] = number of excursions with max distance >= r.
  std::vector<std::uint64_t> reached;
  detail::AbortCounts aborts;

  double probability(int r) const {
    return static_cast<double>(reached[static_cast<std::size_t>(r - 1)]) /
           static_cast<double>(excursions);
  }
  double std_error(int r) const {
    const double q = probability(r);
    return std::sqrt(q * (1.0 - q) / static_cast<double>(excursions));
  }
};

inline EscapeProfile estimate_escape_profile(const RootedGraph& graph, double lambda, int r_max,
                                             std::uint64_t excursions, std::uint64_t seed,
                                             std::uint64_t budget = kDefaultStepBudget) {
  if (r_max < 1) throw DomainError("r_max must be >= 1");
  const HomesickWalk walk(graph, HomesickParams(lambda));
  const SwitchMeasure trivial = make_uniform_measure(LampGroup::cyclic(1));
  return parallel_fold<EscapeProfile>(
      excursions,
      [&] { return EscapeProfile{0, std::vector<std::uint64_t>(static_cast<std::size_t>(r_max), 0), {}}; },
      [&](EscapeProfile& acc, std::uint64_t first, std::uint64_t last) {
        WalkerState state = WalkerState::identity(graph, trivial.group());
        ExcursionRecord record;
        for (std::uint64_t i = first; i < last; ++i) {
          auto rng = replica_stream(seed, i);
          state.position = graph.root();
          state.steps = 0;
          if (!detail::guarded(acc.aborts,
                               [&] { run_excursion(state, walk, trivial, rng, record, budget); }))
            continue;
          ++acc.excursions;
          const int reach = std::min(record.max_distance, r_max);
          for (int r = 1; r <= reach; ++r) ++acc.reached[static_cast<std::size_t>(r - 1)];
        }
      },
      [](EscapeProfile& into, const EscapeProfile& from) {
        into.excursions += from.excursions;
        for (std::size_t r = 0; r < into.reached.size(); ++r) into.reached[r] += from.reached[r];
        into.aborts.merge(from.aborts);
      });
}

struct ExcursionSample {
  std::uint64_t length;
  std::int64_t max_projection;
  std::int64_t min_projection;
  int max_distance;
  int sign;
};

/// Independent single excursions from the root, in replica order.
inline std::vector<ExcursionSample> sample_excursions(const RootedGraph& graph, double lambda,
                                                     std::uint64_t count, std::uint64_t seed,
                                                     std::uint64_t budget = kDefaultStepBudget,
                                                     std::uint64_t first_index = 0) {
  const HomesickWalk walk(graph, HomesickParams(lambda));
  const SwitchMeasure trivial = make_uniform_measure(LampGroup::cyclic(1));
  struct Acc {
    std::vector<ExcursionSample> samples;
  };
  auto acc = parallel_fold<Acc>(
      count, [] { return Acc{}; },
      [&](Acc& a, std::uint64_t first, std::uint64_t last) {
        WalkerState state = WalkerState::identity(graph, trivial.group());
        ExcursionRecord record;
        for (std::uint64_t i = first; i < last; ++i) {
          auto rng = replica_stream(seed, first_index + i);
          state.position = graph.root();
          state.steps = 0;
          run_excursion(state, walk, trivial, rng, record, budget);
          a.samples.push_back({record.length, record.max_projection, record.min_projection,
                               record.max_distance, record.sign});
        }
      },
      [](Acc& into, const Acc& from) {
        into.samples.insert(into.samples.end(), from.samples.begin(), from.samples.end());
      });
  return std::move(acc.samples);
}

/// Maxima of the first `count` positive excursions of the biased walk on Z
/// (those whose first step is +1), in replica order.
inline std::vector<std::int64_t> positive_excursion_maxima(double lambda, std::uint64_t count,
                                                           std::uint64_t seed,
                                                           std::uint64_t budget = kDefaultStepBudget) {
  const RootedGraph line = build_line_graph(default_truncation_radius(lambda, static_cast<double>(budget)));
  std::vector<std::int64_t> out;
  out.reserve(count);
  std::uint64_t next = 0;
  while (out.size() < count) {
    const std::uint64_t block = 2 * (count - out.size()) + 64;
    for (const auto& s : sample_excursions(line, lambda, block, seed, budget, next))
      if (s.sign > 0 && out.size() < count) out.push_back(s.max_projection);
    next += block;
  }
  return out;
}

/// Distribution summary of |range(Z_{rho_k})| over replicas: the number of
/// replicas whose range size is at most each requested threshold.
struct RangeTail {
  std::uint64_t replicas = 0;
  std::vector<std::uint64_t> at_most;
  detail::AbortCounts aborts;
};

inline RangeTail estimate_range_tail(std::uint64_t k, const std::vector<double>& thresholds,
                                     const RootedGraph& graph, double lambda,
                                     std::uint64_t replicas, std::uint64_t seed,
                                     std::uint64_t budget = kDefaultStepBudget) {
  if (k < 1) throw DomainError("k must be >= 1");
  const HomesickWalk walk(graph, HomesickParams(lambda));
  const SwitchMeasure trivial = make_uniform_measure(LampGroup::cyclic(1));
  return parallel_fold<RangeTail>(
      replicas, [&] { return RangeTail{0, std::vector<std::uint64_t>(thresholds.size(), 0), {}}; },
      [&](RangeTail& acc, std::uint64_t first, std::uint64_t last) {
        ReturnsRun run(walk, trivial, budget);
        for (std::uint64_t i = first; i < last; ++i) {
          auto rng = replica_stream(seed, i);
          run.reset();
          if (!detail::guarded(acc.aborts, [&] {
                for (std::uint64_t j = 0; j < k; ++j) run.advance(rng);
              }))
            continue;
          ++acc.replicas;
          const auto size = static_cast<double>(run.stats().range.size());
          for (std::size_t q = 0; q < thresholds.size(); ++q)
            if (size <= thresholds[q]) ++acc.at_most[q];
        }
      },
      [](RangeTail& into, const RangeTail& from) {
        into.replicas += from.replicas;
        for (std::size_t q = 0; q < into.at_most.size(); ++q) into.at_most[q] += from.at_most[q];
        into.aborts.merge(from.aborts);
      });
}

/// Unique integers log-spaced over [lo, hi].
inline std::vector<std::uint64_t> log_spaced(std::uint64_t lo, std::uint64_t hi, std::size_t count) {
  if (lo < 1 || hi < lo || count < 1) throw DomainError("bad log-spaced range");
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    const double v = std::exp(std::log(static_cast<double>(lo)) +
                              t * (std::log(static_cast<double>(hi)) - std::log(static_cast<double>(lo))));
    const auto r = static_cast<std::uint64_t>(std::llround(v));
    if (out.empty() || r > out.back()) out.push_back(r);
  }
  return out;
}

struct PhaseScanPoint {
  double lambda = 0.0;
  std::vector<std::uint64_t> ks;
  std::vector<EstimateWithCI> estimates;
  /// Fitted exponent of k -> P(R_{rho_k} = id); NaN when fewer than three
  /// window points have a positive estimate.
  double exponent = std::numeric_limits<double>::quiet_NaN();
  double exponent_stderr = std::numeric_limits<double>::quiet_NaN();
  std::size_t points_used = 0;
  /// Set when any window point is inconclusive.
  bool inconclusive = true;

  /// Summable side of the boundary exponent -1 means transience.
  bool recurrent_side() const { return exponent > -1.0; }
};

struct PhaseScanResult {
  std::vector<PhaseScanPoint> points;
  /// Adjacent grid values where the exponent crosses -1 (conclusive points only).
  std::optional<std::pair<double, double>> bracket;
};

struct PhaseScanOptions {
  std::uint64_t k_lo = 10;
  std::uint64_t k_hi = 100;
  std::size_t window_points = 10;
  std::uint64_t replicas = 100000;
  std::uint64_t seed = 1;
  std::uint64_t step_budget = kDefaultStepBudget;
  std::optional<int> radius;
  Estimator estimator = Estimator::indicator;
};

/// Scans lambda over `grid` (sorted) on a base graph with uniform lamps of
/// order `lamp_order`, fitting the decay exponent of the estimated return
/// probability over the k window.
inline PhaseScanResult phase_scan(const std::vector<double>& grid, const GraphSpec& graph,
                                  std::int64_t lamp_order, const PhaseScanOptions& options) {
  if (grid.empty() || !std::is_sorted(grid.begin(), grid.end()))
    throw DomainError("phase scan grid must be sorted and non-empty");
  if (options.k_hi < 10 * options.k_lo) throw DomainError("k window must span at least one decade");
  const SwitchMeasure measure = make_uniform_measure(LampGroup::cyclic(lamp_order));
  const auto ks = log_spaced(options.k_lo, options.k_hi, options.window_points);

  PhaseScanResult result;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    WalkConfig config{graph, grid[g], measure, options.step_budget, options.radius};
    PhaseScanPoint point;
    point.lambda = grid[g];
    point.ks = ks;
    point.estimates =
        estimate_return_probs(ks, config, options.replicas, stream_seed(options.seed, g), options.estimator);
    std::vector<std::pair<double, double>> usable;
    bool all_sufficient = true;
    for (std::size_t q = 0; q < ks.size(); ++q) {
      const auto& e = point.estimates[q];
      if (e.estimate > 0.0) usable.emplace_back(static_cast<double>(ks[q]), e.estimate);
      if (e.inconclusive) all_sufficient = false;
    }
    if (usable.size() >= 3) {
      const auto fit = stats::fit_power_exponent(usable);
      point.exponent = fit.slope;
      point.exponent_stderr = fit.slope_stderr;
    }
    point.points_used = usable.size();
    point.inconclusive = !all_sufficient || usable.size() < 3;
    result.points.push_back(std::move(point));
  }
  for (std::size_t g = 0; g + 1 < result.points.size(); ++g) {
    const auto& a = result.points[g];
    const auto& b = result.points[g + 1];
    if (a.inconclusive || b.inconclusive) continue;
    if (!a.recurrent_side() && b.recurrent_side()) {
      result.bracket = std::make_pair(a.lambda, b.lambda);
      break;
    }
  }
  return result;
}

}  // namespace lamplighter::mc
