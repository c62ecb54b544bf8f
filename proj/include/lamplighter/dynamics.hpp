#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "lamplighter/base_walk.hpp"
#include "lamplighter/error.hpp"
#include "lamplighter/lamp_group.hpp"
#include "lamplighter/rooted_graph.hpp"

namespace lamplighter {

inline constexpr std::uint64_t kDefaultStepBudget = 1'000'000'000ULL;

/// Lamp configuration over the vertices of a (finite or truncated) base
/// graph. Storage is dense over vertices; a counter of non-identity lamps
/// makes the identity test O(1).
class LampConfig {
 public:
  LampConfig(LampGroup group, std::size_t vertex_count)
      : group_(group), values_(vertex_count, LampGroup::identity()) {}

  const LampGroup& group() const noexcept { return group_; }
  LampElement at(Vertex v) const { return values_[v]; }
  std::size_t non_identity_count() const noexcept { return non_identity_; }
  bool is_identity() const noexcept { return non_identity_ == 0; }

  /// Right-multiplies the lamp at `v` by `h`.
  void multiply(Vertex v, LampElement h) {
    LampElement& slot = values_[v];
    const LampElement next = group_.compose(slot, h);
    non_identity_ += (next != 0) - (slot != 0);
    slot = next;
  }

  /// Non-identity lamps in vertex order.
  std::vector<std::pair<Vertex, LampElement>> support() const {
    std::vector<std::pair<Vertex, LampElement>> out;
    for (Vertex v = 0; v < values_.size(); ++v)
      if (values_[v] != 0) out.emplace_back(v, values_[v]);
    return out;
  }

  /// Resets to the identity configuration given a superset of the support.
  void reset(std::span<const Vertex> touched) {
    for (Vertex v : touched) values_[v] = 0;
    non_identity_ = 0;
  }

 private:
  LampGroup group_;
  std::vector<LampElement> values_;
  std::size_t non_identity_ = 0;
};

/// Element of the lamplighter graph: lamps plus base position.
struct WalkerState {
  LampConfig lamps;
  Vertex position;
  std::uint64_t steps = 0;

  /// The identity: all lamps off, lamplighter at the root.
  static WalkerState identity(const RootedGraph& graph, const LampGroup& group) {
    return WalkerState{LampConfig(group, graph.vertex_count()), graph.root(), 0};
  }

  bool is_identity(const RootedGraph& graph) const noexcept {
    return position == graph.root() && lamps.is_identity();
  }
};

/// The three random inputs of one switch-walk-switch step.
struct StepDraws {
  LampElement switch_before;
  Vertex next;
  LampElement switch_after;
};

/// Deterministic part of a step: lamp at the current position times the
/// first switch, move, lamp at the new position times the second switch.
inline void apply_step(WalkerState& state, const StepDraws& draws) {
  state.lamps.multiply(state.position, draws.switch_before);
  state.position = draws.next;
  state.lamps.multiply(state.position, draws.switch_after);
  ++state.steps;
}

/// One switch-walk-switch step. Draw order is fixed: first switch, base
/// move, second switch.
template <class Rng>
void ssw_step(WalkerState& state, const HomesickWalk& walk, const SwitchMeasure& measure, Rng& rng) {
  const LampElement u = measure.sample(rng);
  const Vertex next = walk.step(state.position, rng);
  const LampElement v = measure.sample(rng);
  apply_step(state, {u, next, v});
}

/// One excursion of the base walk away from the root and back.
struct ExcursionRecord {
  std::uint64_t length = 0;
  /// Signed extremes of the projection to Z (0 when the graph has none).
  std::int64_t max_projection = 0;
  std::int64_t min_projection = 0;
  int max_distance = 0;
  /// Sign of the projection after the first step; 0 without a projection.
  int sign = 0;
  /// Positions at times 1..length; the last entry is the root.
  std::vector<Vertex> path;
  /// Whether the lamplighter state is the identity at the end.
  bool identity_at_return = false;
};

/// Runs the base walk from the root until it first returns there, updating
/// lamps with every step. `budget` caps the step count of the state.
template <class Rng>
void run_excursion(WalkerState& state, const HomesickWalk& walk, const SwitchMeasure& measure,
                   Rng& rng, ExcursionRecord& record,
                   std::uint64_t budget = kDefaultStepBudget) {
  const RootedGraph& graph = walk.graph();
  if (state.position != graph.root()) throw DomainError("excursions start at the root");
  record.length = 0;
  record.max_projection = record.min_projection = 0;
  record.max_distance = 0;
  record.sign = 0;
  record.path.clear();
  const bool projected = graph.has_projection();
  do {
    if (state.steps >= budget) throw StepBudgetError("step budget exhausted");
    ssw_step(state, walk, measure, rng);
    const Vertex v = state.position;
    record.path.push_back(v);
    ++record.length;
    record.max_distance = std::max(record.max_distance, graph.distance(v));
    if (projected) {
      const std::int64_t x = graph.projection(v);
      if (record.length == 1) record.sign = x > 0 ? 1 : (x < 0 ? -1 : 0);
      record.max_projection = std::max(record.max_projection, x);
      record.min_projection = std::min(record.min_projection, x);
    }
  } while (state.position != graph.root());
  record.identity_at_return = state.lamps.is_identity();
}

template <class Rng>
ExcursionRecord run_excursion(WalkerState& state, const HomesickWalk& walk,
                              const SwitchMeasure& measure, Rng& rng,
                              std::uint64_t budget = kDefaultStepBudget) {
  ExcursionRecord record;
  run_excursion(state, walk, measure, rng, record, budget);
  return record;
}

/// Statistics folded over successive excursions from the identity.
///
/// For graphs with a projection to Z, `max_projection`/`min_projection` are
/// the signed extremes M+ and M-, and `positive`/`negative` count excursions
/// by the sign of their first step. Local times count visits of the base
/// walk at times 0..rho_k, so the root is counted at time 0.
struct ExcursionStats {
  std::uint64_t k = 0;
  std::vector<std::uint64_t> return_times;
  std::vector<bool> identity_at_return;
  std::int64_t max_projection = 0;
  std::int64_t min_projection = 0;
  int max_distance = 0;
  std::uint64_t positive = 0;
  std::uint64_t negative = 0;
  /// Visited vertices in order of first visit.
  std::vector<Vertex> range;
  /// Dense per-vertex visit counts.
  std::vector<std::uint64_t> local_times;

  std::uint64_t identity_returns() const {
    return static_cast<std::uint64_t>(
        std::count(identity_at_return.begin(), identity_at_return.end(), true));
  }
  std::uint64_t last_return_time() const { return return_times.empty() ? 0 : return_times.back(); }
};

/// Reusable runner: identity state, stats and scratch buffers for a sequence
/// of excursions. `reset()` costs O(|range|), so one runner serves many
/// replicas.
class ReturnsRun {
 public:
  ReturnsRun(const HomesickWalk& walk, const SwitchMeasure& measure,
             std::uint64_t budget = kDefaultStepBudget)
      : walk_(&walk),
        measure_(&measure),
        budget_(budget),
        state_(WalkerState::identity(walk.graph(), measure.group())) {
    stats_.local_times.assign(walk.graph().vertex_count(), 0);
    reset();
  }

  void reset() {
    state_.lamps.reset(stats_.range);
    state_.lamps.reset(record_.path);  // partial excursion after an abort
    record_.path.clear();
    state_.position = walk_->graph().root();
    state_.steps = 0;
    for (Vertex v : stats_.range) stats_.local_times[v] = 0;
    stats_.k = 0;
    stats_.return_times.clear();
    stats_.identity_at_return.clear();
    stats_.max_projection = stats_.min_projection = 0;
    stats_.max_distance = 0;
    stats_.positive = stats_.negative = 0;
    stats_.range.clear();
    visit(walk_->graph().root());
  }

  template <class Rng>
  const ExcursionRecord& advance(Rng& rng) {
    run_excursion(state_, *walk_, *measure_, rng, record_, budget_);
    for (Vertex v : record_.path) visit(v);
    ++stats_.k;
    stats_.return_times.push_back(state_.steps);
    stats_.identity_at_return.push_back(record_.identity_at_return);
    stats_.max_projection = std::max(stats_.max_projection, record_.max_projection);
    stats_.min_projection = std::min(stats_.min_projection, record_.min_projection);
    stats_.max_distance = std::max(stats_.max_distance, record_.max_distance);
    if (record_.sign > 0) ++stats_.positive;
    if (record_.sign < 0) ++stats_.negative;
    return record_;
  }

  const WalkerState& state() const noexcept { return state_; }
  const ExcursionStats& stats() const noexcept { return stats_; }
  const HomesickWalk& walk() const noexcept { return *walk_; }

 private:
  void visit(Vertex v) {
    if (stats_.local_times[v]++ == 0) stats_.range.push_back(v);
  }

  const HomesickWalk* walk_;
  const SwitchMeasure* measure_;
  std::uint64_t budget_;
  WalkerState state_;
  ExcursionStats stats_;
  ExcursionRecord record_;
};

/// Runs k excursions from the identity and returns their folded statistics.
template <class Rng>
ExcursionStats simulate_returns(std::uint64_t k, const HomesickWalk& walk,
                                const SwitchMeasure& measure, Rng& rng,
                                std::uint64_t budget = kDefaultStepBudget) {
  if (k < 1) throw DomainError("simulate_returns needs k >= 1");
  ReturnsRun run(walk, measure, budget);
  for (std::uint64_t i = 0; i < k; ++i) run.advance(rng);
  return run.stats();
}

/// Lamp exposure counts at rho_k: the number of switch draws multiplied into
/// each visited lamp is twice the number of visits at times 0..rho_k - 1.
/// This equals the local time for every vertex except the root, which is
/// counted once less (its visit at rho_k adds only a single switch, as
/// does its visit at time 0).
inline std::vector<std::pair<Vertex, std::uint64_t>> lamp_exposure_counts(
    const ExcursionStats& stats, Vertex root) {
  std::vector<std::pair<Vertex, std::uint64_t>> out;
  out.reserve(stats.range.size());
  for (Vertex v : stats.range) {
    std::uint64_t count = stats.local_times[v];
    if (v == root && stats.k > 0) --count;
    out.emplace_back(v, count);
  }
  return out;
}

/// Result of a fixed-horizon run: local time of the lamplighter identity.
struct LocalTimeSummary {
  /// xi(id, n) at each requested checkpoint, in checkpoint order.
  std::vector<std::uint64_t> identity_visits;
  /// Number of returns of the base walk to the root in steps 1..n.
  std::uint64_t root_returns = 0;
  std::size_t range_size = 0;
  Vertex final_position = 0;
};

/// Reusable fixed-horizon runner counting visits to the identity.
class LocalTimeRun {
 public:
  LocalTimeRun(const HomesickWalk& walk, const SwitchMeasure& measure)
      : walk_(&walk),
        measure_(&measure),
        state_(WalkerState::identity(walk.graph(), measure.group())),
        visited_(walk.graph().vertex_count(), false) {}

  /// Runs to the largest checkpoint; checkpoints must be nondecreasing.
  template <class Rng>
  LocalTimeSummary run(std::span<const std::uint64_t> checkpoints, Rng& rng) {
    if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
      throw DomainError("checkpoints must be nondecreasing");
    reset();
    const RootedGraph& graph = walk_->graph();
    LocalTimeSummary out;
    out.identity_visits.reserve(checkpoints.size());
    std::uint64_t visits = 1;  // R_0 = id
    std::size_t next = 0;
    auto flush = [&] {
      while (next < checkpoints.size() && checkpoints[next] == state_.steps) {
        out.identity_visits.push_back(visits);
        ++next;
      }
    };
    flush();
    while (next < checkpoints.size()) {
      ssw_step(state_, *walk_, *measure_, rng);
      const Vertex v = state_.position;
      if (!visited_[v]) {
        visited_[v] = true;
        touched_.push_back(v);
      }
      if (v == graph.root()) {
        ++out.root_returns;
        if (state_.lamps.is_identity()) ++visits;
      }
      flush();
    }
    out.range_size = touched_.size();
    out.final_position = state_.position;
    return out;
  }

 private:
  void reset() {
    state_.lamps.reset(touched_);
    for (Vertex v : touched_) visited_[v] = false;
    touched_.clear();
    const Vertex root = walk_->graph().root();
    state_.position = root;
    state_.steps = 0;
    visited_[root] = true;
    touched_.push_back(root);
  }

  const HomesickWalk* walk_;
  const SwitchMeasure* measure_;
  WalkerState state_;
  std::vector<bool> visited_;
  std::vector<Vertex> touched_;
};

template <class Rng>
LocalTimeSummary local_time_run(std::uint64_t n, const HomesickWalk& walk,
                                const SwitchMeasure& measure, Rng& rng) {
  LocalTimeRun run(walk, measure);
  const std::uint64_t checkpoint[] = {n};
  return run.run(checkpoint, rng);
}

}  // namespace lamplighter
