#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lamplighter/error.hpp"
#include "lamplighter/rng.hpp"
#include "lamplighter/rooted_graph.hpp"

namespace lamplighter {

/// Drift of the biased walk on Z: p in (1/2, 1) toward the origin, and the
/// equivalent homesick parameter lambda = p / (1 - p).
class BiasParams {
 public:
  static BiasParams from_p(double p) {
    if (!(p > 0.5 && p < 1.0)) throw DomainError("drift p must lie in (1/2, 1)");
    return BiasParams(p, 1.0 - p, p / (1.0 - p));
  }
  static BiasParams from_lambda(double lambda) {
    if (!(lambda > 1.0) || !std::isfinite(lambda)) throw DomainError("lambda must exceed 1");
    // Same expressions as the homesick walk with one closer neighbor.
    return BiasParams(lambda / (lambda + 1.0), 1.0 / (lambda + 1.0), lambda);
  }

  double p() const noexcept { return p_; }
  /// Probability of a step away from the origin, 1 - p.
  double q() const noexcept { return q_; }
  double lambda() const noexcept { return lambda_; }

 private:
  BiasParams(double p, double q, double lambda) : p_(p), q_(q), lambda_(lambda) {}

  double p_;
  double q_;
  double lambda_;
};

struct IntegerTransition {
  std::int64_t target;
  double probability;
};

/// One-step law of the biased walk on Z from x, ordered (x - 1, x + 1).
inline std::array<IntegerTransition, 2> biased_step_distribution(std::int64_t x,
                                                                 const BiasParams& params) {
  const double p = params.p();
  const double q = params.q();
  if (x > 0) return {{{x - 1, p}, {x + 1, q}}};
  if (x < 0) return {{{x - 1, q}, {x + 1, p}}};
  return {{{x - 1, 0.5}, {x + 1, 0.5}}};
}

class HomesickParams {
 public:
  explicit HomesickParams(double lambda) : lambda_(lambda) {
    if (!(lambda >= 1.0) || !std::isfinite(lambda)) throw DomainError("homesick lambda must be >= 1");
  }
  double lambda() const noexcept { return lambda_; }

 private:
  double lambda_;
};

struct VertexTransition {
  Vertex target;
  double probability;
};

/// Transition law of the lambda-homesick walk at v: each of the j neighbors
/// closer to the root gets lambda / (lambda j + k), each of the k others
/// gets 1 / (lambda j + k).
inline std::vector<VertexTransition> homesick_transition(const RootedGraph& graph, Vertex v,
                                                         const HomesickParams& params) {
  if (v >= graph.vertex_count()) throw DomainError("vertex is not in the graph");
  if (graph.is_boundary(v))
    throw TruncationError("transition queried at boundary vertex " + graph.label(v) +
                          " of a truncated graph");
  const auto nbrs = graph.neighbors(v);
  const auto j = static_cast<double>(graph.closer_count(v));
  const auto k = static_cast<double>(nbrs.size()) - j;
  const double lambda = params.lambda();
  const double total = lambda * j + k;
  std::vector<VertexTransition> out;
  out.reserve(nbrs.size());
  for (std::size_t i = 0; i < nbrs.size(); ++i)
    out.push_back({nbrs[i], (i < graph.closer_count(v) ? lambda : 1.0) / total});
  return out;
}

/// Sampler for the lambda-homesick walk on a fixed graph. Holds a reference
/// to the graph, which must outlive it.
class HomesickWalk {
 public:
  HomesickWalk(const RootedGraph& graph, HomesickParams params)
      : graph_(&graph), lambda_(params.lambda()) {
    closer_weight_.reserve(graph.vertex_count());
    total_weight_.reserve(graph.vertex_count());
    for (Vertex v = 0; v < graph.vertex_count(); ++v) {
      const auto j = static_cast<double>(graph.closer_count(v));
      const auto k = static_cast<double>(graph.degree(v)) - j;
      closer_weight_.push_back(lambda_ * j);
      total_weight_.push_back(lambda_ * j + k);
    }
  }

  const RootedGraph& graph() const noexcept { return *graph_; }
  double lambda() const noexcept { return lambda_; }

  /// Next position from `v`. Throws TruncationError when the walk lands on
  /// the truncation boundary.
  template <class Rng>
  Vertex step(Vertex v, Rng& rng) const {
    const auto nbrs = graph_->neighbors(v);
    const std::size_t j = graph_->closer_count(v);
    const double u = uniform01(rng) * total_weight_[v];
    std::size_t idx;
    if (u < closer_weight_[v]) {
      idx = std::min(j - 1, static_cast<std::size_t>(u / lambda_));
    } else {
      idx = j + std::min(nbrs.size() - j - 1, static_cast<std::size_t>(u - closer_weight_[v]));
    }
    const Vertex next = nbrs[idx];
    if (graph_->is_boundary(next))
      throw TruncationError("walk reached the truncation boundary at vertex " + graph_->label(next));
    return next;
  }

 private:
  const RootedGraph* graph_;
  double lambda_;
  std::vector<double> closer_weight_;
  std::vector<double> total_weight_;
};

/// Truncation radius that makes hitting the boundary negligible for a
/// recurrent walk run for `total_steps` steps.
inline int default_truncation_radius(double lambda, double total_steps) {
  if (!(lambda > 1.0)) throw DomainError("automatic truncation radius needs lambda > 1");
  const double steps = std::max(total_steps, 16.0);
  const double r = std::ceil(40.0 * std::log(steps) / std::log(lambda));
  if (r > 5.0e6) throw DomainError("lambda too close to 1 for an automatic truncation radius");
  return std::max(8, static_cast<int>(r));
}

}  // namespace lamplighter
