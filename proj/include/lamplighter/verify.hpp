#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lamplighter/dynamics.hpp"
#include "lamplighter/error.hpp"
#include "lamplighter/exact.hpp"
#include "lamplighter/lamp_group.hpp"
#include "lamplighter/rooted_graph.hpp"

// Brute-force oracles: fix a base path on Z and enumerate every sequence of
// switch draws along it.
namespace lamplighter::verify {

/// Positions x_1..x_n of a +-1 path started at 0 (x_0 = 0 is implicit).
using IntPath = std::vector<std::int64_t>;

/// All +-1 paths of even length 2..max_len that start and end at 0.
inline std::vector<IntPath> closed_paths(int max_len) {
  if (max_len < 2) throw DomainError("paths need length >= 2");
  std::vector<IntPath> out;
  for (int len = 2; len <= max_len; len += 2) {
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << len); ++bits) {
      IntPath path;
      std::int64_t x = 0;
      for (int i = 0; i < len; ++i) {
        x += (bits >> i) & 1 ? 1 : -1;
        path.push_back(x);
      }
      if (x == 0) out.push_back(std::move(path));
    }
  }
  return out;
}

inline std::string path_string(const IntPath& path) {
  std::string s = "0";
  for (auto x : path) s += ' ' + std::to_string(x);
  return s;
}

/// Visits of a closed path to each site at times 0..n-1. Every visit
/// contributes two switches to the lamp at that site.
inline std::map<std::int64_t, std::uint64_t> switch_visits(const IntPath& path) {
  std::map<std::int64_t, std::uint64_t> visits;
  ++visits[0];
  for (std::size_t i = 0; i + 1 < path.size(); ++i) ++visits[path[i]];
  return visits;
}

namespace detail {

struct Enumerator {
  const RootedGraph& graph;
  const SwitchMeasure& measure;
  std::vector<Vertex> vertices;  // positions at times 1..n

  Enumerator(const RootedGraph& g, const SwitchMeasure& m, const IntPath& path)
      : graph(g), measure(m) {
    const auto radius = static_cast<std::int64_t>(g.root());
    for (auto x : path) {
      if (x < -radius || x > radius) throw DomainError("path leaves the enumeration window");
      vertices.push_back(static_cast<Vertex>(x + radius));
    }
  }

  std::uint64_t draw_count() const {
    std::uint64_t total = 1;
    const auto s = measure.support().size();
    for (std::size_t i = 0; i < 2 * vertices.size(); ++i) {
      if (total > (std::uint64_t{1} << 40) / s) throw DomainError("enumeration too large");
      total *= s;
    }
    return total;
  }

  // Replays draw sequence `code` (mixed radix over the support) and returns
  // the final state and its probability.
  WalkerState replay(std::uint64_t code, double& weight) const {
    const auto atoms = measure.support();
    WalkerState state = WalkerState::identity(graph, measure.group());
    weight = 1.0;
    auto next_draw = [&] {
      const auto& atom = atoms[code % atoms.size()];
      code /= atoms.size();
      weight *= atom.probability;
      return atom.element;
    };
    for (Vertex v : vertices) {
      const LampElement u = next_draw();
      const LampElement w = next_draw();
      apply_step(state, {u, v, w});
    }
    return state;
  }
};

inline RootedGraph window_for(const std::vector<IntPath>& paths) {
  std::int64_t reach = 1;
  for (const auto& p : paths)
    for (auto x : p) reach = std::max(reach, x < 0 ? -x : x);
  return build_line_graph(static_cast<int>(reach + 1));
}

}  // namespace detail

/// One enumerated path of the uniform-lamp oracle.
struct UniformPathCase {
  IntPath path;
  std::int64_t max_pos;
  std::int64_t min_pos;
  std::uint64_t draws;           // |F|^(2n)
  std::uint64_t identity_draws;  // draw sequences ending at the identity
  std::uint64_t expected_identity_draws;
  /// Every lamp configuration on [min, max] is reached equally often and
  /// no lamp outside it is ever lit.
  bool lamps_uniform;

  bool pass() const { return identity_draws == expected_identity_draws && lamps_uniform; }
};

/// Uniform lamps on Z/order: for every closed path of length <= max_len,
/// counts draw sequences returning to the identity and compares with
/// |F|^(2n) * |F|^-(max - min + 1). Integer arithmetic, no tolerance.
inline std::vector<UniformPathCase> uniform_extremes_oracle(int max_len, std::int64_t order) {
  const LampGroup group = LampGroup::cyclic(order);
  const SwitchMeasure measure = make_uniform_measure(group);
  const auto paths = closed_paths(max_len);
  const RootedGraph graph = detail::window_for(paths);
  const auto radius = static_cast<std::int64_t>(graph.root());
  std::vector<UniformPathCase> out;
  for (const auto& path : paths) {
    detail::Enumerator e(graph, measure, path);
    const auto [mn, mx] = std::minmax_element(path.begin(), path.end());
    UniformPathCase c{path, *mx, std::min<std::int64_t>(*mn, 0), e.draw_count(), 0, 0, true};
    const auto width = static_cast<int>(c.max_pos - c.min_pos + 1);
    std::uint64_t configs = 1;
    for (int i = 0; i < width; ++i) configs *= static_cast<std::uint64_t>(order);
    c.expected_identity_draws = c.draws / configs;
    std::map<std::vector<LampElement>, std::uint64_t> histogram;
    for (std::uint64_t code = 0; code < c.draws; ++code) {
      double w;
      const WalkerState s = e.replay(code, w);
      if (s.is_identity(graph)) ++c.identity_draws;
      std::vector<LampElement> window;
      for (std::int64_t x = c.min_pos; x <= c.max_pos; ++x)
        window.push_back(s.lamps.at(static_cast<Vertex>(x + radius)));
      std::size_t lit_inside = 0;
      for (auto l : window) lit_inside += l != 0;
      if (lit_inside != s.lamps.non_identity_count()) c.lamps_uniform = false;
      ++histogram[window];
    }
    if (histogram.size() != configs) c.lamps_uniform = false;
    for (const auto& [config, count] : histogram)
      if (count != c.expected_identity_draws) c.lamps_uniform = false;
    out.push_back(std::move(c));
  }
  return out;
}

/// One enumerated path of the general-measure oracle.
struct MeasurePathCase {
  IntPath path;
  double enumerated;  // total probability of draw sequences ending at id
  double product;     // prod over sites of mu^{*2c}(id), c = switch visits

  double error() const { return std::abs(enumerated - product); }
};

/// Weighted enumeration of every draw sequence along each closed path of
/// length <= max_len under `measure`, against the product of convolution
/// powers at the identity.
inline std::vector<MeasurePathCase> measure_product_oracle(int max_len, const SwitchMeasure& measure) {
  const auto paths = closed_paths(max_len);
  const RootedGraph graph = detail::window_for(paths);
  std::vector<MeasurePathCase> out;
  for (const auto& path : paths) {
    detail::Enumerator e(graph, measure, path);
    const std::uint64_t draws = e.draw_count();
    double enumerated = 0.0;
    for (std::uint64_t code = 0; code < draws; ++code) {
      double w;
      if (e.replay(code, w).is_identity(graph)) enumerated += w;
    }
    std::vector<std::pair<Vertex, std::uint64_t>> counts;
    for (const auto& [x, c] : switch_visits(path)) counts.emplace_back(static_cast<Vertex>(x), c);
    out.push_back({path, enumerated, exact::ret_prob_given_local_times(counts, measure)});
  }
  return out;
}

/// The symmetric three-point integer-lamp measure used by the oracle suite.
inline SwitchMeasure three_point_integer_measure() {
  return SwitchMeasure(LampGroup::integers(), {{-1, 0.25}, {0, 0.5}, {1, 0.25}});
}

}  // namespace lamplighter::verify
