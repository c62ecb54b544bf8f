#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lamplighter/error.hpp"

namespace lamplighter {

using Vertex = std::uint32_t;

/// A connected, locally finite graph with a distinguished root.
///
/// Distances to the root are computed once by breadth-first search and each
/// adjacency list is ordered so that the neighbors one step closer to the
/// root come first. A graph may be the truncation of an infinite graph at a
/// given radius; vertices at that distance form its boundary, where
/// transitions are undefined.
///
/// Some graphs carry a projection to Z (the line graph, Gamma_m); walk
/// statistics use it for signed extremes.
class RootedGraph {
 public:
  struct Edge {
    Vertex a;
    Vertex b;
  };

  RootedGraph(std::size_t vertex_count, const std::vector<Edge>& edges, Vertex root,
              std::optional<int> truncation_radius = std::nullopt,
              std::vector<std::int64_t> projection = {}, std::vector<std::string> labels = {})
      : root_(root),
        truncation_radius_(truncation_radius),
        projection_(std::move(projection)),
        labels_(std::move(labels)) {
    if (vertex_count == 0) throw ConfigError("graph has no vertices");
    if (root >= vertex_count) throw ConfigError("root is not a vertex of the graph");
    if (!projection_.empty() && projection_.size() != vertex_count)
      throw ConfigError("projection size does not match vertex count");
    if (!labels_.empty() && labels_.size() != vertex_count)
      throw ConfigError("label count does not match vertex count");

    std::vector<std::vector<Vertex>> adjacency(vertex_count);
    for (const auto& e : edges) {
      if (e.a >= vertex_count || e.b >= vertex_count) throw ConfigError("edge endpoint out of range");
      if (e.a == e.b) throw ConfigError("self-loops are not supported");
      adjacency[e.a].push_back(e.b);
      adjacency[e.b].push_back(e.a);
    }
    for (auto& list : adjacency) {
      std::sort(list.begin(), list.end());
      if (std::adjacent_find(list.begin(), list.end()) != list.end())
        throw ConfigError("parallel edges are not supported");
    }

    constexpr int unreached = std::numeric_limits<int>::max();
    distance_.assign(vertex_count, unreached);
    distance_[root_] = 0;
    std::queue<Vertex> frontier;
    frontier.push(root_);
    while (!frontier.empty()) {
      const Vertex v = frontier.front();
      frontier.pop();
      for (Vertex w : adjacency[v]) {
        if (distance_[w] == unreached) {
          distance_[w] = distance_[v] + 1;
          frontier.push(w);
        }
      }
    }
    if (std::find(distance_.begin(), distance_.end(), unreached) != distance_.end())
      throw ConfigError("graph is not connected to its root");

    offsets_.reserve(vertex_count + 1);
    offsets_.push_back(0);
    closer_count_.reserve(vertex_count);
    for (Vertex v = 0; v < vertex_count; ++v) {
      auto& list = adjacency[v];
      std::stable_partition(list.begin(), list.end(),
                            [&](Vertex w) { return distance_[w] + 1 == distance_[v]; });
      const auto closer = std::count_if(list.begin(), list.end(),
                                        [&](Vertex w) { return distance_[w] + 1 == distance_[v]; });
      closer_count_.push_back(static_cast<std::uint32_t>(closer));
      neighbors_.insert(neighbors_.end(), list.begin(), list.end());
      offsets_.push_back(neighbors_.size());
      max_degree_ = std::max(max_degree_, list.size());
      max_distance_ = std::max(max_distance_, distance_[v]);
    }
    edge_count_ = edges.size();
  }

  std::size_t vertex_count() const noexcept { return distance_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }
  Vertex root() const noexcept { return root_; }
  int distance(Vertex v) const { return distance_[v]; }
  std::span<const int> distances() const noexcept { return distance_; }

  /// Neighbors of `v`; the first closer_count(v) of them are one step closer to the root.
  std::span<const Vertex> neighbors(Vertex v) const {
    return {neighbors_.data() + offsets_[v], neighbors_.data() + offsets_[v + 1]};
  }
  std::size_t degree(Vertex v) const { return offsets_[v + 1] - offsets_[v]; }
  std::size_t closer_count(Vertex v) const { return closer_count_[v]; }
  std::size_t max_degree() const noexcept { return max_degree_; }
  int max_distance() const noexcept { return max_distance_; }

  std::optional<int> truncation_radius() const noexcept { return truncation_radius_; }
  bool is_boundary(Vertex v) const {
    return truncation_radius_ && distance_[v] >= *truncation_radius_;
  }

  bool has_projection() const noexcept { return !projection_.empty(); }
  std::int64_t projection(Vertex v) const { return projection_[v]; }

  std::string label(Vertex v) const {
    return labels_.empty() ? std::to_string(v) : labels_[v];
  }
  std::optional<Vertex> find_label(const std::string& label) const {
    for (Vertex v = 0; v < vertex_count(); ++v)
      if (this->label(v) == label) return v;
    return std::nullopt;
  }

  std::vector<Vertex> sphere(int r) const {
    require_exact_ball(r);
    std::vector<Vertex> out;
    for (Vertex v = 0; v < vertex_count(); ++v)
      if (distance_[v] == r) out.push_back(v);
    return out;
  }

  std::size_t sphere_size(int r) const { return sphere(r).size(); }

  std::size_t ball_size(int r) const {
    if (r < 0) return 0;
    require_exact_ball(r);
    return static_cast<std::size_t>(
        std::count_if(distance_.begin(), distance_.end(), [r](int d) { return d <= r; }));
  }

  /// |∂_E B_r|: edges with one endpoint at distance <= r and the other outside.
  std::size_t edge_boundary_size(int r) const {
    if (r < 0) throw DomainError("negative radius");
    if (truncation_radius_ && r >= *truncation_radius_)
      throw DomainError("edge boundary at or beyond the truncation radius is not known");
    std::size_t count = 0;
    for (Vertex v = 0; v < vertex_count(); ++v) {
      if (distance_[v] != r) continue;
      for (Vertex w : neighbors(v))
        if (distance_[w] == r + 1) ++count;
    }
    return count;
  }

 private:
  void require_exact_ball(int r) const {
    if (r < 0) throw DomainError("negative radius");
    if (truncation_radius_ && r > *truncation_radius_)
      throw DomainError("radius exceeds the truncation radius");
  }

  Vertex root_;
  std::optional<int> truncation_radius_;
  std::vector<std::int64_t> projection_;
  std::vector<std::string> labels_;
  std::vector<int> distance_;
  std::vector<std::size_t> offsets_;
  std::vector<Vertex> neighbors_;
  std::vector<std::uint32_t> closer_count_;
  std::size_t max_degree_ = 0;
  std::size_t edge_count_ = 0;
  int max_distance_ = 0;
};

/// Path graph on {-radius..radius} rooted at 0; vertex index is x + radius.
inline RootedGraph build_line_graph(int radius) {
  if (radius < 1) throw DomainError("line graph radius must be >= 1");
  const auto n = static_cast<std::size_t>(2 * radius + 1);
  std::vector<RootedGraph::Edge> edges;
  std::vector<std::int64_t> projection(n);
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    projection[i] = static_cast<std::int64_t>(i) - radius;
    labels[i] = std::to_string(projection[i]);
    if (i + 1 < n) edges.push_back({static_cast<Vertex>(i), static_cast<Vertex>(i + 1)});
  }
  return RootedGraph(n, edges, static_cast<Vertex>(radius), radius, std::move(projection),
                     std::move(labels));
}

namespace detail {
inline bool is_split_point(std::int64_t x) {
  const std::int64_t a = x < 0 ? -x : x;
  return a >= 2 && (a & (a - 1)) == 0;
}
}  // namespace detail

/// Z with every vertex ±2^i (i >= 1) replaced by m copies, each adjacent to
/// the two neighbors of the original vertex. Truncated at `radius`.
/// Unsplit vertices are labelled "x", split copies "x:j" with 1 <= j <= m.
inline RootedGraph build_gamma_m(int m, int radius) {
  if (m < 2) throw DomainError("gamma_m needs m >= 2");
  if (radius < 2) throw DomainError("gamma_m radius must be >= 2");
  std::map<std::int64_t, std::vector<Vertex>> copies;
  std::vector<std::int64_t> projection;
  std::vector<std::string> labels;
  Vertex root = 0;
  for (std::int64_t x = -radius; x <= radius; ++x) {
    auto& ids = copies[x];
    if (detail::is_split_point(x)) {
      for (int j = 1; j <= m; ++j) {
        ids.push_back(static_cast<Vertex>(projection.size()));
        projection.push_back(x);
        labels.push_back(std::to_string(x) + ":" + std::to_string(j));
      }
    } else {
      if (x == 0) root = static_cast<Vertex>(projection.size());
      ids.push_back(static_cast<Vertex>(projection.size()));
      projection.push_back(x);
      labels.push_back(std::to_string(x));
    }
  }
  std::vector<RootedGraph::Edge> edges;
  for (std::int64_t x = -radius; x < radius; ++x)
    for (Vertex a : copies[x])
      for (Vertex b : copies[x + 1]) edges.push_back({a, b});
  const auto n = projection.size();
  return RootedGraph(n, edges, root, radius, std::move(projection), std::move(labels));
}

/// Edge-list format: the first non-comment line names the root; each further
/// line holds two vertex labels joined by an edge. '#' starts a comment.
/// The graph is taken as given (no truncation boundary).
inline RootedGraph parse_edge_list(std::istream& in) {
  std::map<std::string, Vertex> index;
  std::vector<std::string> labels;
  auto intern = [&](const std::string& label) {
    auto [it, inserted] = index.emplace(label, static_cast<Vertex>(labels.size()));
    if (inserted) labels.push_back(label);
    return it->second;
  };

  std::optional<Vertex> root;
  std::vector<RootedGraph::Edge> edges;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::vector<std::string> fields;
    for (std::string t; tokens >> t;) fields.push_back(t);
    if (fields.empty()) continue;
    if (!root) {
      if (fields.size() != 1)
        throw ConfigError("edge list line " + std::to_string(line_no) + ": expected the root label");
      root = intern(fields[0]);
      continue;
    }
    if (fields.size() != 2)
      throw ConfigError("edge list line " + std::to_string(line_no) + ": expected two vertex labels");
    edges.push_back({intern(fields[0]), intern(fields[1])});
  }
  if (!root) throw ConfigError("edge list is empty");
  const std::size_t n = labels.size();
  return RootedGraph(n, edges, *root, std::nullopt, {}, std::move(labels));
}

inline RootedGraph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open edge list '" + path + "'");
  return parse_edge_list(in);
}

}  // namespace lamplighter
