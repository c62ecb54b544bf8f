#include <cmath>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "lamplighter/rooted_graph.hpp"

using namespace lamplighter;

namespace {

// Every edge joins vertices whose distances differ by at most one, and every
// non-root vertex has a closer neighbor.
void expect_valid_layering(const RootedGraph& g) {
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    bool has_closer = false;
    for (Vertex w : g.neighbors(v)) {
      EXPECT_LE(std::abs(g.distance(v) - g.distance(w)), 1);
      has_closer |= g.distance(w) + 1 == g.distance(v);
    }
    if (v != g.root()) {
      EXPECT_TRUE(has_closer) << g.label(v);
    }
    EXPECT_LE(g.degree(v), g.max_degree());
  }
}

int floor_log2(int r) {
  int k = 0;
  while ((2 << k) <= r) ++k;
  return k;
}

}  // namespace

TEST(LineGraph, RadiusTwo) {
  const auto g = build_line_graph(2);
  EXPECT_EQ(g.vertex_count(), 5u);
  EXPECT_EQ(g.degree(g.root()), 2u);
  EXPECT_EQ(g.label(g.root()), "0");
  EXPECT_EQ(g.projection(g.root()), 0);
  expect_valid_layering(g);
}

TEST(LineGraph, EdgeBoundaryIsTwo) {
  const auto g = build_line_graph(12);
  for (int i = 0; i < 12; ++i) EXPECT_EQ(g.edge_boundary_size(i), 2u) << i;
  for (int r = 0; r <= 12; ++r) EXPECT_EQ(g.ball_size(r), static_cast<std::size_t>(2 * r + 1));
  EXPECT_THROW(g.edge_boundary_size(12), DomainError);
  EXPECT_THROW(g.ball_size(13), DomainError);
}

TEST(LineGraph, BoundaryVertices) {
  const auto g = build_line_graph(3);
  EXPECT_TRUE(g.is_boundary(*g.find_label("3")));
  EXPECT_TRUE(g.is_boundary(*g.find_label("-3")));
  EXPECT_FALSE(g.is_boundary(*g.find_label("2")));
}

TEST(GammaM, SplitVertexHasDegreeTwo) {
  const auto g = build_gamma_m(3, 10);
  for (const char* label : {"2:1", "2:2", "2:3", "-4:2", "8:3"}) {
    const auto v = g.find_label(label);
    ASSERT_TRUE(v) << label;
    EXPECT_EQ(g.degree(*v), 2u) << label;
  }
  const auto two = *g.find_label("2:1");
  std::set<std::string> nbrs;
  for (Vertex w : g.neighbors(two)) nbrs.insert(g.label(w));
  EXPECT_EQ(nbrs, (std::set<std::string>{"1", "3"}));
  expect_valid_layering(g);
}

// The ball of radius r contains 2r + 1 points of Z, with m - 1 extra copies
// at each of the 2 floor(log2 r) split points.
TEST(GammaM, BallSizesByEnumeration) {
  for (int m : {2, 3, 5}) {
    const auto g = build_gamma_m(m, 40);
    for (int r = 1; r <= 40; ++r)
      EXPECT_EQ(g.ball_size(r), static_cast<std::size_t>(2 * r + 1 + 2 * (m - 1) * floor_log2(r)))
          << "m=" << m << " r=" << r;
  }
  EXPECT_EQ(build_gamma_m(3, 4).ball_size(4), 17u);
}

// Every edge into or out of a split level is multiplied by m.
TEST(GammaM, EdgeBoundary) {
  const int m = 3;
  const auto g = build_gamma_m(m, 40);
  const std::set<int> wide = {1, 2, 3, 4, 7, 8, 15, 16, 31, 32};
  for (int s = 0; s < 40; ++s)
    EXPECT_EQ(g.edge_boundary_size(s), wide.count(s) ? 2u * m : 2u) << s;
}

TEST(GammaM, MaximumDegree) {
  EXPECT_EQ(build_gamma_m(3, 5).max_degree(), 6u);  // vertex 3 sees all copies of 2 and 4
  EXPECT_EQ(build_gamma_m(3, 2).max_degree(), 4u);  // vertex 1 sees 0 and three copies of 2
  EXPECT_EQ(build_gamma_m(5, 20).max_degree(), 10u);
}

TEST(GammaM, ProjectionAndDistance) {
  const auto g = build_gamma_m(4, 20);
  for (Vertex v = 0; v < g.vertex_count(); ++v) EXPECT_EQ(g.distance(v), std::abs(g.projection(v)));
  EXPECT_THROW(build_gamma_m(1, 10), DomainError);
  EXPECT_THROW(build_gamma_m(3, 1), DomainError);
}

TEST(EdgeList, ParsesRootAndEdges) {
  std::istringstream in(
      "# a square with a tail\n"
      "a\n"
      "a b\n"
      "b c   # comment\n"
      "c d\n"
      "d a\n"
      "\n"
      "c e\n");
  const auto g = parse_edge_list(in);
  EXPECT_EQ(g.vertex_count(), 5u);
  EXPECT_EQ(g.edge_count(), 5u);
  EXPECT_EQ(g.label(g.root()), "a");
  EXPECT_EQ(g.distance(*g.find_label("c")), 2);
  EXPECT_EQ(g.distance(*g.find_label("e")), 3);
  EXPECT_EQ(g.closer_count(*g.find_label("c")), 2u);
  EXPECT_FALSE(g.truncation_radius());
  expect_valid_layering(g);
}

TEST(EdgeList, Rejections) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_edge_list(in);
  };
  EXPECT_THROW(parse(""), ConfigError);
  EXPECT_THROW(parse("a b\n"), ConfigError);
  EXPECT_THROW(parse("a\na b c\n"), ConfigError);
  EXPECT_THROW(parse("a\na a\n"), ConfigError);
  EXPECT_THROW(parse("a\na b\nb a\n"), ConfigError);
  EXPECT_THROW(parse("a\na b\nc d\n"), ConfigError);
  EXPECT_THROW(load_edge_list("/nonexistent/edges.txt"), ConfigError);
}

TEST(RootedGraph, SphereSizes) {
  const auto g = build_gamma_m(3, 10);
  EXPECT_EQ(g.sphere_size(0), 1u);
  EXPECT_EQ(g.sphere_size(2), 6u);
  EXPECT_EQ(g.sphere_size(3), 2u);
}
