#include <cmath>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "lamplighter/base_walk.hpp"

using namespace lamplighter;

namespace {

std::map<std::string, double> by_label(const RootedGraph& g, const std::vector<VertexTransition>& t) {
  std::map<std::string, double> out;
  for (const auto& [v, q] : t) out[g.label(v)] = q;
  return out;
}

}  // namespace

TEST(BiasParams, RoundTrip) {
  for (double p : {0.51, 0.6, 0.75, 0.8, 0.9, 0.99}) {
    const auto b = BiasParams::from_p(p);
    EXPECT_NEAR(b.lambda(), p / (1 - p), 1e-12 * b.lambda());
    EXPECT_NEAR(BiasParams::from_lambda(b.lambda()).p(), p, 1e-12);
    EXPECT_NEAR(b.p() + b.q(), 1.0, 1e-15);
    EXPECT_GT(b.lambda(), 1.0);
  }
  EXPECT_THROW(BiasParams::from_p(0.5), DomainError);
  EXPECT_THROW(BiasParams::from_p(1.0), DomainError);
  EXPECT_THROW(BiasParams::from_lambda(1.0), DomainError);
}

TEST(BiasedStep, SpecExamples) {
  const auto a = biased_step_distribution(3, BiasParams::from_p(0.8));
  EXPECT_EQ(a[0].target, 2);
  EXPECT_DOUBLE_EQ(a[0].probability, 0.8);
  EXPECT_EQ(a[1].target, 4);
  EXPECT_NEAR(a[1].probability, 0.2, 1e-15);
  const auto b = biased_step_distribution(0, BiasParams::from_p(0.9));
  EXPECT_EQ(b[0].probability, 0.5);
  EXPECT_EQ(b[1].probability, 0.5);
  const auto c = biased_step_distribution(-2, BiasParams::from_p(0.75));
  EXPECT_EQ(c[0].target, -3);
  EXPECT_DOUBLE_EQ(c[0].probability, 0.25);
  EXPECT_EQ(c[1].target, -1);
  EXPECT_DOUBLE_EQ(c[1].probability, 0.75);
}

TEST(Homesick, LineExamples) {
  const auto g = build_line_graph(10);
  const auto t = by_label(g, homesick_transition(g, *g.find_label("5"), HomesickParams(3.0)));
  EXPECT_DOUBLE_EQ(t.at("4"), 0.75);
  EXPECT_DOUBLE_EQ(t.at("6"), 0.25);
  const auto r = by_label(g, homesick_transition(g, g.root(), HomesickParams(7.0)));
  EXPECT_EQ(r.at("-1"), 0.5);
  EXPECT_EQ(r.at("1"), 0.5);
}

TEST(Homesick, LambdaOneIsSimpleRandomWalk) {
  const auto g = build_gamma_m(3, 12);
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    if (g.is_boundary(v)) continue;
    for (const auto& [w, q] : homesick_transition(g, v, HomesickParams(1.0)))
      EXPECT_DOUBLE_EQ(q, 1.0 / g.degree(v));
  }
}

// On the line the homesick transition matrix is the biased-walk matrix.
TEST(Homesick, LineEqualsBiasedWalkExactly) {
  const int radius = 15;
  const auto g = build_line_graph(radius);
  for (double p : {0.6, 0.75, 0.8, 0.9}) {
    const auto bias = BiasParams::from_p(p);
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
      if (g.is_boundary(v)) continue;
      const auto homesick = homesick_transition(g, v, HomesickParams(bias.lambda()));
      const auto biased = biased_step_distribution(g.projection(v), BiasParams::from_lambda(bias.lambda()));
      ASSERT_EQ(homesick.size(), 2u);
      for (const auto& [w, q] : homesick) {
        const auto x = g.projection(w);
        const double expected = x == biased[0].target ? biased[0].probability : biased[1].probability;
        EXPECT_EQ(q, expected) << "p=" << p << " x=" << g.projection(v);
      }
    }
  }
}

TEST(Homesick, SumsToOneOnNeighbors) {
  const auto g = build_gamma_m(4, 30);
  for (double lambda : {1.0, 1.5, 3.0, 8.0}) {
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
      if (g.is_boundary(v)) continue;
      double total = 0.0;
      for (const auto& [w, q] : homesick_transition(g, v, HomesickParams(lambda))) {
        total += q;
        EXPECT_EQ(std::abs(g.distance(w) - g.distance(v)), 1);
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

// The walk is the electrical network with resistance lambda^{min(d(v), d(w))}
// on edge {v, w}: c(v) T(v, w) = c(w) T(w, v).
TEST(Homesick, DetailedBalance) {
  std::istringstream in("o\no a\no b\na b\na c\nb c\nc d\nb e\ne d\nd f\n");
  const auto edge_graph = parse_edge_list(in);
  for (const RootedGraph* g : {&edge_graph}) {
    for (double lambda : {1.0, 2.0, 5.5}) {
      auto conductance = [&](Vertex v, Vertex w) {
        return std::pow(lambda, -std::min(g->distance(v), g->distance(w)));
      };
      auto total = [&](Vertex v) {
        double c = 0;
        for (Vertex w : g->neighbors(v)) c += conductance(v, w);
        return c;
      };
      for (Vertex v = 0; v < g->vertex_count(); ++v)
        for (const auto& [w, q] : homesick_transition(*g, v, HomesickParams(lambda))) {
          double back = 0;
          for (const auto& [u, r] : homesick_transition(*g, w, HomesickParams(lambda)))
            if (u == v) back = r;
          EXPECT_NEAR(total(v) * q, total(w) * back, 1e-12);
          EXPECT_NEAR(total(v) * q, conductance(v, w), 1e-12);
        }
    }
  }
  const auto gamma = build_gamma_m(3, 20);
  const double lambda = 3.0;
  for (Vertex v = 0; v < gamma.vertex_count(); ++v) {
    if (gamma.is_boundary(v)) continue;
    double c = 0;
    for (Vertex w : gamma.neighbors(v)) c += std::pow(lambda, -std::min(gamma.distance(v), gamma.distance(w)));
    for (const auto& [w, q] : homesick_transition(gamma, v, HomesickParams(lambda)))
      EXPECT_NEAR(c * q, std::pow(lambda, -std::min(gamma.distance(v), gamma.distance(w))), 1e-12);
  }
}

TEST(Homesick, BoundaryQueryThrows) {
  const auto g = build_line_graph(4);
  EXPECT_THROW(homesick_transition(g, *g.find_label("4"), HomesickParams(2.0)), TruncationError);
  EXPECT_NO_THROW(homesick_transition(g, *g.find_label("3"), HomesickParams(2.0)));
}

TEST(HomesickWalk, StepFrequenciesMatchTransition) {
  const auto g = build_gamma_m(3, 10);
  const HomesickWalk walk(g, HomesickParams(2.0));
  const Vertex one = *g.find_label("1");
  Xoshiro256 rng(11);
  std::map<Vertex, int> counts;
  const int n = 300'000;
  for (int i = 0; i < n; ++i) ++counts[walk.step(one, rng)];
  for (const auto& [w, q] : homesick_transition(g, one, HomesickParams(2.0)))
    EXPECT_NEAR(counts[w] / double(n), q, 4.0 * std::sqrt(q * (1 - q) / n)) << g.label(w);
  EXPECT_EQ(counts.size(), 4u);
}

TEST(HomesickWalk, ThrowsWhenLandingOnBoundary) {
  const auto g = build_line_graph(1);
  const HomesickWalk walk(g, HomesickParams(2.0));
  Xoshiro256 rng(1);
  EXPECT_THROW(walk.step(g.root(), rng), TruncationError);
}

TEST(TruncationRadius, DefaultRule) {
  EXPECT_EQ(default_truncation_radius(2.0, 1000.0), 399);
  EXPECT_EQ(default_truncation_radius(1e30, 100), 8);
  EXPECT_THROW(default_truncation_radius(1.0, 100), DomainError);
}
