#include <algorithm>

#include "doctest.h"
#include "fixtures.hpp"
#include "sandpile/bijection.hpp"
#include "sandpile/minimal.hpp"
#include "sandpile/oracle.hpp"
#include "sandpile/transfer_current.hpp"

using namespace sandpile;

namespace {

Subconfig on_pair(const Multigraph& g, int hx, int hy) {
  return {{g.at("x"), g.at("y")}, {hx, hy}};
}

// 3x3 wired box; W = the ring around the centre.
struct Ring {
  LatticeBox box = lattice_box({-1, -1, 1, 1});
  std::vector<VertexId> W;
  Ring() {
    for (VertexId v : box.graph.vertices())
      if (box.point(v) != Point{0, 0}) W.push_back(v);
  }
};

}  // namespace

TEST_CASE("entry points") {
  const Multigraph g = fixtures::pair_graph();
  CHECK(entry_points(g, on_pair(g, 1, 0)) == std::vector<VertexId>{g.at("x")});
  CHECK(entry_points(g, on_pair(g, 0, 0)).empty());
  const LatticeBox box = lattice_box(centered_box(3));
  const Subconfig o{{box.vertex({0, 0})}, {0}};
  CHECK(entry_points(box.graph, o) == o.W);
}

TEST_CASE("wired pair: all 16 stable xi") {
  const Multigraph g = fixtures::pair_graph();
  CHECK(is_minimal(g, on_pair(g, 1, 0)).is_minimal());
  CHECK(is_minimal(g, on_pair(g, 0, 1)).is_minimal());
  CHECK(is_minimal(g, on_pair(g, 0, 0)).verdict == Verdict::not_recurrent);
  const MinimalWitness w11 = is_minimal(g, on_pair(g, 1, 1));
  CHECK(w11.verdict == Verdict::not_minimal);
  CHECK(w11.failed_condition == 1);
  for (const auto& xi : fixtures::stable_on(g, {g.at("x"), g.at("y")}))
    CHECK(is_minimal(g, xi).is_minimal() == oracle::definitional_minimal(g, xi));
  CHECK(minimal_total_particles(g, std::vector<VertexId>{g.at("x"), g.at("y")}) == 1);
  const auto E = edge_set_E(g, on_pair(g, 1, 0));
  CHECK(E.size() == 5);
}

TEST_CASE("single site") {
  const LatticeBox box = lattice_box(centered_box(5));
  const VertexId o = box.vertex({0, 0});
  const Subconfig xi{{o}, {0}};
  CHECK(is_minimal(box.graph, xi).is_minimal());
  CHECK(minimal_total_particles(box.graph, xi.W) == 0);
  const auto E = edge_set_E(box.graph, xi);
  CHECK(E.size() == 3);
  for (EdgeId e : E) CHECK((box.graph.edge(e).tail == o || box.graph.edge(e).head == o));
  const Subconfig one{{o}, {1}};
  CHECK(is_minimal(box.graph, one).failed_condition == 2);
  CHECK_THROWS_AS(edge_set_E(box.graph, one), NotMinimalError);
}

TEST_CASE("condition (i) on a constructed counterexample") {
  const LatticeBox box = lattice_box({0, 0, 2, 0});
  const Multigraph& g = box.graph;
  // every site is an entry point, and they are adjacent
  const Subconfig xi{{g.at("0,0"), g.at("1,0"), g.at("2,0")}, {1, 2, 1}};
  const MinimalWitness w = is_minimal(g, xi);
  CHECK(w.verdict == Verdict::not_minimal);
  CHECK(w.failed_condition == 1);
  CHECK_FALSE(oracle::definitional_minimal(g, xi));
}

TEST_CASE("characterization agrees with the definition everywhere") {
  for (const auto& g : fixtures::suite(10, 31)) {
    for (const auto& W : fixtures::vertex_subsets(g)) {
      if (complement_components(g, W).size() != 1) continue;
      const auto total = minimal_total_particles(g, W);
      for (const auto& xi : fixtures::stable_on(g, W)) {
        const MinimalWitness w = is_minimal(g, xi);
        CHECK(w.is_minimal() == oracle::definitional_minimal(g, xi));
        CHECK(w.is_minimal() == oracle::eta_star_minimal(g, xi));
        CHECK(w.is_minimal() == is_generalized_minimal(g, xi).witness.is_minimal());
        if (!w.is_minimal()) continue;
        std::int64_t sum = 0;
        for (auto h : xi.heights) sum += h;
        CHECK(sum == total);
        std::size_t peeled = 0;
        for (const auto& level : w.peeling) peeled += level.size();
        CHECK(peeled == W.size());
      }
    }
  }
}

TEST_CASE("edge set and determinant on hole-free W") {
  for (const auto& g : fixtures::suite(8, 41)) {
    const auto recurrent = oracle::enumerate_recurrent(g);
    for (const auto& W : fixtures::vertex_subsets(g)) {
      if (complement_components(g, W).size() != 1) continue;
      const auto counts = fixtures::marginal_counts(recurrent, W);
      const auto in_w = vertex_mask(g, W);
      for (const auto& xi : fixtures::stable_on(g, W)) {
        if (!is_minimal(g, xi).is_minimal()) continue;
        const auto E = edge_set_E(g, xi);
        std::size_t touching = 0;
        for (const auto& e : g.edges()) touching += in_w[e.tail] || in_w[e.head];
        CHECK(E.size() == touching - W.size());
        const MinimalProbability p = minimal_probability(g, xi, Backend::exact);
        REQUIRE(p.exact);
        auto it = counts.find(xi.heights);
        const long hits = it == counts.end() ? 0 : it->second;
        CHECK(*p.exact == fixtures::ratio(hits, static_cast<long>(recurrent.size())));
        CHECK(p.value == doctest::Approx(minimal_probability(g, xi, Backend::float64).value));
      }
    }
  }
}

TEST_CASE("ring around a hole in the wired 3x3 box") {
  const Ring ring;
  const Multigraph& g = ring.box.graph;
  const auto recurrent = oracle::enumerate_recurrent(g);
  const auto counts = fixtures::marginal_counts(recurrent, ring.W);
  CHECK_THROWS(is_minimal(g, Subconfig{ring.W, std::vector<std::int64_t>(8, 0)}));
  int minimal = 0;
  for (const auto& xi : fixtures::stable_on(g, ring.W)) {
    const GeneralizedMinimalResult res = is_generalized_minimal(g, xi);
    REQUIRE(res.holes.components.size() == 1);
    if (!res.witness.is_minimal()) continue;
    ++minimal;
    CHECK(res.holes.r[0] <= 1);
    const CollapsedGraph c = hole_collapsed_graph(g, xi, res.holes);
    CHECK(c.quotient.graph.num_vertices() == 9);
    Subconfig star;
    for (VertexId v : c.quotient.graph.vertices()) {
      star.W.push_back(v);
      star.heights.push_back(c.xi[v]);
    }
    CHECK(is_minimal(c.quotient.graph, star).is_minimal());
    const auto p = minimal_probability(g, xi, Backend::exact);
    CHECK(*p.exact == fixtures::ratio(counts.at(xi.heights), static_cast<long>(recurrent.size())));
  }
  CHECK(minimal == 576);
}

TEST_CASE("collapsing without holes is plain wiring") {
  const Multigraph g = fixtures::box(0, 0, 1, 1);
  const std::vector<VertexId> W = {g.at("0,0"), g.at("1,0")};
  const Subconfig xi{W, {1, 0}};
  const GeneralizedMinimalResult res = is_generalized_minimal(g, xi);
  CHECK(res.holes.components.empty());
  const CollapsedGraph c = hole_collapsed_graph(g, xi, res.holes);
  const Quotient q = wire(g, W);
  CHECK(c.quotient.edge_origin == q.edge_origin);
  CHECK(c.quotient.vertex_map == q.vertex_map);
}

TEST_CASE("subconfig validation") {
  const Multigraph g = fixtures::pair_graph();
  CHECK_THROWS(check_subconfig(g, {{}, {}}));
  CHECK_THROWS(check_subconfig(g, {{g.at("x"), g.at("x")}, {0, 0}}));
  CHECK_THROWS(check_subconfig(g, {{g.sink()}, {0}}));
  CHECK_THROWS(check_subconfig(g, {{g.at("x")}, {0, 1}}));
  CHECK(is_minimal(g, on_pair(g, 4, 0)).verdict == Verdict::not_stable);
  CHECK(to_string(Verdict::not_minimal) == "not-minimal");
}
