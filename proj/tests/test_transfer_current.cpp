#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "sandpile/oracle.hpp"
#include "sandpile/transfer_current.hpp"

using namespace sandpile;

TEST_CASE("double-edge triangle transfer current, exactly") {
  for (const char* sink : {"A", "B", "C"}) {
    const Multigraph g = fixtures::triangle(sink);
    const EdgeId order[] = {g.edge_at("e1"), g.edge_at("e2"), g.edge_at("f"), g.edge_at("g")};
    const auto y = transfer_current_exact(g, order);
    CHECK(y.Y == fixtures::triangle_matrix());
    const auto yf = transfer_current_float(g, order);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) CHECK(yf.Y(i, j) == doctest::Approx(y.Y(i, j).get_d()));
  }
}

TEST_CASE("double-edge triangle edge marginals") {
  const Multigraph g = fixtures::triangle();
  const EdgeId order[] = {g.edge_at("e1"), g.edge_at("e2"), g.edge_at("f"), g.edge_at("g")};
  const auto y = transfer_current_exact(g, order);
  const std::size_t e1[] = {0}, fg[] = {2, 3}, e12[] = {0, 1};
  CHECK(prob_edges_present(y, e1) == Rational(2, 5));
  CHECK(prob_edges_present(y, e12) == 0);
  CHECK(prob_edges_present(y, fg) == Rational(1, 5));
  CHECK(prob_edges_absent(y, e12) == Rational(1, 5));
  CHECK(prob_edges_absent(y, fg) == 0);
  const EdgeId both[] = {g.edge_at("e1"), g.edge_at("e2")};
  CHECK(prob_absent_exact(g, both) == Rational(1, 5));
  CHECK(prob_absent_float(g, both) == doctest::Approx(0.2));
  CHECK(prob_absent_exact(g, {}) == 1);
}

TEST_CASE("diagonal, symmetry and trace") {
  for (const auto& g : fixtures::suite(10, 21)) {
    const auto edges = all_edges(g);
    const auto y = transfer_current_exact(g, edges);
    const auto trees = oracle::enumerate_spanning_trees(g);
    for (std::size_t i = 0; i < edges.size(); ++i) {
      CHECK(y.Y(i, i) == oracle::tree_fraction(trees, {edges[i]}, {}));
      for (std::size_t j = 0; j < edges.size(); ++j) CHECK(y.Y(i, j) == y.Y(j, i));
    }
    Rational trace = 0;
    for (std::size_t i = 0; i < edges.size(); ++i) trace += y.Y(i, i);
    CHECK(trace == static_cast<long>(g.vertices().size()));
  }
}

TEST_CASE("matrix-tree theorem against enumeration") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 30; ++i) {
    const Multigraph g = oracle::random_multigraph(rng, 2 + i % 4, 1 + i % 4 + i % 3);
    CHECK(spanning_tree_count(g) == static_cast<long>(oracle::enumerate_spanning_trees(g).size()));
  }
}

TEST_CASE("float backend on a lattice box") {
  const LatticeBox box = lattice_box(centered_box(6));
  std::vector<EdgeId> some;
  for (EdgeId e = 0; e < static_cast<EdgeId>(box.graph.num_edges()); e += 7) some.push_back(e);
  const auto exact = transfer_current_exact(box.graph, some);
  const auto fl = transfer_current_float(box.graph, some);
  for (std::size_t i = 0; i < some.size(); ++i)
    for (std::size_t j = 0; j < some.size(); ++j)
      CHECK(fl.Y(i, j) == doctest::Approx(exact.Y(i, j).get_d()).epsilon(1e-12));
  const EdgeId dup[] = {0, 0};
  CHECK_THROWS(transfer_current_exact(box.graph, dup));
}
