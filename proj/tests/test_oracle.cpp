#include <algorithm>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "sandpile/oracle.hpp"

using namespace sandpile;

TEST_CASE("double-edge triangle has exactly five spanning trees") {
  const Multigraph g = fixtures::triangle();
  std::set<std::set<std::string>> named;
  for (const auto& t : oracle::enumerate_spanning_trees(g)) {
    std::set<std::string> s;
    for (EdgeId e : t) s.insert(g.edge(e).label);
    named.insert(s);
  }
  const std::set<std::set<std::string>> expected = {
      {"e1", "f"}, {"e1", "g"}, {"e2", "f"}, {"e2", "g"}, {"f", "g"}};
  CHECK(named == expected);
}

TEST_CASE("stable and recurrent enumeration") {
  const Multigraph g = fixtures::pair_graph();
  const auto stable = oracle::enumerate_stable(g);
  CHECK(stable.size() == 16);
  std::set<std::vector<std::int64_t>> distinct;
  for (const auto& eta : stable) distinct.insert(eta.height);
  CHECK(distinct.size() == 16);
  const auto recurrent = oracle::enumerate_recurrent(g);
  CHECK(recurrent.size() == 15);
  for (const auto& eta : stable)
    CHECK(oracle::ample_recurrent(g, eta) == oracle::burns_completely(g, eta));
}

TEST_CASE("exact stationary law is uniform on recurrent states") {
  for (const auto& g : fixtures::suite(6, 13)) {
    const auto law = oracle::exact_stationary(g);
    const auto recurrent = oracle::enumerate_recurrent(g);
    const Rational u(1, static_cast<long>(recurrent.size()));
    for (std::size_t i = 0; i < law.states.size(); ++i)
      CHECK(law.mass[i] == (oracle::burns_completely(g, law.states[i]) ? u : Rational(0)));
    const auto approx = oracle::float_stationary(g);
    for (std::size_t i = 0; i < law.states.size(); ++i)
      CHECK(approx[i] == doctest::Approx(law.mass[i].get_d()).epsilon(1e-9));
  }
}

TEST_CASE("tree fractions") {
  const Multigraph g = fixtures::triangle();
  const auto trees = oracle::enumerate_spanning_trees(g);
  const EdgeId e1 = g.edge_at("e1"), e2 = g.edge_at("e2");
  CHECK(oracle::tree_fraction(trees, {e1}, {}) == Rational(2, 5));
  CHECK(oracle::tree_fraction(trees, {}, {e1, e2}) == Rational(1, 5));
  CHECK(oracle::tree_fraction(trees, {e1, e2}, {}) == 0);
}

TEST_CASE("marginals and minimality") {
  const Multigraph g = fixtures::pair_graph();
  const Subconfig xi{{g.at("x"), g.at("y")}, {1, 0}};
  CHECK(oracle::brute_force_marginal(g, xi) == Rational(1, 15));
  CHECK(oracle::definitional_minimal(g, xi));
  CHECK(oracle::eta_star_minimal(g, xi));
  const Subconfig both{{g.at("x"), g.at("y")}, {1, 1}};
  CHECK_FALSE(oracle::definitional_minimal(g, both));
}

TEST_CASE("budgets") {
  const LatticeBox box = lattice_box(centered_box(5));
  CHECK_THROWS_AS(oracle::enumerate_stable(box.graph), oracle::BudgetExceeded);
  CHECK_THROWS_AS(oracle::enumerate_spanning_trees(box.graph), oracle::BudgetExceeded);
}

TEST_CASE("random multigraphs") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    const int n = 2 + i % 4;
    const int m = n - 1 + i % 5;
    const Multigraph g = oracle::random_multigraph(rng, n, m);
    CHECK(static_cast<int>(g.num_vertices()) == n);
    CHECK(static_cast<int>(g.num_edges()) == m);
    CHECK(g.label(g.sink()) == "s");
  }
  CHECK_THROWS(oracle::random_multigraph(rng, 4, 2));
}
