#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>
#include <numbers>

#include "doctest.h"
#include "fixtures.hpp"
#include "sandpile/bijection.hpp"
#include "sandpile/oracle.hpp"
#include "sandpile/transfer_current.hpp"
#include "sandpile/z2.hpp"

using namespace sandpile;

namespace {

const PotentialKernelTable& kernel() {
  static const PotentialKernelTable table(40);
  return table;
}

double chi_square_critical(double dof) {
  return boost::math::quantile(boost::math::chi_squared(dof), 0.999);
}

EdgeId box_edge(const LatticeBox& box, Point p, Point q) {
  return box.graph.edge_at(lattice_edge_label({p, q}));
}

}  // namespace

TEST_CASE("potential kernel values") {
  const auto& a = kernel();
  CHECK(a(0, 0) == 0.0);
  CHECK(a(1, 0) == 1.0);
  CHECK(a.rational_part(1, 1) == 0);
  CHECK(a.inverse_pi_part(1, 1) == 4);
  CHECK(a(1, 1) == doctest::Approx(4.0 / std::numbers::pi).epsilon(1e-15));
  CHECK(a.rational_part(2, 0) == 4);
  CHECK(a.inverse_pi_part(2, 0) == -8);
  CHECK(a.decimal(1, 1, 20) == "1.27323954473516268615");
  double mean = 0.0;
  for (const Point s : kLatticeSteps) mean += a.at(s) / 4.0;
  CHECK(mean == doctest::Approx(1.0));
  for (int x = -6; x <= 6; ++x)
    for (int y = -6; y <= 6; ++y) {
      CHECK(a(x, y) == a(y, x));
      CHECK(a(x, y) == a(-x, y));
      if (x == 0 && y == 0) continue;
      double m = 0.0;
      for (const Point s : kLatticeSteps) m += a(x + s.x, y + s.y) / 4.0;
      CHECK(m == doctest::Approx(a(x, y)).epsilon(1e-13));
    }
  CHECK(a.harmonic_defect() < 1e-20);
  CHECK(a.rim_deviation() < std::pow(40.0, -4));
  CHECK(std::abs(a(40, 13) - PotentialKernelTable::asymptotic(40, 13)) < 1e-6);
  CHECK_THROWS(a(41, 0));
  CHECK_THROWS(PotentialKernelTable(0));
  CHECK_THROWS_AS(PotentialKernelTable(1001), PrecisionError);
}

TEST_CASE("limiting transfer current") {
  const auto& a = kernel();
  const LatticeEdge e{{0, 0}, {1, 0}}, f{{0, 0}, {0, 1}};
  const LatticeEdge both[] = {e, f};
  const Z2TransferCurrent y = z2_transfer_current(a, both);
  CHECK(y.Y(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(y.Y(1, 1) == doctest::Approx(0.5).epsilon(1e-14));

  const LatticeBox box = lattice_box(centered_box(64));
  const EdgeId ids[] = {box_edge(box, e.tail, e.head), box_edge(box, f.tail, f.head)};
  const auto finite = transfer_current_float(box.graph, ids);
  CHECK(std::abs(finite.Y(0, 1) - y.Y(0, 1)) < 1e-4);
  CHECK(std::abs(finite.Y(1, 0) - y.Y(1, 0)) < 1e-4);

  double previous = 1.0;
  for (int d : {8, 16, 32}) {
    const LatticeEdge far[] = {e, {{d, 0}, {d + 1, 0}}};
    const double v = std::abs(z2_transfer_current(a, far).Y(0, 1));
    CHECK(v < previous);
    previous = v;
  }
}

TEST_CASE("finite-box transfer current converges to the limit") {
  const auto& a = kernel();
  std::vector<LatticeEdge> edges;
  for (int x = -2; x <= 2; x += 2)
    for (int y = -2; y <= 2; y += 2) {
      edges.push_back({{x, y}, {x + 1, y}});
      edges.push_back({{x, y}, {x, y + 1}});
    }
  const Z2TransferCurrent limit = z2_transfer_current(a, edges);
  std::map<int, Matrix<double>> finite;
  for (int side : {64, 128}) {
    const LatticeBox box = lattice_box(centered_box(side));
    std::vector<EdgeId> ids;
    for (const auto& le : edges) ids.push_back(box_edge(box, le.tail, le.head));
    finite[side] = transfer_current_float(box.graph, ids).Y;
  }
  for (std::size_t i = 0; i < edges.size(); ++i)
    for (std::size_t j = 0; j < edges.size(); ++j) {
      const double y64 = finite[64](i, j), y128 = finite[128](i, j);
      const bool perpendicular =
          (edges[i].head.x - edges[i].tail.x) != (edges[j].head.x - edges[j].tail.x);
      if (perpendicular) CHECK(std::abs(y64 - limit.Y(i, j)) < 1e-4);
      const double extrapolated = (4.0 * y128 - y64) / 3.0;
      CHECK(std::abs(extrapolated - limit.Y(i, j)) < 1e-5);
      CHECK(std::abs(y128 - limit.Y(i, j)) <= std::abs(y64 - limit.Y(i, j)) + 1e-12);
    }
}

TEST_CASE("p0 three ways") {
  const double target = 2.0 / (std::numbers::pi * std::numbers::pi) -
                        4.0 / (std::numbers::pi * std::numbers::pi * std::numbers::pi);
  CHECK(p0_closed_form() == doctest::Approx(target).epsilon(1e-15));
  CHECK(std::abs(p0_z2(kernel()) - target) < 1e-9);
  const LatticeBox box = lattice_box(centered_box(64));
  const Subconfig xi{{box.vertex({0, 0})}, {0}};
  const double finite = minimal_probability(box.graph, xi, Backend::float64).value;
  CHECK(std::abs(finite - target) < 1e-3);
}

TEST_CASE("pair correlations") {
  const auto& a = kernel();
  const double p0 = p0_z2(a);
  CHECK(pair_correlation_zero_height(a, {0, 0}, {0, 0}) == doctest::Approx(p0 - p0 * p0));
  CHECK(pair_correlation_zero_height(a, {0, 0}, {1, 0}) == doctest::Approx(-p0 * p0));

  const Point W[] = {{0, 0}, {2, 0}};
  const std::int64_t zeros[] = {0, 0};
  const double limit = z2_minimal_probability(a, W, zeros).value;
  const LatticeBox box = lattice_box(centered_box(48));
  const Subconfig xi{{box.vertex({0, 0}), box.vertex({2, 0})}, {0, 0}};
  CHECK(std::abs(minimal_probability(box.graph, xi, Backend::float64).value - limit) < 1e-4);

  const int ds[] = {4, 8, 16, 32};
  const DecayExperiment decay = decay_experiment(a, ds);
  CHECK(decay.rows.size() == 4);
  CHECK(decay.slope == doctest::Approx(-4.0).epsilon(0.1));
}

TEST_CASE("wired graph of a ring has its hole filled") {
  std::vector<Point> ring;
  for (int x = -1; x <= 1; ++x)
    for (int y = -1; y <= 1; ++y)
      if (x != 0 || y != 0) ring.push_back({x, y});
  const Multigraph g = z2_wired_graph(ring);
  CHECK(g.num_vertices() == 10);
  CHECK(g.find("0,0"));
  for (VertexId v : g.vertices()) CHECK(g.degree(v) == 4);
}

TEST_CASE("wilson sampler is uniform") {
  std::mt19937_64 rng(12);
  const LatticeBox one = lattice_box({0, 0, 0, 0});
  std::map<EdgeId, int> first;
  for (int i = 0; i < 4000; ++i) ++first[wilson_ust(one.graph, rng).parent_edge[0]];
  CHECK(first.size() == 4);
  for (auto [e, c] : first) CHECK(std::abs(c - 1000) < 4 * std::sqrt(750.0));

  const Multigraph g = fixtures::box(0, 0, 1, 1);
  const auto trees = oracle::enumerate_spanning_trees(g);
  REQUIRE(trees.size() == 192);
  std::map<std::vector<EdgeId>, long> freq;
  const long n = 100000;
  for (long i = 0; i < n; ++i) {
    const RootedSpanningTree t = wilson_ust(g, rng);
    ++freq[tree_edges(t)];
  }
  CHECK(freq.size() == 192);
  double chi = 0.0;
  const double expected = static_cast<double>(n) / 192.0;
  for (const auto& t : trees) {
    const double c = static_cast<double>(freq[t]);
    chi += (c - expected) * (c - expected) / expected;
  }
  CHECK(chi < chi_square_critical(191));
}

TEST_CASE("central edge frequency matches the transfer current diagonal") {
  const LatticeBox box = lattice_box(centered_box(16));
  const EdgeId e = box_edge(box, {0, 0}, {1, 0});
  const EdgeId ids[] = {e};
  const double y = transfer_current_float(box.graph, ids).Y(0, 0);
  std::mt19937_64 rng(5);
  const int n = 20000;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    const RootedSpanningTree t = wilson_ust(box.graph, rng);
    validate_tree(box.graph, t);
    const auto edges = tree_edges(t);
    hits += std::binary_search(edges.begin(), edges.end(), e);
  }
  const Estimate est = bernoulli_estimate(static_cast<std::uint64_t>(hits), n);
  CHECK(std::abs(est.value - y) < 3 * est.std_error);
}

TEST_CASE("descendants of trivial sets") {
  std::mt19937_64 rng(1);
  const LatticeBox box = lattice_box(centered_box(8));
  const RootedSpanningTree t = wilson_ust(box.graph, rng);
  CHECK(descendants(box.graph, t, {}).empty());
  CHECK(descendants(box.graph, t, box.graph.vertices()).size() == 64);
}

TEST_CASE("wired shells") {
  const Point o{0, 0};
  const Point single[] = {o};
  const auto shell = wired_shell(single, single);
  REQUIRE(shell);
  CHECK(shell->num_vertices() == 2);
  CHECK(shell->degree(shell->at("0,0")) == 4);

  const Point star[] = {o, {1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  CHECK_FALSE(wired_shell(star, single));
  const Point pair[] = {o, {1, 0}};
  const auto p = wired_shell(pair, single);
  REQUIRE(p);
  CHECK(p->degree(p->at("0,0")) == 4);
  CHECK(p->degree(p->at("1,0")) == 1);
  const Point outside[] = {{5, 5}};
  CHECK_THROWS(wired_shell(pair, outside));
}

TEST_CASE("lattice animals") {
  const auto animals = lattice_animals(5);
  CHECK(animals.size() == 414);
  std::map<std::size_t, int> by_size;
  for (const auto& w : animals) ++by_size[w.size()];
  CHECK(by_size[1] == 1);
  CHECK(by_size[2] == 4);
  CHECK(by_size[3] == 18);
  CHECK(by_size[4] == 76);
  CHECK(by_size[5] == 315);
}

TEST_CASE("p_W for a single site against exact tree counting") {
  const LatticeBox box = lattice_box(centered_box(3));
  const Point o{0, 0};
  const Point W[] = {o};
  long good = 0;
  const auto trees = oracle::enumerate_spanning_trees(box.graph);
  for (const auto& edges : trees)
    good += event_no_edge_into(box, orient_tree(box.graph, edges), W);
  const double exact = static_cast<double>(good) / static_cast<double>(trees.size());
  const PWEstimate est = estimate_pW(W, 3, 20000, 9, 1);
  CHECK(std::abs(est.box.value - exact) < 4 * est.box.std_error);
  CHECK(est.half_box.samples == 0);
  const Point corner[] = {{1, 1}};
  CHECK_THROWS(estimate_pW(corner, 3, 10, 1, 1));
}

TEST_CASE("series partial sums are monotone and bounded") {
  const auto results = height_prob_series_all(4, 16, 3000, 21, 1);
  REQUIRE(results.size() == 4);
  for (const auto& r : results) {
    for (std::size_t m = 1; m < r.levels.size(); ++m)
      CHECK(r.levels[m].partial_sum.value >= r.levels[m - 1].partial_sum.value);
    for (const auto& t : r.terms) {
      CHECK(t.factor >= 0);
      CHECK(t.factor <= 1);
      CHECK(t.shell_prob <= 1);
    }
  }
  for (std::size_t m = 0; m < results[0].levels.size(); ++m) {
    double sum = 0.0;
    for (const auto& r : results) sum += r.levels[m].partial_sum.value;
    CHECK(sum == doctest::Approx(results[0].levels[m].mass.value));
    CHECK(sum <= 1.0 + 1e-12);
  }
  CHECK(results[0].terms.size() == 1);
  CHECK(results[0].terms[0].W.size() == 1);
  CHECK(results[0].terms[0].shell_prob == Rational(1, 4));
  CHECK_THROWS(height_prob_series(4, 2, 16, 10, 1, 1));
}

TEST_CASE("sampling does not depend on the worker count") {
  const auto one = height_frequencies(12, 300, 77, 1);
  const auto three = height_frequencies(12, 300, 77, 3);
  for (std::size_t k = 0; k < 4; ++k) CHECK(one[k].value == three[k].value);
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  const auto d = descendant_size_distribution(12, 10, 200, 3, 2);
  double total = 0.0;
  for (const auto& e : d) total += e.value;
  CHECK(total == doctest::Approx(1.0));
  CHECK(d[0].value == 0.0);
}
