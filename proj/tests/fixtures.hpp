#ifndef SANDPILE_TESTS_FIXTURES_HPP
#define SANDPILE_TESTS_FIXTURES_HPP

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "sandpile/graph.hpp"
#include "sandpile/matrix.hpp"
#include "sandpile/minimal.hpp"
#include "sandpile/oracle.hpp"

namespace fixtures {

using namespace sandpile;

// Triangle A, B, C with a double edge between A and B. C is the sink.
inline Multigraph triangle(const std::string& sink = "C") {
  GraphSpec spec;
  spec.vertices = {"A", "B", "C"};
  spec.sink = sink;
  spec.edges = {{"B", "A", 2, {"e1", "e2"}}, {"A", "C", 1, {"f"}}, {"C", "B", 1, {"g"}}};
  return build_graph(spec);
}

inline Matrix<Rational> triangle_matrix() {
  const int num[4][4] = {{2, 2, -1, -1}, {2, 2, -1, -1}, {-1, -1, 3, -2}, {-1, -1, -2, 3}};
  Matrix<Rational> m(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = Rational(num[i][j], 5);
  return m;
}

// Two adjacent sites of Z^2, each wired to the sink by its three outer edges.
inline Multigraph pair_graph() {
  GraphSpec spec;
  spec.vertices = {"x", "y", "s"};
  spec.sink = "s";
  spec.edges = {{"x", "y", 1, {}}, {"x", "s", 3, {}}, {"y", "s", 3, {}}};
  return build_graph(spec);
}

inline Multigraph box(int x0, int y0, int x1, int y1) {
  return lattice_box({x0, y0, x1, y1}).graph;
}

// Graphs small enough for every brute-force oracle.
inline std::vector<Multigraph> suite(int random_count = 12, std::uint64_t seed = 20240611) {
  std::vector<Multigraph> out = {triangle(), triangle("A"), pair_graph(), box(0, 0, 1, 1),
                                 box(0, 0, 2, 0)};
  std::mt19937_64 rng(seed);
  for (int i = 0; i < random_count; ++i) {
    const int n = 3 + static_cast<int>(rng() % 3);
    const int m = n - 1 + static_cast<int>(rng() % (10 - n));
    out.push_back(oracle::random_multigraph(rng, n, m));
  }
  return out;
}

// Every nonempty subset of the non-sink vertices, as sorted id lists.
inline std::vector<std::vector<VertexId>> vertex_subsets(const Multigraph& g) {
  const auto& vs = g.vertices();
  std::vector<std::vector<VertexId>> out;
  for (unsigned mask = 1; mask < (1u << vs.size()); ++mask) {
    std::vector<VertexId> W;
    for (std::size_t i = 0; i < vs.size(); ++i)
      if (mask >> i & 1u) W.push_back(vs[i]);
    out.push_back(W);
  }
  return out;
}

// Every stable xi on W (heights below deg_G).
inline std::vector<Subconfig> stable_on(const Multigraph& g, const std::vector<VertexId>& W) {
  std::vector<Subconfig> out;
  Subconfig xi{W, std::vector<std::int64_t>(W.size(), 0)};
  while (true) {
    out.push_back(xi);
    std::size_t i = 0;
    while (i < W.size() && ++xi.heights[i] == g.degree(W[i])) xi.heights[i++] = 0;
    if (i == W.size()) break;
  }
  return out;
}

// Number of recurrent sandpiles per restriction to W.
inline std::map<std::vector<std::int64_t>, long> marginal_counts(
    const std::vector<Sandpile>& recurrent, const std::vector<VertexId>& W) {
  std::map<std::vector<std::int64_t>, long> out;
  for (const auto& eta : recurrent) {
    std::vector<std::int64_t> key;
    for (VertexId v : W) key.push_back(eta[v]);
    ++out[key];
  }
  return out;
}

inline Rational ratio(long num, long den) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

inline std::vector<std::vector<std::size_t>> index_subsets(std::size_t n, std::size_t max_size) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  auto rec = [&](auto&& self, std::size_t start) -> void {
    out.push_back(cur);
    if (cur.size() == max_size) return;
    for (std::size_t i = start; i < n; ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

}  // namespace fixtures

#endif  // SANDPILE_TESTS_FIXTURES_HPP
