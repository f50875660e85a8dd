#include "sandpile/transfer_current.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace sandpile {

namespace {

void check_edges(const Multigraph& g, std::span<const EdgeId> edges) {
  std::vector<EdgeId> sorted(edges.begin(), edges.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("transfer current: repeated edge");
  for (EdgeId e : sorted)
    if (e < 0 || e >= static_cast<EdgeId>(g.num_edges()))
      throw std::invalid_argument("transfer current: edge out of range");
}

// Distinct non-sink endpoints, mapped to a column index.
std::vector<int> endpoint_columns(const Multigraph& g, std::span<const EdgeId> edges,
                                  std::vector<VertexId>& endpoints) {
  std::vector<int> column(g.num_vertices(), -1);
  for (EdgeId e : edges)
    for (VertexId v : {g.edge(e).tail, g.edge(e).head}) {
      if (g.is_sink(v) || column[v] >= 0) continue;
      column[v] = static_cast<int>(endpoints.size());
      endpoints.push_back(v);
    }
  return column;
}

template <typename T, typename Green>
Matrix<T> assemble(const Multigraph& g, std::span<const EdgeId> edges, Green green) {
  const std::size_t k = edges.size();
  Matrix<T> y(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    const EdgeRef& e = g.edge(edges[i]);
    for (std::size_t j = 0; j < k; ++j) {
      const EdgeRef& f = g.edge(edges[j]);
      y(i, j) = green(f.tail, e.tail) - green(f.head, e.tail) - green(f.tail, e.head) +
                green(f.head, e.head);
    }
  }
  return y;
}

}  // namespace

std::vector<EdgeId> all_edges(const Multigraph& g) {
  std::vector<EdgeId> out(g.num_edges());
  std::iota(out.begin(), out.end(), 0);
  return out;
}

TransferCurrentMatrix<Rational> transfer_current_exact(const Multigraph& g,
                                                       std::span<const EdgeId> edges) {
  check_edges(g, edges);
  std::vector<VertexId> endpoints;
  const std::vector<int> column = endpoint_columns(g, edges, endpoints);

  const Matrix<long long> lap = reduced_laplacian(g);
  const std::size_t n = lap.rows();
  Matrix<Rational> a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = Rational(static_cast<long>(lap(i, j)));
  Matrix<Rational> rhs(n, endpoints.size());
  for (std::size_t c = 0; c < endpoints.size(); ++c) rhs(g.index_of(endpoints[c]), c) = 1;
  const Matrix<Rational> cols = solve(std::move(a), std::move(rhs));

  const Rational zero(0);
  auto green = [&](VertexId x, VertexId y) -> const Rational& {
    if (g.is_sink(x) || g.is_sink(y)) return zero;
    return cols(g.index_of(x), column[y]);
  };
  TransferCurrentMatrix<Rational> out;
  out.edges.assign(edges.begin(), edges.end());
  out.Y = assemble<Rational>(g, edges, green);
  return out;
}

TransferCurrentMatrix<double> transfer_current_float(const Multigraph& g,
                                                     std::span<const EdgeId> edges) {
  check_edges(g, edges);
  std::vector<VertexId> endpoints;
  const std::vector<int> column = endpoint_columns(g, edges, endpoints);

  const auto& vs = g.vertices();
  const Eigen::Index n = static_cast<Eigen::Index>(vs.size());
  std::vector<Eigen::Triplet<double>> entries;
  for (VertexId v : vs) {
    const int i = g.index_of(v);
    entries.emplace_back(i, i, g.degree(v));
    for (const auto& nb : g.neighbors(v))
      if (!g.is_sink(nb.vertex))
        entries.emplace_back(i, g.index_of(nb.vertex), -nb.multiplicity);
  }
  Eigen::SparseMatrix<double> lap(n, n);
  lap.setFromTriplets(entries.begin(), entries.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lap);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("transfer current: Laplacian factorization failed");

  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(endpoints.size()));
  for (std::size_t c = 0; c < endpoints.size(); ++c)
    rhs(g.index_of(endpoints[c]), static_cast<Eigen::Index>(c)) = 1.0;
  const Eigen::MatrixXd cols = solver.solve(rhs);

  auto green = [&](VertexId x, VertexId y) -> double {
    if (g.is_sink(x) || g.is_sink(y)) return 0.0;
    return cols(g.index_of(x), column[y]);
  };
  TransferCurrentMatrix<double> out;
  out.edges.assign(edges.begin(), edges.end());
  out.Y = assemble<double>(g, edges, green);
  return out;
}

BigInt spanning_tree_count(const Multigraph& g) {
  const Matrix<long long> lap = reduced_laplacian(g);
  Matrix<BigInt> m(lap.rows(), lap.cols());
  for (std::size_t i = 0; i < lap.rows(); ++i)
    for (std::size_t j = 0; j < lap.cols(); ++j) m(i, j) = static_cast<long>(lap(i, j));
  return bareiss_determinant(std::move(m));
}

Rational prob_absent_exact(const Multigraph& g, std::span<const EdgeId> edges) {
  if (edges.empty()) return Rational(1);
  return determinant(k_matrix(transfer_current_exact(g, edges)));
}

double prob_absent_float(const Multigraph& g, std::span<const EdgeId> edges) {
  if (edges.empty()) return 1.0;
  return determinant(k_matrix(transfer_current_float(g, edges)));
}

}  // namespace sandpile
