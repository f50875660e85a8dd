#ifndef SANDPILE_TRANSFER_CURRENT_HPP
#define SANDPILE_TRANSFER_CURRENT_HPP

#include <span>
#include <vector>

#include "sandpile/graph.hpp"
#include "sandpile/matrix.hpp"

namespace sandpile {

// Y(e, f) for the listed edges: the current through f (along its
// orientation) when unit current enters at tail(e) and leaves at head(e).
template <typename T>
struct TransferCurrentMatrix {
  std::vector<EdgeId> edges;
  Matrix<T> Y;

  std::size_t size() const { return edges.size(); }
};

// Green function of the walk killed at the sink, restricted to the columns
// that the edge set needs. Exact: dense Gauss-Jordan over Q. Float: sparse
// Cholesky (Eigen), which is what makes 128x128 boxes cheap.
TransferCurrentMatrix<Rational> transfer_current_exact(const Multigraph& g,
                                                       std::span<const EdgeId> edges);
TransferCurrentMatrix<double> transfer_current_float(const Multigraph& g,
                                                     std::span<const EdgeId> edges);

// All edges of g, in id order.
std::vector<EdgeId> all_edges(const Multigraph& g);

template <typename T>
Matrix<T> k_matrix(const TransferCurrentMatrix<T>& y) {
  Matrix<T> k(y.size(), y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) k(i, j) = (i == j ? T(1) : T(0)) - y.Y(i, j);
  return k;
}

// Positions refer to rows of the matrix, not edge ids.
template <typename T>
T prob_edges_present(const TransferCurrentMatrix<T>& y, std::span<const std::size_t> positions) {
  return determinant(y.Y.principal(positions));
}

template <typename T>
T prob_edges_absent(const TransferCurrentMatrix<T>& y, std::span<const std::size_t> positions) {
  return determinant(k_matrix(y).principal(positions));
}

// Matrix-tree theorem: det of the reduced Laplacian, exactly.
BigInt spanning_tree_count(const Multigraph& g);

// Probability that none of `edges` lies in a uniform spanning tree:
// det K over the set.
Rational prob_absent_exact(const Multigraph& g, std::span<const EdgeId> edges);
double prob_absent_float(const Multigraph& g, std::span<const EdgeId> edges);

}  // namespace sandpile

#endif  // SANDPILE_TRANSFER_CURRENT_HPP
