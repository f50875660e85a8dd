#ifndef SANDPILE_ORACLE_HPP
#define SANDPILE_ORACLE_HPP

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "sandpile/dynamics.hpp"
#include "sandpile/graph.hpp"
#include "sandpile/matrix.hpp"
#include "sandpile/minimal.hpp"

// Brute-force ground truth. Nothing here calls the production burning,
// bijection or determinant code.
namespace sandpile::oracle {

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EnumerationBudget {
  std::size_t max_edges = 24;
  std::uint64_t max_configurations = 5'000'000;
};

using EdgeSet = std::vector<EdgeId>;

// Include/exclude backtracking over edges with union-find; a branch dies
// as soon as the remaining edges cannot connect the graph.
std::vector<EdgeSet> enumerate_spanning_trees(const Multigraph& g,
                                              const EnumerationBudget& budget = {});

// Lexicographic over vertices() order, first vertex slowest.
std::vector<Sandpile> enumerate_stable(const Multigraph& g,
                                       const EnumerationBudget& budget = {});

// eta is recurrent iff for every nonempty F among the non-sink vertices
// some x in F has eta(x) >= deg_F(x). Exhaustive over subsets.
bool ample_recurrent(const Multigraph& g, const Sandpile& eta);

// Sequential burning written independently of the dynamics module.
bool burns_completely(const Multigraph& g, const Sandpile& eta);

std::vector<Sandpile> enumerate_recurrent(const Multigraph& g,
                                          const EnumerationBudget& budget = {});

struct StationaryDistribution {
  std::vector<Sandpile> states;  // every stable state
  std::vector<Rational> mass;    // exact stationary mass per state
};

// Transition matrix of add-at-uniform-vertex-and-stabilize over all stable
// states, stationary vector of the closed class reached from the all-max
// state, solved exactly.
StationaryDistribution exact_stationary(const Multigraph& g,
                                        const EnumerationBudget& budget = {});
// Same chain, solved by power iteration in doubles.
std::vector<double> float_stationary(const Multigraph& g, const EnumerationBudget& budget = {});

// #{eta recurrent : eta_W = xi} / #recurrent.
Rational brute_force_marginal(const Multigraph& g, const Subconfig& xi,
                              const EnumerationBudget& budget = {});

// Definition via all recurrent extensions: xi extends to a recurrent eta,
// and no extension minus one particle on W stays recurrent.
bool definitional_minimal(const Multigraph& g, const Subconfig& xi,
                          const EnumerationBudget& budget = {});

// The eta* form: heights deg - 1 off W.
bool eta_star_minimal(const Multigraph& g, const Subconfig& xi);

// Fraction of spanning trees containing all of `present` and none of `absent`.
Rational tree_fraction(const std::vector<EdgeSet>& trees, const EdgeSet& present,
                       const EdgeSet& absent);

// Connected multigraph on `vertices` vertices (one is the sink "s") with
// exactly `edges` edges, no loops. Other vertices are "v1", "v2", ...
Multigraph random_multigraph(std::mt19937_64& rng, int vertices, int edges);

}  // namespace sandpile::oracle

#endif  // SANDPILE_ORACLE_HPP
