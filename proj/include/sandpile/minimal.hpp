#ifndef SANDPILE_MINIMAL_HPP
#define SANDPILE_MINIMAL_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sandpile/bijection.hpp"
#include "sandpile/dynamics.hpp"
#include "sandpile/graph.hpp"
#include "sandpile/matrix.hpp"

namespace sandpile {

class NotMinimalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A configuration xi on a finite vertex set W of g. heights[i] belongs to W[i].
struct Subconfig {
  std::vector<VertexId> W;
  std::vector<std::int64_t> heights;

  std::int64_t at(VertexId v) const;
  // Heights spread over the vertex ids of g (0 off W).
  Sandpile spread(std::size_t num_vertices) const;
};

// Throws std::invalid_argument for an empty W, duplicates, the sink in W,
// or a size mismatch.
void check_subconfig(const Multigraph& g, const Subconfig& xi);

enum class Verdict { minimal, not_minimal, not_recurrent, not_stable };

std::string to_string(Verdict v);

struct MinimalWitness {
  Verdict verdict = Verdict::not_recurrent;
  // 1, 2 or 3 for the failing characterization condition, 0 otherwise.
  int failed_condition = 0;
  // Entry-point sets in the order the recursion consumed them.
  std::vector<std::vector<VertexId>> peeling;
  std::string reason;

  bool is_minimal() const { return verdict == Verdict::minimal; }
};

// Components of (V u {s}) \ W; the one containing the sink comes first.
std::vector<std::vector<VertexId>> complement_components(const Multigraph& g,
                                                         std::span<const VertexId> W);

// {w in W : xi(w) >= deg_W(w)}.
std::vector<VertexId> entry_points(const Multigraph& g, const Subconfig& xi);

// Recursive characterization by entry points. Requires G \ W connected.
MinimalWitness is_minimal(const Multigraph& g, const Subconfig& xi);

// #edges(G_W) - deg_{G_W}(s).
std::int64_t minimal_total_particles(const Multigraph& g, std::span<const VertexId> W);

struct HoleDecomposition {
  std::vector<std::vector<VertexId>> components;  // V_j: complement components without s
  std::vector<VertexId> entry;                    // y_j, kNoVertex if none
  std::vector<int> r;                             // burnable W-neighbours at first contact
};

struct GeneralizedMinimalResult {
  MinimalWitness witness;
  HoleDecomposition holes;
};

// Burns W round by round with holes present; each hole is entered from its
// unique burnable neighbour and then reduced to the hole-collapsed graph.
GeneralizedMinimalResult is_generalized_minimal(const Multigraph& g, const Subconfig& xi);

// G_{W'} (W' = W plus holes) with every V_j identified with y_j, and xi
// carried over. At y_j the height is shifted by b(V_j, W \ y_j) - b(y_j, V_j)
// so that burning on the collapsed graph matches burning on g.
struct CollapsedGraph {
  Quotient quotient;
  Sandpile xi;  // on quotient.graph
};

CollapsedGraph hole_collapsed_graph(const Multigraph& g, const Subconfig& xi,
                                    const HoleDecomposition& holes);

// Edges of g that touch W' and are not in the bijection tree t0 of xi on
// the (collapsed) wired graph. Throws NotMinimalError.
std::vector<EdgeId> edge_set_E(const Multigraph& g, const Subconfig& xi);

struct MinimalProbability {
  std::vector<EdgeId> E;
  std::optional<Rational> exact;
  double value = 0.0;
};

// nu_G[eta_W = xi] = det K_G over E. Throws NotMinimalError.
MinimalProbability minimal_probability(const Multigraph& g, const Subconfig& xi,
                                       Backend backend);

}  // namespace sandpile

#endif  // SANDPILE_MINIMAL_HPP
