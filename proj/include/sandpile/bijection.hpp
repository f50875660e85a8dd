#ifndef SANDPILE_BIJECTION_HPP
#define SANDPILE_BIJECTION_HPP

#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sandpile/dynamics.hpp"
#include "sandpile/graph.hpp"

namespace sandpile {

class TreeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Total order <_x on the edges incident to each vertex x.
class EdgeOrdering {
 public:
  virtual ~EdgeOrdering() = default;
  virtual std::string name() const = 0;
  // Sorts `edges` (all incident to x) into increasing <_x order.
  virtual void sort(const Multigraph& g, VertexId x, std::vector<EdgeId>& edges) const = 0;
};

// Orders by (label of the other endpoint, copy index).
class DefaultEdgeOrdering final : public EdgeOrdering {
 public:
  std::string name() const override { return "default"; }
  void sort(const Multigraph& g, VertexId x, std::vector<EdgeId>& edges) const override;
};

const EdgeOrdering& default_ordering();
// Only "default" is shipped.
const EdgeOrdering& ordering_by_name(const std::string& name);

// parent_edge[x] is the edge from x towards the sink; kNoEdge at the sink.
struct RootedSpanningTree {
  std::vector<EdgeId> parent_edge;
  friend bool operator==(const RootedSpanningTree&, const RootedSpanningTree&) = default;
};

VertexId parent_of(const Multigraph& g, const RootedSpanningTree& t, VertexId x);

// Returns a cycle of the parent map if there is one.
std::optional<std::vector<VertexId>> find_cycle(const Multigraph& g, const RootedSpanningTree& t);
// Throws TreeError if t is not a rooted spanning tree of g.
void validate_tree(const Multigraph& g, const RootedSpanningTree& t);

// Sorted edge ids of the tree.
std::vector<EdgeId> tree_edges(const RootedSpanningTree& t);
// Roots an unrooted spanning edge set at the sink. Throws if the set is not
// a spanning tree.
RootedSpanningTree orient_tree(const Multigraph& g, std::span<const EdgeId> edges);

RootedSpanningTree sandpile_to_tree(const Multigraph& g, const Sandpile& eta,
                                    std::span<const VertexId> Q,
                                    const EdgeOrdering& ordering = default_ordering());

Sandpile tree_to_sandpile(const Multigraph& g, const RootedSpanningTree& t,
                          std::span<const VertexId> Q,
                          const EdgeOrdering& ordering = default_ordering());

// No vertex outside Q has its parent in Q.
bool tree_event_E(const Multigraph& g, const RootedSpanningTree& t,
                  std::span<const VertexId> Q);

// Vertices whose path to the sink meets Q (Q included).
std::vector<VertexId> descendants(const Multigraph& g, const RootedSpanningTree& t,
                                  std::span<const VertexId> Q);

}  // namespace sandpile

#endif  // SANDPILE_BIJECTION_HPP
