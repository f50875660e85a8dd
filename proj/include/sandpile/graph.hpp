#ifndef SANDPILE_GRAPH_HPP
#define SANDPILE_GRAPH_HPP

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sandpile/matrix.hpp"

namespace sandpile {

using VertexId = int;
using EdgeId = int;
inline constexpr VertexId kNoVertex = -1;
inline constexpr EdgeId kNoEdge = -1;

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One edge identifier of the multigraph. Parallel edges between the same
// pair are distinct EdgeRefs that differ in `copy`.
struct EdgeRef {
  EdgeId id = kNoEdge;
  VertexId tail = kNoVertex;
  VertexId head = kNoVertex;
  int copy = 0;
  std::string label;
};

struct Incidence {
  EdgeId edge;
  VertexId other;
};

struct Neighbor {
  VertexId vertex;
  int multiplicity;
};

// Input description for build_graph. Edges are oriented u -> v.
struct EdgeSpec {
  std::string u;
  std::string v;
  int mult = 1;
  std::vector<std::string> ids;  // optional, one per copy
};

struct GraphSpec {
  std::vector<std::string> vertices;
  std::string sink;
  std::vector<EdgeSpec> edges;
};

// Finite connected loopless multigraph with a distinguished sink.
// Immutable after construction.
class Multigraph {
 public:
  struct RawEdge {
    VertexId tail;
    VertexId head;
    std::string label;
  };

  Multigraph() = default;
  // Validates: labels unique, endpoints in range, no loops, connected.
  Multigraph(std::vector<std::string> labels, VertexId sink,
             std::vector<RawEdge> edges);

  std::size_t num_vertices() const { return labels_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  VertexId sink() const { return sink_; }
  bool is_sink(VertexId v) const { return v == sink_; }

  // Non-sink vertices in increasing id order.
  const std::vector<VertexId>& vertices() const { return non_sink_; }

  const std::string& label(VertexId v) const { return labels_.at(v); }
  std::optional<VertexId> find(std::string_view label) const;
  VertexId at(std::string_view label) const;

  const std::vector<EdgeRef>& edges() const { return edges_; }
  const EdgeRef& edge(EdgeId e) const { return edges_.at(e); }
  std::optional<EdgeId> find_edge(std::string_view label) const;
  EdgeId edge_at(std::string_view label) const;

  std::span<const Incidence> incident(VertexId v) const { return incident_[v]; }
  std::span<const Neighbor> neighbors(VertexId v) const { return neighbors_[v]; }
  int degree(VertexId v) const { return static_cast<int>(incident_[v].size()); }
  int multiplicity(VertexId u, VertexId v) const;
  VertexId other_end(EdgeId e, VertexId v) const;

  // Position of v within vertices(), -1 for the sink.
  int index_of(VertexId v) const { return position_[v]; }

 private:
  std::vector<std::string> labels_;
  VertexId sink_ = kNoVertex;
  std::vector<EdgeRef> edges_;
  std::vector<std::vector<Incidence>> incident_;
  std::vector<std::vector<Neighbor>> neighbors_;
  std::vector<VertexId> non_sink_;
  std::vector<int> position_;
  std::unordered_map<std::string, VertexId> by_label_;
  std::unordered_map<std::string, EdgeId> edge_by_label_;
};

Multigraph build_graph(const GraphSpec& spec);

// Result of identifying vertices of a graph. Labels, edge labels and
// orientations carry over; edges that become loops are dropped.
struct Quotient {
  Multigraph graph;
  std::vector<VertexId> vertex_map;  // old vertex -> new vertex
  std::vector<EdgeId> edge_origin;   // new edge -> old edge
  std::vector<EdgeId> edge_image;    // old edge -> new edge or kNoEdge
};

// `representative[v]` names the vertex of g that v is merged into
// (representatives must map to themselves).
Quotient identify(const Multigraph& g, const std::vector<VertexId>& representative);

// G_W: every vertex outside `keep` is merged into the sink.
Quotient wire(const Multigraph& g, std::span<const VertexId> keep);

// Full Laplacian indexed by vertex id (sink included).
Matrix<long long> laplacian(const Multigraph& g);
// Sink row and column removed; rows follow g.vertices().
Matrix<long long> reduced_laplacian(const Multigraph& g);

// Sum of multiplicities from x into the vertex set marked in `in_set`.
int degree_into(const Multigraph& g, VertexId x, const std::vector<char>& in_set);

std::vector<char> vertex_mask(const Multigraph& g, std::span<const VertexId> set);

// ---- Z^2 boxes -----------------------------------------------------------

struct Point {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Point&, const Point&) = default;
  Point operator+(const Point& o) const { return {x + o.x, y + o.y}; }
  Point operator-(const Point& o) const { return {x - o.x, y - o.y}; }
};

inline constexpr Point kLatticeSteps[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

std::string point_label(Point p);
Point parse_point(std::string_view text);

// Oriented lattice edge tail -> head (unit step).
struct LatticeEdge {
  Point tail;
  Point head;
  friend auto operator<=>(const LatticeEdge&, const LatticeEdge&) = default;
};

std::string lattice_edge_label(const LatticeEdge& e);
std::optional<LatticeEdge> parse_lattice_edge(std::string_view label);

// Inclusive rectangle [x0, x1] x [y0, y1] of Z^2 with wired boundary.
struct LatticeBoxSpec {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;
};

// Square box of the given side; the origin is the centre vertex (for even
// sides, the lower-left of the four central vertices).
LatticeBoxSpec centered_box(int side);

struct LatticeBox {
  LatticeBoxSpec spec;
  Multigraph graph;
  bool contains(Point p) const {
    return p.x >= spec.x0 && p.x <= spec.x1 && p.y >= spec.y0 && p.y <= spec.y1;
  }
  int width() const { return spec.x1 - spec.x0 + 1; }
  int height() const { return spec.y1 - spec.y0 + 1; }
  VertexId vertex(Point p) const {
    return (p.x - spec.x0) * height() + (p.y - spec.y0);
  }
  Point point(VertexId v) const {
    return {spec.x0 + v / height(), spec.y0 + v % height()};
  }
};

// Every box vertex gets degree 4; missing neighbours become sink edges.
// Edge labels encode the lattice edge ("x,y|x',y'"), so sink edges remember
// which outside site they came from.
LatticeBox lattice_box(const LatticeBoxSpec& spec);

}  // namespace sandpile

#endif  // SANDPILE_GRAPH_HPP
