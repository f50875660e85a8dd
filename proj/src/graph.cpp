#include "sandpile/graph.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <queue>
#include <utility>

namespace sandpile {

Multigraph::Multigraph(std::vector<std::string> labels, VertexId sink,
                       std::vector<RawEdge> edges)
    : labels_(std::move(labels)), sink_(sink) {
  const int n = static_cast<int>(labels_.size());
  if (n < 2) throw GraphError("graph needs a sink and at least one other vertex");
  if (sink_ < 0 || sink_ >= n) throw GraphError("sink out of range");
  for (VertexId v = 0; v < n; ++v) {
    if (!by_label_.emplace(labels_[v], v).second)
      throw GraphError("duplicate vertex '" + labels_[v] + "'");
  }

  incident_.resize(n);
  std::map<std::pair<VertexId, VertexId>, int> copies;
  edges_.reserve(edges.size());
  for (auto& raw : edges) {
    if (raw.tail < 0 || raw.tail >= n || raw.head < 0 || raw.head >= n)
      throw GraphError("edge '" + raw.label + "' has an endpoint out of range");
    if (raw.tail == raw.head)
      throw GraphError("loop edge '" + raw.label + "' at '" + labels_[raw.tail] + "'");
    const EdgeId id = static_cast<EdgeId>(edges_.size());
    if (!edge_by_label_.emplace(raw.label, id).second)
      throw GraphError("duplicate edge id '" + raw.label + "'");
    auto key = std::minmax(raw.tail, raw.head);
    const int copy = copies[{key.first, key.second}]++;
    edges_.push_back({id, raw.tail, raw.head, copy, std::move(raw.label)});
    incident_[edges_.back().tail].push_back({id, edges_.back().head});
    incident_[edges_.back().head].push_back({id, edges_.back().tail});
  }

  neighbors_.resize(n);
  for (VertexId v = 0; v < n; ++v) {
    std::map<VertexId, int> count;
    for (const auto& inc : incident_[v]) ++count[inc.other];
    for (const auto& [u, m] : count) neighbors_[v].push_back({u, m});
  }

  std::vector<char> seen(n, 0);
  std::queue<VertexId> frontier;
  frontier.push(sink_);
  seen[sink_] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const VertexId v = frontier.front();
    frontier.pop();
    for (const auto& nb : neighbors_[v]) {
      if (seen[nb.vertex]) continue;
      seen[nb.vertex] = 1;
      ++reached;
      frontier.push(nb.vertex);
    }
  }
  if (reached != n) {
    for (VertexId v = 0; v < n; ++v)
      if (!seen[v])
        throw GraphError("graph is disconnected: '" + labels_[v] +
                         "' cannot reach the sink");
  }

  position_.assign(n, -1);
  for (VertexId v = 0; v < n; ++v) {
    if (v == sink_) continue;
    position_[v] = static_cast<int>(non_sink_.size());
    non_sink_.push_back(v);
  }
}

std::optional<VertexId> Multigraph::find(std::string_view label) const {
  auto it = by_label_.find(std::string(label));
  if (it == by_label_.end()) return std::nullopt;
  return it->second;
}

VertexId Multigraph::at(std::string_view label) const {
  auto v = find(label);
  if (!v) throw GraphError("unknown vertex '" + std::string(label) + "'");
  return *v;
}

std::optional<EdgeId> Multigraph::find_edge(std::string_view label) const {
  auto it = edge_by_label_.find(std::string(label));
  if (it == edge_by_label_.end()) return std::nullopt;
  return it->second;
}

EdgeId Multigraph::edge_at(std::string_view label) const {
  auto e = find_edge(label);
  if (!e) throw GraphError("unknown edge '" + std::string(label) + "'");
  return *e;
}

int Multigraph::multiplicity(VertexId u, VertexId v) const {
  const auto& list = neighbors_[u];
  auto it = std::lower_bound(list.begin(), list.end(), v,
                             [](const Neighbor& nb, VertexId x) { return nb.vertex < x; });
  return (it != list.end() && it->vertex == v) ? it->multiplicity : 0;
}

VertexId Multigraph::other_end(EdgeId e, VertexId v) const {
  const EdgeRef& ref = edges_.at(e);
  if (ref.tail == v) return ref.head;
  if (ref.head == v) return ref.tail;
  throw GraphError("vertex '" + labels_.at(v) + "' is not an endpoint of '" +
                   ref.label + "'");
}

Multigraph build_graph(const GraphSpec& spec) {
  std::vector<std::string> labels = spec.vertices;
  std::unordered_map<std::string, VertexId> index;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!index.emplace(labels[i], static_cast<VertexId>(i)).second)
      throw GraphError("duplicate vertex '" + labels[i] + "'");
  }
  auto lookup = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw GraphError("unknown vertex '" + name + "'");
    return it->second;
  };
  const VertexId sink = lookup(spec.sink);

  std::vector<Multigraph::RawEdge> raw;
  std::map<std::pair<VertexId, VertexId>, int> copies;
  for (const auto& e : spec.edges) {
    const VertexId u = lookup(e.u);
    const VertexId v = lookup(e.v);
    if (e.mult < 1)
      throw GraphError("edge " + e.u + "-" + e.v + " has multiplicity < 1");
    if (!e.ids.empty() && static_cast<int>(e.ids.size()) != e.mult)
      throw GraphError("edge " + e.u + "-" + e.v + ": ids do not match multiplicity");
    const auto key = std::minmax(u, v);
    for (int k = 0; k < e.mult; ++k) {
      const int copy = copies[{key.first, key.second}]++;
      std::string label =
          e.ids.empty() ? e.u + "-" + e.v + "#" + std::to_string(copy) : e.ids[k];
      raw.push_back({u, v, std::move(label)});
    }
  }
  return Multigraph(std::move(labels), sink, std::move(raw));
}

Quotient identify(const Multigraph& g, const std::vector<VertexId>& representative) {
  const int n = static_cast<int>(g.num_vertices());
  if (static_cast<int>(representative.size()) != n)
    throw GraphError("identify: representative map has the wrong size");
  for (VertexId v = 0; v < n; ++v) {
    const VertexId r = representative[v];
    if (r < 0 || r >= n || representative[r] != r)
      throw GraphError("identify: representatives must be fixed points");
  }

  Quotient q;
  q.vertex_map.assign(n, kNoVertex);
  std::vector<std::string> labels;
  for (VertexId v = 0; v < n; ++v) {
    if (representative[v] != v) continue;
    q.vertex_map[v] = static_cast<VertexId>(labels.size());
    labels.push_back(g.label(v));
  }
  for (VertexId v = 0; v < n; ++v) q.vertex_map[v] = q.vertex_map[representative[v]];

  std::vector<Multigraph::RawEdge> raw;
  q.edge_image.assign(g.num_edges(), kNoEdge);
  for (const auto& e : g.edges()) {
    const VertexId t = q.vertex_map[e.tail];
    const VertexId h = q.vertex_map[e.head];
    if (t == h) continue;
    q.edge_image[e.id] = static_cast<EdgeId>(raw.size());
    q.edge_origin.push_back(e.id);
    raw.push_back({t, h, e.label});
  }
  q.graph = Multigraph(std::move(labels), q.vertex_map[g.sink()], std::move(raw));
  return q;
}

Quotient wire(const Multigraph& g, std::span<const VertexId> keep) {
  if (keep.empty()) throw GraphError("wire: W must be nonempty");
  std::vector<VertexId> rep(g.num_vertices(), g.sink());
  rep[g.sink()] = g.sink();
  for (VertexId v : keep) {
    if (v < 0 || v >= static_cast<VertexId>(g.num_vertices()))
      throw GraphError("wire: vertex out of range");
    if (g.is_sink(v)) throw GraphError("wire: W must not contain the sink");
    rep[v] = v;
  }
  return identify(g, rep);
}

Matrix<long long> laplacian(const Multigraph& g) {
  const std::size_t n = g.num_vertices();
  Matrix<long long> m(n, n);
  for (VertexId v = 0; v < static_cast<VertexId>(n); ++v) {
    m(v, v) = g.degree(v);
    for (const auto& nb : g.neighbors(v)) m(v, nb.vertex) = -nb.multiplicity;
  }
  return m;
}

Matrix<long long> reduced_laplacian(const Multigraph& g) {
  const auto& vs = g.vertices();
  Matrix<long long> m(vs.size(), vs.size());
  for (std::size_t i = 0; i < vs.size(); ++i) {
    m(i, i) = g.degree(vs[i]);
    for (const auto& nb : g.neighbors(vs[i]))
      if (!g.is_sink(nb.vertex)) m(i, g.index_of(nb.vertex)) = -nb.multiplicity;
  }
  return m;
}

int degree_into(const Multigraph& g, VertexId x, const std::vector<char>& in_set) {
  int d = 0;
  for (const auto& nb : g.neighbors(x))
    if (in_set[nb.vertex]) d += nb.multiplicity;
  return d;
}

std::vector<char> vertex_mask(const Multigraph& g, std::span<const VertexId> set) {
  std::vector<char> mask(g.num_vertices(), 0);
  for (VertexId v : set) mask.at(v) = 1;
  return mask;
}

std::string point_label(Point p) {
  return std::to_string(p.x) + "," + std::to_string(p.y);
}

namespace {

bool parse_int(std::string_view text, int& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::optional<Point> try_parse_point(std::string_view text) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) return std::nullopt;
  Point p;
  if (!parse_int(text.substr(0, comma), p.x)) return std::nullopt;
  if (!parse_int(text.substr(comma + 1), p.y)) return std::nullopt;
  return p;
}

}  // namespace

Point parse_point(std::string_view text) {
  auto p = try_parse_point(text);
  if (!p) throw GraphError("not a lattice point: '" + std::string(text) + "'");
  return *p;
}

std::string lattice_edge_label(const LatticeEdge& e) {
  return point_label(e.tail) + "|" + point_label(e.head);
}

std::optional<LatticeEdge> parse_lattice_edge(std::string_view label) {
  const auto bar = label.find('|');
  if (bar == std::string_view::npos) return std::nullopt;
  auto t = try_parse_point(label.substr(0, bar));
  auto h = try_parse_point(label.substr(bar + 1));
  if (!t || !h) return std::nullopt;
  return LatticeEdge{*t, *h};
}

LatticeBoxSpec centered_box(int side) {
  if (side < 1) throw GraphError("box side must be positive");
  const int lo = -(side - 1) / 2;
  return {lo, lo, lo + side - 1, lo + side - 1};
}

LatticeBox lattice_box(const LatticeBoxSpec& spec) {
  if (spec.x1 < spec.x0 || spec.y1 < spec.y0) throw GraphError("empty lattice box");
  LatticeBox box;
  box.spec = spec;
  const int count = box.width() * box.height();
  std::vector<std::string> labels(count + 1);
  for (VertexId v = 0; v < count; ++v) labels[v] = point_label(box.point(v));
  const VertexId sink = count;
  labels[sink] = "s";

  std::vector<Multigraph::RawEdge> raw;
  raw.reserve(2 * count + 2 * (box.width() + box.height()));
  for (VertexId v = 0; v < count; ++v) {
    const Point p = box.point(v);
    for (const Point step : kLatticeSteps) {
      const Point q = p + step;
      const bool forward = step.x + step.y > 0;
      if (box.contains(q)) {
        if (forward) raw.push_back({v, box.vertex(q), lattice_edge_label({p, q})});
      } else {
        raw.push_back({v, sink, lattice_edge_label({p, q})});
      }
    }
  }
  box.graph = Multigraph(std::move(labels), sink, std::move(raw));
  return box;
}

}  // namespace sandpile
