#include "sandpile/bijection.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

namespace sandpile {

void DefaultEdgeOrdering::sort(const Multigraph& g, VertexId x,
                               std::vector<EdgeId>& edges) const {
  std::sort(edges.begin(), edges.end(), [&](EdgeId a, EdgeId b) {
    const std::string& la = g.label(g.other_end(a, x));
    const std::string& lb = g.label(g.other_end(b, x));
    if (la != lb) return la < lb;
    return g.edge(a).copy < g.edge(b).copy;
  });
}

const EdgeOrdering& default_ordering() {
  static const DefaultEdgeOrdering instance;
  return instance;
}

const EdgeOrdering& ordering_by_name(const std::string& name) {
  if (name == "default") return default_ordering();
  throw std::invalid_argument("unknown edge ordering '" + name + "'");
}

VertexId parent_of(const Multigraph& g, const RootedSpanningTree& t, VertexId x) {
  return g.other_end(t.parent_edge.at(x), x);
}

std::optional<std::vector<VertexId>> find_cycle(const Multigraph& g,
                                                const RootedSpanningTree& t) {
  const int n = static_cast<int>(g.num_vertices());
  // 0 unvisited, 1 on the current path, 2 known to reach the sink
  std::vector<int> state(n, 0);
  state[g.sink()] = 2;
  for (VertexId start : g.vertices()) {
    std::vector<VertexId> path;
    VertexId v = start;
    while (state[v] == 0) {
      state[v] = 1;
      path.push_back(v);
      v = parent_of(g, t, v);
    }
    if (state[v] == 1) {
      auto it = std::find(path.begin(), path.end(), v);
      return std::vector<VertexId>(it, path.end());
    }
    for (VertexId p : path) state[p] = 2;
  }
  return std::nullopt;
}

void validate_tree(const Multigraph& g, const RootedSpanningTree& t) {
  if (t.parent_edge.size() != g.num_vertices())
    throw TreeError("tree size does not match graph");
  if (t.parent_edge[g.sink()] != kNoEdge) throw TreeError("the sink has a parent edge");
  for (VertexId v : g.vertices()) {
    const EdgeId e = t.parent_edge[v];
    if (e < 0 || e >= static_cast<EdgeId>(g.num_edges()))
      throw TreeError("vertex '" + g.label(v) + "' has no valid parent edge");
    const EdgeRef& ref = g.edge(e);
    if (ref.tail != v && ref.head != v)
      throw TreeError("parent edge '" + ref.label + "' is not incident to '" +
                      g.label(v) + "'");
  }
  if (auto cycle = find_cycle(g, t)) {
    std::string text;
    for (VertexId v : *cycle) text += (text.empty() ? "" : " -> ") + g.label(v);
    throw TreeError("parent map has a cycle: " + text);
  }
}

std::vector<EdgeId> tree_edges(const RootedSpanningTree& t) {
  std::vector<EdgeId> out;
  for (EdgeId e : t.parent_edge)
    if (e != kNoEdge) out.push_back(e);
  std::sort(out.begin(), out.end());
  return out;
}

RootedSpanningTree orient_tree(const Multigraph& g, std::span<const EdgeId> edges) {
  if (edges.size() + 1 != g.num_vertices())
    throw TreeError("edge set has the wrong size for a spanning tree");
  std::vector<std::vector<std::pair<EdgeId, VertexId>>> adj(g.num_vertices());
  for (EdgeId e : edges) {
    const EdgeRef& ref = g.edge(e);
    adj[ref.tail].push_back({e, ref.head});
    adj[ref.head].push_back({e, ref.tail});
  }
  RootedSpanningTree t;
  t.parent_edge.assign(g.num_vertices(), kNoEdge);
  std::vector<char> seen(g.num_vertices(), 0);
  std::vector<VertexId> stack{g.sink()};
  seen[g.sink()] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const VertexId v = stack.back();
    stack.pop_back();
    for (auto [e, u] : adj[v]) {
      if (seen[u]) continue;
      seen[u] = 1;
      ++reached;
      t.parent_edge[u] = e;
      stack.push_back(u);
    }
  }
  if (reached != g.num_vertices()) throw TreeError("edge set is not spanning");
  return t;
}

namespace {

// (phase, round); the sink is (0, 0).
using BurnKey = std::pair<int, int>;

bool in_previous_round(const BurnKey& y, const BurnKey& x) {
  if (x.first == 1)
    return x.second == 1 ? y.first == 0 : (y.first == 1 && y.second == x.second - 1);
  return x.second == 1 ? y.first <= 1 : (y.first == 2 && y.second == x.second - 1);
}

struct LocalBurn {
  int n_x = 0;
  std::vector<EdgeId> P;
};

LocalBurn local_burn(const Multigraph& g, const std::vector<BurnKey>& key, VertexId x,
                     const EdgeOrdering& ordering) {
  LocalBurn out;
  for (const auto& inc : g.incident(x)) {
    const BurnKey& k = key[inc.other];
    if (k < key[x]) ++out.n_x;
    if (in_previous_round(k, key[x])) out.P.push_back(inc.edge);
  }
  ordering.sort(g, x, out.P);
  return out;
}

std::vector<char> q_mask(const Multigraph& g, std::span<const VertexId> Q) {
  std::vector<char> mask(g.num_vertices(), 0);
  for (VertexId q : Q) {
    if (q < 0 || q >= static_cast<VertexId>(g.num_vertices()) || g.is_sink(q))
      throw std::invalid_argument("Q must consist of non-sink vertices");
    mask[q] = 1;
  }
  return mask;
}

}  // namespace

RootedSpanningTree sandpile_to_tree(const Multigraph& g, const Sandpile& eta,
                                    std::span<const VertexId> Q,
                                    const EdgeOrdering& ordering) {
  const BurningRecord rec = two_phase_burn(g, eta, Q);
  if (!rec.complete()) throw NotRecurrentError("sandpile is not recurrent: burning stalls");
  std::vector<BurnKey> key(g.num_vertices());
  for (VertexId v = 0; v < static_cast<VertexId>(g.num_vertices()); ++v)
    key[v] = {rec.phase[v], rec.round[v]};

  RootedSpanningTree t;
  t.parent_edge.assign(g.num_vertices(), kNoEdge);
  for (VertexId x : g.vertices()) {
    const LocalBurn lb = local_burn(g, key, x, ordering);
    const std::int64_t i = eta[x] - g.degree(x) + lb.n_x;
    if (i < 0 || i >= static_cast<std::int64_t>(lb.P.size()))
      throw std::logic_error("burning index out of range at '" + g.label(x) + "'");
    t.parent_edge[x] = lb.P[static_cast<std::size_t>(i)];
  }
  return t;
}

std::vector<VertexId> descendants(const Multigraph& g, const RootedSpanningTree& t,
                                  std::span<const VertexId> Q) {
  const std::vector<char> in_q = q_mask(g, Q);
  // 0 unknown, 1 descendant, 2 not
  std::vector<char> state(g.num_vertices(), 0);
  state[g.sink()] = 2;
  std::vector<VertexId> path;
  for (VertexId start : g.vertices()) {
    path.clear();
    VertexId v = start;
    while (state[v] == 0 && !in_q[v]) {
      path.push_back(v);
      v = parent_of(g, t, v);
      if (path.size() > g.num_vertices()) throw TreeError("parent map has a cycle");
    }
    const char verdict = in_q[v] ? 1 : state[v];
    state[v] = verdict;
    for (VertexId p : path) state[p] = verdict;
  }
  std::vector<VertexId> out;
  for (VertexId v : g.vertices())
    if (state[v] == 1) out.push_back(v);
  return out;
}

Sandpile tree_to_sandpile(const Multigraph& g, const RootedSpanningTree& t,
                          std::span<const VertexId> Q, const EdgeOrdering& ordering) {
  validate_tree(g, t);
  std::vector<char> in_d(g.num_vertices(), 0);
  for (VertexId v : descendants(g, t, Q)) in_d[v] = 1;

  // Phase-1 rounds are depths from the sink; phase-2 rounds are depths in
  // the forest induced on D(Q).
  std::vector<BurnKey> key(g.num_vertices(), {-1, 0});
  key[g.sink()] = {0, 0};
  std::vector<VertexId> path;
  for (VertexId start : g.vertices()) {
    path.clear();
    VertexId v = start;
    while (key[v].first < 0) {
      path.push_back(v);
      const VertexId p = parent_of(g, t, v);
      if (in_d[v] && !in_d[p]) break;
      v = p;
    }
    BurnKey base;
    std::size_t n = path.size();
    if (key[v].first >= 0) {
      base = key[v];
    } else {
      // path ends at a phase-2 root
      base = {2, 0};
    }
    for (std::size_t k = 0; k < n; ++k) {
      const VertexId p = path[n - 1 - k];
      const int phase = in_d[p] ? 2 : 1;
      const int parent_round = (base.first == phase) ? base.second : 0;
      key[p] = {phase, parent_round + 1};
      base = key[p];
    }
  }

  Sandpile eta(g.num_vertices());
  for (VertexId x : g.vertices()) {
    const LocalBurn lb = local_burn(g, key, x, ordering);
    auto it = std::find(lb.P.begin(), lb.P.end(), t.parent_edge[x]);
    if (it == lb.P.end())
      throw std::logic_error("parent edge not in P_x at '" + g.label(x) + "'");
    eta[x] = g.degree(x) - lb.n_x + (it - lb.P.begin());
  }
  return eta;
}

bool tree_event_E(const Multigraph& g, const RootedSpanningTree& t,
                  std::span<const VertexId> Q) {
  const std::vector<char> in_q = q_mask(g, Q);
  for (VertexId x : g.vertices())
    if (!in_q[x] && in_q[parent_of(g, t, x)]) return false;
  return true;
}

}  // namespace sandpile
