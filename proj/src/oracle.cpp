#include "sandpile/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace sandpile::oracle {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

bool connected_with(const Multigraph& g, const std::vector<char>& usable) {
  UnionFind uf(g.num_vertices());
  std::size_t comps = g.num_vertices();
  for (const auto& e : g.edges())
    if (usable[e.id] && uf.unite(e.tail, e.head)) --comps;
  return comps == 1;
}

void trees_rec(const Multigraph& g, std::size_t i, std::vector<char>& state,
               std::vector<EdgeId>& chosen, UnionFind uf, std::vector<EdgeSet>& out) {
  const std::size_t need = g.num_vertices() - 1;
  if (chosen.size() == need) {
    out.push_back(chosen);
    return;
  }
  if (i == g.num_edges() || g.num_edges() - i < need - chosen.size()) return;
  const EdgeRef& e = g.edge(static_cast<EdgeId>(i));
  // include
  {
    UnionFind next = uf;
    if (next.unite(e.tail, e.head)) {
      chosen.push_back(e.id);
      trees_rec(g, i + 1, state, chosen, next, out);
      chosen.pop_back();
    }
  }
  // exclude, if the graph can still be connected
  state[i] = 0;
  if (connected_with(g, state)) trees_rec(g, i + 1, state, chosen, uf, out);
  state[i] = 1;
}

std::uint64_t stable_count(const Multigraph& g) {
  std::uint64_t count = 1;
  for (VertexId v : g.vertices()) {
    count *= static_cast<std::uint64_t>(g.degree(v));
    if (count > (std::uint64_t{1} << 50)) return count;
  }
  return count;
}

// Odometer-style increment over the stable box; false when exhausted.
bool next_stable(const Multigraph& g, Sandpile& eta) {
  const auto& vs = g.vertices();
  for (std::size_t k = vs.size(); k-- > 0;) {
    const VertexId v = vs[k];
    if (eta[v] + 1 < g.degree(v)) {
      ++eta[v];
      return true;
    }
    eta[v] = 0;
  }
  return false;
}

void naive_stabilize(const Multigraph& g, Sandpile& eta) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (VertexId v : g.vertices()) {
      if (eta[v] < g.degree(v)) continue;
      eta[v] -= g.degree(v);
      for (const auto& inc : g.incident(v)) ++eta[inc.other];
      changed = true;
    }
  }
  eta[g.sink()] = 0;
}

std::uint64_t encode(const Multigraph& g, const Sandpile& eta) {
  std::uint64_t code = 0;
  for (VertexId v : g.vertices()) code = code * g.degree(v) + static_cast<std::uint64_t>(eta[v]);
  return code;
}

// Extensions of xi: every stable eta with eta_W = xi.
template <typename Visit>
void for_each_extension(const Multigraph& g, const Subconfig& xi,
                        const EnumerationBudget& budget, Visit visit) {
  std::vector<char> in_w = vertex_mask(g, xi.W);
  std::vector<VertexId> free;
  std::uint64_t count = 1;
  for (VertexId v : g.vertices())
    if (!in_w[v]) {
      free.push_back(v);
      count *= static_cast<std::uint64_t>(g.degree(v));
      if (count > budget.max_configurations)
        throw BudgetExceeded("too many extensions to enumerate");
    }
  Sandpile eta = xi.spread(g.num_vertices());
  while (true) {
    visit(static_cast<const Sandpile&>(eta));
    std::size_t k = free.size();
    while (k > 0) {
      const VertexId v = free[k - 1];
      if (eta[v] + 1 < g.degree(v)) {
        ++eta[v];
        break;
      }
      eta[v] = 0;
      --k;
    }
    if (k == 0) return;
  }
}

}  // namespace

std::vector<EdgeSet> enumerate_spanning_trees(const Multigraph& g,
                                              const EnumerationBudget& budget) {
  if (g.num_edges() > budget.max_edges)
    throw BudgetExceeded("graph has more edges than the enumeration budget");
  std::vector<EdgeSet> out;
  std::vector<char> state(g.num_edges(), 1);
  std::vector<EdgeId> chosen;
  trees_rec(g, 0, state, chosen, UnionFind(g.num_vertices()), out);
  return out;
}

std::vector<Sandpile> enumerate_stable(const Multigraph& g, const EnumerationBudget& budget) {
  if (stable_count(g) > budget.max_configurations)
    throw BudgetExceeded("too many stable configurations to enumerate");
  std::vector<Sandpile> out;
  Sandpile eta(g.num_vertices());
  do out.push_back(eta);
  while (next_stable(g, eta));
  return out;
}

bool ample_recurrent(const Multigraph& g, const Sandpile& eta) {
  const auto& vs = g.vertices();
  if (vs.size() > 20) throw BudgetExceeded("ample check is exponential in |V|");
  const std::uint32_t full = (std::uint32_t{1} << vs.size()) - 1;
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    bool ample = false;
    for (std::size_t i = 0; i < vs.size() && !ample; ++i) {
      if (!(mask >> i & 1)) continue;
      std::int64_t deg_f = 0;
      for (std::size_t j = 0; j < vs.size(); ++j)
        if (mask >> j & 1) deg_f += g.multiplicity(vs[i], vs[j]);
      if (eta[vs[i]] >= deg_f) ample = true;
    }
    if (!ample) return false;
  }
  return true;
}

bool burns_completely(const Multigraph& g, const Sandpile& eta) {
  std::vector<char> unburnt(g.num_vertices(), 1);
  unburnt[g.sink()] = 0;
  std::size_t left = g.vertices().size();
  bool progress = true;
  while (left > 0 && progress) {
    progress = false;
    for (VertexId v : g.vertices()) {
      if (!unburnt[v]) continue;
      std::int64_t into_unburnt = 0;
      for (const auto& inc : g.incident(v)) into_unburnt += unburnt[inc.other];
      if (eta[v] >= into_unburnt) {
        unburnt[v] = 0;
        --left;
        progress = true;
      }
    }
  }
  return left == 0;
}

std::vector<Sandpile> enumerate_recurrent(const Multigraph& g, const EnumerationBudget& budget) {
  std::vector<Sandpile> out;
  for (auto& eta : enumerate_stable(g, budget))
    if (burns_completely(g, eta)) out.push_back(std::move(eta));
  return out;
}

StationaryDistribution exact_stationary(const Multigraph& g, const EnumerationBudget& budget) {
  StationaryDistribution out;
  out.states = enumerate_stable(g, budget);
  const std::size_t n = out.states.size();
  std::unordered_map<std::uint64_t, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[encode(g, out.states[i])] = i;

  const auto& vs = g.vertices();
  std::vector<std::vector<std::size_t>> next(n, std::vector<std::size_t>(vs.size()));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < vs.size(); ++k) {
      Sandpile eta = out.states[i];
      ++eta[vs[k]];
      naive_stabilize(g, eta);
      next[i][k] = index.at(encode(g, eta));
    }

  Sandpile top(g.num_vertices());
  for (VertexId v : vs) top[v] = g.degree(v) - 1;
  std::vector<char> reached(n, 0);
  std::vector<std::size_t> closed{index.at(encode(g, top))};
  reached[closed[0]] = 1;
  for (std::size_t k = 0; k < closed.size(); ++k)
    for (std::size_t j : next[closed[k]])
      if (!reached[j]) {
        reached[j] = 1;
        closed.push_back(j);
      }
  if (closed.size() > 2000) throw BudgetExceeded("closed class too large for an exact solve");
  std::sort(closed.begin(), closed.end());
  std::vector<std::size_t> pos(n, 0);
  for (std::size_t k = 0; k < closed.size(); ++k) pos[closed[k]] = k;

  // pi (P - I) = 0 with the last equation replaced by sum(pi) = 1.
  const std::size_t m = closed.size();
  const Rational step(1, static_cast<unsigned long>(vs.size()));
  Matrix<Rational> a(m, m);
  for (std::size_t c = 0; c < m; ++c) {
    a(c, c) -= 1;
    for (std::size_t j : next[closed[c]]) a(pos[j], c) += step;
  }
  Matrix<Rational> b(m, 1);
  for (std::size_t c = 0; c < m; ++c) a(m - 1, c) = 1;
  b(m - 1, 0) = 1;
  const Matrix<Rational> pi = solve(std::move(a), std::move(b));

  out.mass.assign(n, Rational(0));
  for (std::size_t k = 0; k < m; ++k) out.mass[closed[k]] = pi(k, 0);
  return out;
}

std::vector<double> float_stationary(const Multigraph& g, const EnumerationBudget& budget) {
  const std::vector<Sandpile> states = enumerate_stable(g, budget);
  const std::size_t n = states.size();
  std::unordered_map<std::uint64_t, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[encode(g, states[i])] = i;
  const auto& vs = g.vertices();
  std::vector<std::vector<std::size_t>> next(n);
  for (std::size_t i = 0; i < n; ++i)
    for (VertexId v : vs) {
      Sandpile eta = states[i];
      ++eta[v];
      naive_stabilize(g, eta);
      next[i].push_back(index.at(encode(g, eta)));
    }
  // lazy chain: same stationary law, no periodicity
  std::vector<double> pi(n, 0.0), fresh(n);
  Sandpile top(g.num_vertices());
  for (VertexId v : vs) top[v] = g.degree(v) - 1;
  pi[index.at(encode(g, top))] = 1.0;
  const double w = 0.5 / static_cast<double>(vs.size());
  for (int iter = 0; iter < 1'000'000; ++iter) {
    for (std::size_t i = 0; i < n; ++i) fresh[i] = 0.5 * pi[i];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j : next[i]) fresh[j] += w * pi[i];
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) diff += std::abs(fresh[i] - pi[i]);
    pi.swap(fresh);
    if (diff < 1e-15) break;
  }
  return pi;
}

Rational brute_force_marginal(const Multigraph& g, const Subconfig& xi,
                              const EnumerationBudget& budget) {
  std::int64_t total = 0;
  std::int64_t hits = 0;
  const std::vector<char> in_w = vertex_mask(g, xi.W);
  for (const auto& eta : enumerate_recurrent(g, budget)) {
    ++total;
    bool match = true;
    for (std::size_t i = 0; i < xi.W.size() && match; ++i)
      match = eta[xi.W[i]] == xi.heights[i];
    hits += match;
  }
  Rational p(hits, total);
  p.canonicalize();
  return p;
}

bool definitional_minimal(const Multigraph& g, const Subconfig& xi,
                          const EnumerationBudget& budget) {
  for (std::size_t i = 0; i < xi.W.size(); ++i)
    if (xi.heights[i] < 0 || xi.heights[i] >= g.degree(xi.W[i])) return false;
  bool any = false;
  bool removable = false;
  for_each_extension(g, xi, budget, [&](const Sandpile& eta) {
    if (removable || !burns_completely(g, eta)) return;
    any = true;
    Sandpile less = eta;
    for (VertexId w : xi.W) {
      if (less[w] == 0) continue;
      --less[w];
      if (burns_completely(g, less)) removable = true;
      ++less[w];
    }
  });
  return any && !removable;
}

bool eta_star_minimal(const Multigraph& g, const Subconfig& xi) {
  for (std::size_t i = 0; i < xi.W.size(); ++i)
    if (xi.heights[i] < 0 || xi.heights[i] >= g.degree(xi.W[i])) return false;
  Sandpile eta(g.num_vertices());
  for (VertexId v : g.vertices()) eta[v] = g.degree(v) - 1;
  for (std::size_t i = 0; i < xi.W.size(); ++i) eta[xi.W[i]] = xi.heights[i];
  if (!burns_completely(g, eta)) return false;
  for (VertexId w : xi.W) {
    if (eta[w] == 0) continue;
    --eta[w];
    const bool still = burns_completely(g, eta);
    ++eta[w];
    if (still) return false;
  }
  return true;
}

Rational tree_fraction(const std::vector<EdgeSet>& trees, const EdgeSet& present,
                       const EdgeSet& absent) {
  std::int64_t hits = 0;
  for (const auto& t : trees) {
    auto has = [&](EdgeId e) { return std::find(t.begin(), t.end(), e) != t.end(); };
    if (std::all_of(present.begin(), present.end(), has) &&
        std::none_of(absent.begin(), absent.end(), has))
      ++hits;
  }
  Rational p(hits, static_cast<long>(trees.size()));
  p.canonicalize();
  return p;
}

Multigraph random_multigraph(std::mt19937_64& rng, int vertices, int edges) {
  if (vertices < 2 || edges < vertices - 1)
    throw std::invalid_argument("random_multigraph: need edges >= vertices - 1 >= 1");
  std::vector<std::string> labels{"s"};
  for (int i = 1; i < vertices; ++i) labels.push_back("v" + std::to_string(i));
  std::vector<Multigraph::RawEdge> raw;
  std::bernoulli_distribution flip(0.5);
  auto add = [&](VertexId a, VertexId b) {
    if (flip(rng)) std::swap(a, b);
    raw.push_back({a, b, "e" + std::to_string(raw.size())});
  };
  for (int i = 1; i < vertices; ++i) {
    std::uniform_int_distribution<int> pick(0, i - 1);
    add(i, pick(rng));
  }
  std::uniform_int_distribution<int> any(0, vertices - 1);
  while (static_cast<int>(raw.size()) < edges) {
    const int a = any(rng);
    const int b = any(rng);
    if (a != b) add(a, b);
  }
  std::shuffle(raw.begin(), raw.end(), rng);
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i].label = "e" + std::to_string(i);
  return Multigraph(std::move(labels), 0, std::move(raw));
}

}  // namespace sandpile::oracle
