#include "sandpile/z2.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numbers>
#include <set>
#include <thread>

#include "sandpile/dynamics.hpp"
#include "sandpile/transfer_current.hpp"

namespace sandpile {

Z2TransferCurrent z2_transfer_current(const PotentialKernelTable& a,
                                      std::span<const LatticeEdge> edges) {
  Z2TransferCurrent out;
  out.edges.assign(edges.begin(), edges.end());
  const std::size_t k = edges.size();
  out.Y = Matrix<double>(k, k);
  auto pot = [&](Point p, Point q) { return a.at(p - q); };
  for (std::size_t i = 0; i < k; ++i) {
    const LatticeEdge& e = edges[i];
    for (std::size_t j = 0; j < k; ++j) {
      const LatticeEdge& f = edges[j];
      out.Y(i, j) = 0.25 * (pot(f.tail, e.head) + pot(f.head, e.tail) - pot(f.tail, e.tail) -
                            pot(f.head, e.head));
    }
  }
  return out;
}

double z2_prob_absent(const PotentialKernelTable& a, std::span<const LatticeEdge> edges) {
  if (edges.empty()) return 1.0;
  const Z2TransferCurrent y = z2_transfer_current(a, edges);
  Matrix<double> k(y.Y.rows(), y.Y.cols());
  for (std::size_t i = 0; i < k.rows(); ++i)
    for (std::size_t j = 0; j < k.cols(); ++j) k(i, j) = (i == j ? 1.0 : 0.0) - y.Y(i, j);
  return determinant(k);
}

namespace {

std::vector<Point> sorted_unique(std::span<const Point> pts) {
  std::vector<Point> out(pts.begin(), pts.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Finite components of Z^2 \ W.
std::vector<Point> holes_of(const std::vector<Point>& W) {
  int x0 = W[0].x, x1 = W[0].x, y0 = W[0].y, y1 = W[0].y;
  for (const Point& p : W) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  --x0;
  --y0;
  ++x1;
  ++y1;
  const std::set<Point> in_w(W.begin(), W.end());
  std::set<Point> outside;
  std::vector<Point> stack{{x0, y0}};
  outside.insert({x0, y0});
  while (!stack.empty()) {
    const Point p = stack.back();
    stack.pop_back();
    for (const Point step : kLatticeSteps) {
      const Point q = p + step;
      if (q.x < x0 || q.x > x1 || q.y < y0 || q.y > y1) continue;
      if (in_w.count(q) || outside.count(q)) continue;
      outside.insert(q);
      stack.push_back(q);
    }
  }
  std::vector<Point> holes;
  for (int x = x0; x <= x1; ++x)
    for (int y = y0; y <= y1; ++y)
      if (!in_w.count({x, y}) && !outside.count({x, y})) holes.push_back({x, y});
  return holes;
}

// W u {s} with each lattice edge leaving W sent to the sink, except where
// `keep_outside(x)` is false (then those edges are dropped).
template <typename KeepOutside>
std::optional<Multigraph> lattice_graph(const std::vector<Point>& sites, KeepOutside keep_outside) {
  std::map<Point, VertexId> id;
  std::vector<std::string> labels;
  for (const Point& p : sites) {
    id[p] = static_cast<VertexId>(labels.size());
    labels.push_back(point_label(p));
  }
  const VertexId sink = static_cast<VertexId>(labels.size());
  labels.push_back("s");
  std::vector<Multigraph::RawEdge> raw;
  std::vector<std::vector<VertexId>> adj(labels.size());
  for (const Point& p : sites)
    for (const Point step : kLatticeSteps) {
      const Point q = p + step;
      auto it = id.find(q);
      if (it != id.end()) {
        if (step.x + step.y > 0) {
          raw.push_back({id[p], it->second, lattice_edge_label({p, q})});
          adj[id[p]].push_back(it->second);
          adj[it->second].push_back(id[p]);
        }
      } else if (keep_outside(p)) {
        raw.push_back({id[p], sink, lattice_edge_label({p, q})});
        adj[id[p]].push_back(sink);
        adj[sink].push_back(id[p]);
      }
    }
  std::vector<char> seen(labels.size(), 0);
  std::vector<VertexId> stack{sink};
  seen[sink] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const VertexId v = stack.back();
    stack.pop_back();
    for (VertexId u : adj[v])
      if (!seen[u]) {
        seen[u] = 1;
        ++reached;
        stack.push_back(u);
      }
  }
  if (reached != labels.size()) return std::nullopt;
  return Multigraph(std::move(labels), sink, std::move(raw));
}

Multigraph z2_wire(const std::vector<Point>& W) {
  return *lattice_graph(W, [](const Point&) { return true; });
}

}  // namespace

Multigraph z2_wired_graph(std::span<const Point> W) {
  if (W.empty()) throw std::invalid_argument("W must be nonempty");
  std::vector<Point> sites = sorted_unique(W);
  for (const Point& h : holes_of(sites)) sites.push_back(h);
  std::sort(sites.begin(), sites.end());
  return z2_wire(sites);
}

Z2MinimalProbability z2_minimal_probability(const PotentialKernelTable& a,
                                            std::span<const Point> W,
                                            std::span<const std::int64_t> xi) {
  if (W.size() != xi.size()) throw std::invalid_argument("W and xi differ in length");
  const Multigraph g = z2_wired_graph(W);
  Subconfig sub;
  for (std::size_t i = 0; i < W.size(); ++i) {
    sub.W.push_back(g.at(point_label(W[i])));
    sub.heights.push_back(xi[i]);
  }
  Z2MinimalProbability out;
  for (EdgeId e : edge_set_E(g, sub)) {
    auto le = parse_lattice_edge(g.edge(e).label);
    if (!le) throw std::logic_error("edge label is not a lattice edge");
    out.E.push_back(*le);
  }
  out.value = z2_prob_absent(a, out.E);
  return out;
}

double p0_closed_form() {
  const double pi = std::numbers::pi;
  return 2.0 / (pi * pi) - 4.0 / (pi * pi * pi);
}

double p0_z2(const PotentialKernelTable& a) {
  const Point o{0, 0};
  const std::int64_t zero = 0;
  return z2_minimal_probability(a, std::span<const Point>(&o, 1),
                                std::span<const std::int64_t>(&zero, 1))
      .value;
}

double pair_correlation_zero_height(const PotentialKernelTable& a, Point x, Point y) {
  const double p0 = p0_z2(a);
  if (x == y) return p0 - p0 * p0;
  const Point W[2] = {x, y};
  const std::int64_t xi[2] = {0, 0};
  double joint = 0.0;
  try {
    joint = z2_minimal_probability(a, W, xi).value;
  } catch (const NotMinimalError&) {
    joint = 0.0;  // adjacent zeros are forbidden
  }
  return joint - p0 * p0;
}

DecayExperiment decay_experiment(const PotentialKernelTable& a, std::span<const int> distances) {
  DecayExperiment out;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int d : distances) {
    const double v = pair_correlation_zero_height(a, {0, 0}, {d, 0});
    out.rows.push_back({d, v});
    const double lx = std::log(static_cast<double>(d));
    const double ly = std::log(std::abs(v));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(out.rows.size());
  if (n >= 2) {
    out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    out.intercept = (sy - out.slope * sx) / n;
  }
  return out;
}

RootedSpanningTree wilson_ust(const Multigraph& g, std::mt19937_64& rng) {
  const std::size_t n = g.num_vertices();
  std::vector<char> in_tree(n, 0);
  std::vector<EdgeId> next(n, kNoEdge);
  in_tree[g.sink()] = 1;
  for (VertexId start : g.vertices()) {
    VertexId u = start;
    while (!in_tree[u]) {
      const auto inc = g.incident(u);
      std::uniform_int_distribution<std::size_t> pick(0, inc.size() - 1);
      const Incidence& step = inc[pick(rng)];
      next[u] = step.edge;
      u = step.other;
    }
    u = start;
    while (!in_tree[u]) {
      in_tree[u] = 1;
      u = g.other_end(next[u], u);
    }
  }
  RootedSpanningTree t;
  t.parent_edge = std::move(next);
  t.parent_edge[g.sink()] = kNoEdge;
  return t;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 on the pair
  std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

unsigned default_threads() {
  if (const char* env = std::getenv("SANDPILE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return 1;
}

void parallel_samples(std::uint64_t count, std::uint64_t master, unsigned threads,
                      const std::function<void(std::uint64_t, std::mt19937_64&)>& body) {
  threads = std::max(1u, threads);
  std::atomic<std::uint64_t> cursor{0};
  auto worker = [&] {
    std::mt19937_64 rng;
    for (std::uint64_t i = cursor++; i < count; i = cursor++) {
      rng.seed(derive_seed(master, i));
      body(i, rng);
    }
  };
  if (threads == 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

std::optional<Multigraph> wired_shell(std::span<const Point> W, std::span<const Point> Q) {
  const std::vector<Point> w = sorted_unique(W);
  const std::vector<Point> q = sorted_unique(Q);
  if (w.empty()) throw std::invalid_argument("W must be nonempty");
  for (const Point& p : q)
    if (!std::binary_search(w.begin(), w.end(), p))
      throw std::invalid_argument("Q must be a subset of W");
  return lattice_graph(w, [&](const Point& p) { return std::binary_search(q.begin(), q.end(), p); });
}

std::vector<std::vector<Point>> lattice_animals(int max_size) {
  std::set<std::vector<Point>> seen;
  std::vector<std::vector<Point>> frontier{{Point{0, 0}}};
  seen.insert(frontier[0]);
  std::vector<std::vector<Point>> out = frontier;
  for (int size = 2; size <= max_size; ++size) {
    std::vector<std::vector<Point>> grown;
    for (const auto& animal : frontier)
      for (const Point& p : animal)
        for (const Point step : kLatticeSteps) {
          const Point q = p + step;
          if (std::binary_search(animal.begin(), animal.end(), q)) continue;
          std::vector<Point> next = animal;
          next.insert(std::upper_bound(next.begin(), next.end(), q), q);
          if (seen.insert(next).second) grown.push_back(std::move(next));
        }
    out.insert(out.end(), grown.begin(), grown.end());
    frontier = std::move(grown);
  }
  return out;
}

Estimate bernoulli_estimate(std::uint64_t hits, std::uint64_t samples) {
  Estimate e;
  e.samples = samples;
  if (samples == 0) return e;
  e.value = static_cast<double>(hits) / static_cast<double>(samples);
  e.std_error = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(samples));
  return e;
}

namespace {

Estimate mean_estimate(double sum, double sum_sq, std::uint64_t n) {
  Estimate e;
  e.samples = n;
  if (n == 0) return e;
  const double dn = static_cast<double>(n);
  e.value = sum / dn;
  const double var = n > 1 ? std::max(0.0, (sum_sq - dn * e.value * e.value) / (dn - 1)) : 0.0;
  e.std_error = std::sqrt(var / dn);
  return e;
}

// Box ids of W, and for each w the box ids of lattice neighbours outside W.
struct BoxPattern {
  std::vector<std::pair<VertexId, VertexId>> watch;  // (outside u, w)
};

BoxPattern box_pattern(const LatticeBox& box, std::span<const Point> W, bool require_margin) {
  BoxPattern pat;
  for (const Point& w : W) {
    if (!box.contains(w)) throw std::invalid_argument("W is not inside the box");
    for (const Point step : kLatticeSteps) {
      const Point u = w + step;
      if (std::find(W.begin(), W.end(), u) != W.end()) continue;
      if (!box.contains(u)) {
        if (require_margin) throw std::invalid_argument("W touches the box boundary");
        continue;
      }
      pat.watch.push_back({box.vertex(u), box.vertex(w)});
    }
  }
  return pat;
}

bool pattern_holds(const Multigraph& g, const BoxPattern& pat, const RootedSpanningTree& t) {
  for (auto [u, w] : pat.watch)
    if (parent_of(g, t, u) == w) return false;
  return true;
}

Estimate pW_on_box(std::span<const Point> W, int side, std::uint64_t samples,
                   std::uint64_t seed, unsigned threads) {
  const LatticeBox box = lattice_box(centered_box(side));
  const BoxPattern pat = box_pattern(box, W, true);
  std::vector<char> hit(samples, 0);
  parallel_samples(samples, seed, threads, [&](std::uint64_t i, std::mt19937_64& rng) {
    hit[i] = pattern_holds(box.graph, pat, wilson_ust(box.graph, rng));
  });
  std::uint64_t hits = 0;
  for (char h : hit) hits += h;
  return bernoulli_estimate(hits, samples);
}

}  // namespace

bool event_no_edge_into(const LatticeBox& box, const RootedSpanningTree& t,
                        std::span<const Point> W) {
  return pattern_holds(box.graph, box_pattern(box, W, false), t);
}

PWEstimate estimate_pW(std::span<const Point> W, int side, std::uint64_t samples,
                       std::uint64_t seed, unsigned threads) {
  PWEstimate out;
  out.side = side;
  out.box = pW_on_box(W, side, samples, seed, threads);
  const LatticeBoxSpec half = centered_box(std::max(1, side / 2));
  const bool fits = std::all_of(W.begin(), W.end(), [&](const Point& p) {
    return p.x > half.x0 && p.x < half.x1 && p.y > half.y0 && p.y < half.y1;
  });
  if (fits)
    out.half_box = pW_on_box(W, std::max(1, side / 2), samples, derive_seed(seed, ~0ull), threads);
  return out;
}

namespace {

struct ShellCounts {
  std::vector<BigInt> by_height;  // #{zeta recurrent on G*_W : zeta(o) = k}
  BigInt total;                   // tau(G*_W)
};

ShellCounts count_shell(const Multigraph& shell, VertexId o) {
  ShellCounts out;
  out.by_height.assign(static_cast<std::size_t>(shell.degree(o)), BigInt(0));
  Sandpile eta(shell.num_vertices());
  const auto& vs = shell.vertices();
  while (true) {
    if (is_recurrent(shell, eta)) {
      out.by_height[static_cast<std::size_t>(eta[o])] += 1;
      out.total += 1;
    }
    std::size_t k = vs.size();
    while (k > 0) {
      const VertexId v = vs[k - 1];
      if (eta[v] + 1 < shell.degree(v)) {
        ++eta[v];
        break;
      }
      eta[v] = 0;
      --k;
    }
    if (k == 0) break;
  }
  return out;
}

}  // namespace

std::vector<SeriesResult> height_prob_series_all(int max_w, int side, std::uint64_t samples,
                                                 std::uint64_t seed, unsigned threads) {
  if (max_w < 1) throw std::invalid_argument("max |W| must be at least 1");
  if (max_w > 8) throw std::invalid_argument("max |W| above 8 is beyond the enumeration budget");
  constexpr int kHeights = 4;
  const Point origin{0, 0};
  const auto animals = lattice_animals(max_w);

  struct Candidate {
    std::vector<Point> W;
    Rational factor[kHeights];
    Rational shell_prob[kHeights];
    Rational tree_ratio;
  };
  std::vector<Candidate> candidates;
  for (const auto& W : animals) {
    auto shell = wired_shell(W, std::span<const Point>(&origin, 1));
    if (!shell) continue;
    const ShellCounts counts = count_shell(*shell, shell->at(point_label(origin)));
    if (counts.total == 0) continue;
    const BigInt tau_w = spanning_tree_count(z2_wire(W));
    Candidate c;
    c.W = W;
    c.tree_ratio = Rational(counts.total, tau_w);
    c.tree_ratio.canonicalize();
    for (int k = 0; k < kHeights; ++k) {
      const BigInt count = k < static_cast<int>(counts.by_height.size())
                               ? counts.by_height[static_cast<std::size_t>(k)]
                               : BigInt(0);
      c.factor[k] = Rational(count, tau_w);
      c.factor[k].canonicalize();
      c.shell_prob[k] = Rational(count, counts.total);
      c.shell_prob[k].canonicalize();
    }
    candidates.push_back(std::move(c));
  }

  const LatticeBox box = lattice_box(centered_box(side));
  std::vector<BoxPattern> patterns;
  for (const auto& c : candidates) patterns.push_back(box_pattern(box, c.W, true));
  const VertexId o = box.vertex(origin);

  // Per sample: which candidates fired, and eta(o).
  std::vector<std::vector<char>> fired(samples);
  std::vector<int> height_at_o(samples, 0);
  parallel_samples(samples, seed, threads, [&](std::uint64_t i, std::mt19937_64& rng) {
    const RootedSpanningTree t = wilson_ust(box.graph, rng);
    auto& f = fired[i];
    f.resize(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c)
      f[c] = pattern_holds(box.graph, patterns[c], t);
    height_at_o[i] = static_cast<int>(tree_to_sandpile(box.graph, t, {})[o]);
  });

  std::vector<double> factor_d(candidates.size() * kHeights), ratio_d(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    ratio_d[c] = candidates[c].tree_ratio.get_d();
    for (int k = 0; k < kHeights; ++k) factor_d[c * kHeights + k] = candidates[c].factor[k].get_d();
  }

  std::vector<SeriesResult> results(kHeights);
  std::uint64_t height_hits[kHeights] = {0, 0, 0, 0};
  for (std::uint64_t i = 0; i < samples; ++i)
    if (height_at_o[i] < kHeights) ++height_hits[height_at_o[i]];

  for (int k = 0; k < kHeights; ++k) {
    SeriesResult& r = results[k];
    r.height = k;
    r.side = side;
    r.samples = samples;
    r.seed = seed;
    r.mc_frequency = bernoulli_estimate(height_hits[k], samples);
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (candidates[c].factor[k] == 0) continue;
      std::uint64_t hits = 0;
      for (std::uint64_t i = 0; i < samples; ++i) hits += fired[i][c];
      SeriesTerm term;
      term.W = candidates[c].W;
      term.factor = candidates[c].factor[k];
      term.shell_prob = candidates[c].shell_prob[k];
      term.tree_ratio = candidates[c].tree_ratio;
      term.pW = bernoulli_estimate(hits, samples);
      r.terms.push_back(std::move(term));
    }
  }

  // Partial sums as per-sample means, so the CI accounts for correlations
  // between terms.
  for (int m = 1; m <= max_w; ++m) {
    double sum[kHeights] = {}, sum_sq[kHeights] = {};
    double mass = 0.0, mass_sq = 0.0;
    for (std::uint64_t i = 0; i < samples; ++i) {
      double x[kHeights] = {};
      double xm = 0.0;
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        if (!fired[i][c] || static_cast<int>(candidates[c].W.size()) > m) continue;
        for (int k = 0; k < kHeights; ++k) x[k] += factor_d[c * kHeights + k];
        xm += ratio_d[c];
      }
      for (int k = 0; k < kHeights; ++k) {
        sum[k] += x[k];
        sum_sq[k] += x[k] * x[k];
      }
      mass += xm;
      mass_sq += xm * xm;
    }
    const Estimate mass_est = mean_estimate(mass, mass_sq, samples);
    for (int k = 0; k < kHeights; ++k) {
      SeriesLevel level;
      level.max_w = m;
      level.partial_sum = mean_estimate(sum[k], sum_sq[k], samples);
      level.mass = mass_est;
      level.truncation_gap = std::max(0.0, 1.0 - mass_est.value);
      results[k].levels.push_back(level);
    }
  }
  return results;
}

SeriesResult height_prob_series(int height, int max_w, int side, std::uint64_t samples,
                                std::uint64_t seed, unsigned threads) {
  if (height < 0 || height > 3) throw std::invalid_argument("height must be in 0..3");
  return height_prob_series_all(max_w, side, samples, seed, threads)[height];
}

std::vector<Estimate> height_frequencies(int side, std::uint64_t samples, std::uint64_t seed,
                                         unsigned threads) {
  const LatticeBox box = lattice_box(centered_box(side));
  const VertexId o = box.vertex({0, 0});
  std::vector<int> h(samples, 0);
  parallel_samples(samples, seed, threads, [&](std::uint64_t i, std::mt19937_64& rng) {
    h[i] = static_cast<int>(tree_to_sandpile(box.graph, wilson_ust(box.graph, rng), {})[o]);
  });
  std::vector<std::uint64_t> hits(4, 0);
  for (int v : h) ++hits[static_cast<std::size_t>(v)];
  std::vector<Estimate> out;
  for (std::uint64_t c : hits) out.push_back(bernoulli_estimate(c, samples));
  return out;
}

std::vector<Estimate> descendant_size_distribution(int side, int cap, std::uint64_t samples,
                                                   std::uint64_t seed, unsigned threads) {
  if (cap < 1) throw std::invalid_argument("cap must be positive");
  const LatticeBox box = lattice_box(centered_box(side));
  const VertexId o = box.vertex({0, 0});
  std::vector<int> size(samples, 0);
  parallel_samples(samples, seed, threads, [&](std::uint64_t i, std::mt19937_64& rng) {
    const auto d = descendants(box.graph, wilson_ust(box.graph, rng), std::span<const VertexId>(&o, 1));
    size[i] = std::min(cap, static_cast<int>(d.size()));
  });
  std::vector<std::uint64_t> hits(static_cast<std::size_t>(cap) + 1, 0);
  for (int s : size) ++hits[static_cast<std::size_t>(s)];
  std::vector<Estimate> out;
  for (std::uint64_t c : hits) out.push_back(bernoulli_estimate(c, samples));
  return out;
}

}  // namespace sandpile
