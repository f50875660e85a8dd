#include "sandpile/dynamics.hpp"

#include <algorithm>
#include <deque>
#include <string>

namespace sandpile {

Sandpile zero_sandpile(const Multigraph& g) { return Sandpile(g.num_vertices()); }

Sandpile max_stable(const Multigraph& g) {
  Sandpile eta(g.num_vertices());
  for (VertexId v : g.vertices()) eta[v] = g.degree(v) - 1;
  return eta;
}

void check_shape(const Multigraph& g, const Sandpile& eta) {
  if (eta.height.size() != g.num_vertices())
    throw std::invalid_argument("sandpile size does not match graph");
  for (VertexId v : g.vertices())
    if (eta[v] < 0)
      throw std::invalid_argument("negative height at '" + g.label(v) + "'");
}

bool is_stable(const Multigraph& g, const Sandpile& eta) {
  for (VertexId v : g.vertices())
    if (eta[v] >= g.degree(v)) return false;
  return true;
}

std::int64_t total_particles(const Multigraph& g, const Sandpile& eta) {
  std::int64_t sum = 0;
  for (VertexId v : g.vertices()) sum += eta[v];
  return sum;
}

namespace {

// Topples v as many times as it can in one go; returns the count.
std::int64_t topple_all(const Multigraph& g, Sandpile& eta, VertexId v) {
  const std::int64_t deg = g.degree(v);
  const std::int64_t times = eta[v] / deg;
  eta[v] -= times * deg;
  for (const auto& nb : g.neighbors(v)) eta[nb.vertex] += times * nb.multiplicity;
  return times;
}

}  // namespace

Stabilized stabilize(const Multigraph& g, Sandpile eta) {
  check_shape(g, eta);
  const VertexId s = g.sink();
  eta[s] = 0;
  Stabilized out;
  out.report.odometer.assign(g.num_vertices(), 0);
  std::vector<char> queued(g.num_vertices(), 0);
  std::deque<VertexId> queue;
  for (VertexId v : g.vertices())
    if (eta[v] >= g.degree(v)) {
      queue.push_back(v);
      queued[v] = 1;
    }
  while (!queue.empty()) {
    const VertexId v = queue.front();
    queue.pop_front();
    queued[v] = 0;
    out.report.odometer[v] += topple_all(g, eta, v);
    for (const auto& nb : g.neighbors(v)) {
      const VertexId u = nb.vertex;
      if (u == s || queued[u] || eta[u] < g.degree(u)) continue;
      queued[u] = 1;
      queue.push_back(u);
    }
  }
  out.report.lost_to_sink = eta[s];
  eta[s] = 0;
  out.result = std::move(eta);
  return out;
}

Stabilized stabilize_random_order(const Multigraph& g, Sandpile eta, std::mt19937_64& rng) {
  check_shape(g, eta);
  const VertexId s = g.sink();
  eta[s] = 0;
  Stabilized out;
  out.report.odometer.assign(g.num_vertices(), 0);
  std::vector<VertexId> unstable;
  std::vector<int> slot(g.num_vertices(), -1);
  auto push = [&](VertexId v) {
    if (slot[v] >= 0) return;
    slot[v] = static_cast<int>(unstable.size());
    unstable.push_back(v);
  };
  auto pop_at = [&](std::size_t i) {
    const VertexId v = unstable[i];
    unstable[i] = unstable.back();
    slot[unstable[i]] = static_cast<int>(i);
    unstable.pop_back();
    slot[v] = -1;
    return v;
  };
  for (VertexId v : g.vertices())
    if (eta[v] >= g.degree(v)) push(v);
  while (!unstable.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, unstable.size() - 1);
    const VertexId v = pop_at(pick(rng));
    eta[v] -= g.degree(v);
    ++out.report.odometer[v];
    for (const auto& nb : g.neighbors(v)) {
      eta[nb.vertex] += nb.multiplicity;
      if (nb.vertex != s && eta[nb.vertex] >= g.degree(nb.vertex)) push(nb.vertex);
    }
    if (eta[v] >= g.degree(v)) push(v);
  }
  out.report.lost_to_sink = eta[s];
  eta[s] = 0;
  out.result = std::move(eta);
  return out;
}

void stabilize_in_place(const Multigraph& g, Sandpile& eta) {
  const VertexId s = g.sink();
  std::vector<VertexId> stack;
  for (VertexId v : g.vertices())
    if (eta[v] >= g.degree(v)) stack.push_back(v);
  while (!stack.empty()) {
    const VertexId v = stack.back();
    stack.pop_back();
    if (eta[v] < g.degree(v)) continue;
    topple_all(g, eta, v);
    for (const auto& nb : g.neighbors(v))
      if (nb.vertex != s && eta[nb.vertex] >= g.degree(nb.vertex)) stack.push_back(nb.vertex);
  }
  eta[s] = 0;
}

void chain_step(const Multigraph& g, Sandpile& eta, std::mt19937_64& rng) {
  const auto& vs = g.vertices();
  std::uniform_int_distribution<std::size_t> pick(0, vs.size() - 1);
  const VertexId u = vs[pick(rng)];
  ++eta[u];
  if (eta[u] >= g.degree(u)) stabilize_in_place(g, eta);
}

Sandpile chain_step(const Multigraph& g, const Sandpile& eta, std::mt19937_64& rng) {
  Sandpile next = eta;
  chain_step(g, next, rng);
  return next;
}

namespace {

struct BurnState {
  const Multigraph& g;
  const Sandpile& eta;
  std::vector<char> unburnt;
  std::vector<int> deg_unburnt;

  BurnState(const Multigraph& graph, const Sandpile& heights)
      : g(graph), eta(heights), unburnt(graph.num_vertices(), 1),
        deg_unburnt(graph.num_vertices(), 0) {
    unburnt[g.sink()] = 0;
    for (VertexId v : g.vertices()) deg_unburnt[v] = degree_into(g, v, unburnt);
  }

  bool burnable(VertexId v) const { return unburnt[v] && eta[v] >= deg_unburnt[v]; }

  void burn(const std::vector<VertexId>& round) {
    for (VertexId v : round) unburnt[v] = 0;
    for (VertexId v : round)
      for (const auto& nb : g.neighbors(v)) deg_unburnt[nb.vertex] -= nb.multiplicity;
  }

  // Runs rounds from the given candidates until a fixed point. Candidates
  // for later rounds are the unburnt neighbours of the previous round.
  std::vector<std::vector<VertexId>> run(std::vector<VertexId> candidates,
                                         const std::vector<char>* forbidden) {
    std::vector<std::vector<VertexId>> rounds;
    std::vector<char> mark(g.num_vertices(), 0);
    while (true) {
      std::vector<VertexId> round;
      for (VertexId v : candidates) {
        if (mark[v]) continue;
        mark[v] = 1;
        if (forbidden && (*forbidden)[v]) continue;
        if (burnable(v)) round.push_back(v);
      }
      for (VertexId v : candidates) mark[v] = 0;
      if (round.empty()) break;
      std::sort(round.begin(), round.end());
      burn(round);
      candidates.clear();
      for (VertexId v : round)
        for (const auto& nb : g.neighbors(v))
          if (unburnt[nb.vertex]) candidates.push_back(nb.vertex);
      rounds.push_back(std::move(round));
    }
    return rounds;
  }

  std::vector<VertexId> remaining() const {
    std::vector<VertexId> out;
    for (VertexId v : g.vertices())
      if (unburnt[v]) out.push_back(v);
    return out;
  }
};

std::vector<VertexId> sink_neighbours(const Multigraph& g) {
  std::vector<VertexId> out;
  for (const auto& nb : g.neighbors(g.sink())) out.push_back(nb.vertex);
  return out;
}

void require_stable(const Multigraph& g, const Sandpile& eta) {
  check_shape(g, eta);
  for (VertexId v : g.vertices())
    if (eta[v] >= g.degree(v))
      throw NotStableError("sandpile is not stable at '" + g.label(v) + "'");
}

}  // namespace

BurningTest dhar_recurrence_test(const Multigraph& g, const Sandpile& eta) {
  require_stable(g, eta);
  BurnState state(g, eta);
  BurningTest out;
  out.rounds = state.run(sink_neighbours(g), nullptr);
  out.unburnt = state.remaining();
  out.recurrent = out.unburnt.empty();
  return out;
}

bool is_recurrent(const Multigraph& g, const Sandpile& eta) {
  return dhar_recurrence_test(g, eta).recurrent;
}

BurningRecord two_phase_burn(const Multigraph& g, const Sandpile& eta,
                             std::span<const VertexId> Q) {
  require_stable(g, eta);
  std::vector<char> in_q(g.num_vertices(), 0);
  for (VertexId q : Q) {
    if (q < 0 || q >= static_cast<VertexId>(g.num_vertices()) || g.is_sink(q))
      throw std::invalid_argument("Q must consist of non-sink vertices");
    in_q[q] = 1;
  }
  BurnState state(g, eta);
  BurningRecord rec;
  rec.phase1 = state.run(sink_neighbours(g), &in_q);
  rec.unburnt_after_phase1 = state.remaining();
  rec.phase2 = state.run(rec.unburnt_after_phase1, nullptr);
  rec.unburnt = state.remaining();

  rec.phase.assign(g.num_vertices(), -1);
  rec.round.assign(g.num_vertices(), 0);
  rec.phase[g.sink()] = 0;
  for (std::size_t i = 0; i < rec.phase1.size(); ++i)
    for (VertexId v : rec.phase1[i]) {
      rec.phase[v] = 1;
      rec.round[v] = static_cast<int>(i) + 1;
    }
  for (std::size_t i = 0; i < rec.phase2.size(); ++i)
    for (VertexId v : rec.phase2[i]) {
      rec.phase[v] = 2;
      rec.round[v] = static_cast<int>(i) + 1;
    }
  return rec;
}

std::vector<VertexId> W0(const Multigraph& g, const Sandpile& eta,
                         std::span<const VertexId> Q) {
  BurningRecord rec = two_phase_burn(g, eta, Q);
  if (!rec.complete()) throw NotRecurrentError("sandpile is not recurrent");
  return rec.unburnt_after_phase1;
}

bool is_E_VQ(const Multigraph& g, const Sandpile& eta, std::span<const VertexId> Q) {
  std::vector<VertexId> distinct(Q.begin(), Q.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  return W0(g, eta, Q).size() == distinct.size();
}

std::vector<VertexId> linearize(const Multigraph& g, const BurningRecord& record) {
  std::vector<VertexId> order;
  for (const auto* phase : {&record.phase1, &record.phase2})
    for (auto round : *phase) {
      std::sort(round.begin(), round.end(),
                [&](VertexId a, VertexId b) { return g.label(a) < g.label(b); });
      order.insert(order.end(), round.begin(), round.end());
    }
  return order;
}

std::int64_t default_burn_in(const Multigraph& g) {
  int max_deg = 0;
  for (VertexId v : g.vertices()) max_deg = std::max(max_deg, g.degree(v));
  return 2 * static_cast<std::int64_t>(g.vertices().size()) * max_deg;
}

std::vector<Sandpile> sample_stationary(const Multigraph& g, const SamplerOptions& opts) {
  std::vector<Sandpile> out;
  out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(opts.count, 0)));
  sample_stationary(g, opts, [&](std::int64_t, const Sandpile& eta) { out.push_back(eta); });
  return out;
}

}  // namespace sandpile
