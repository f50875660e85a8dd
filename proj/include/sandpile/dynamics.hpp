#ifndef SANDPILE_DYNAMICS_HPP
#define SANDPILE_DYNAMICS_HPP

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "sandpile/graph.hpp"

namespace sandpile {

class NotStableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotRecurrentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Heights indexed by vertex id. The sink entry is carried along but ignored.
struct Sandpile {
  std::vector<std::int64_t> height;

  Sandpile() = default;
  explicit Sandpile(std::size_t num_vertices) : height(num_vertices, 0) {}

  std::int64_t& operator[](VertexId v) { return height[v]; }
  std::int64_t operator[](VertexId v) const { return height[v]; }
  friend bool operator==(const Sandpile&, const Sandpile&) = default;
};

Sandpile zero_sandpile(const Multigraph& g);
// eta(x) = deg(x) - 1 everywhere.
Sandpile max_stable(const Multigraph& g);
bool is_stable(const Multigraph& g, const Sandpile& eta);
std::int64_t total_particles(const Multigraph& g, const Sandpile& eta);
// Throws if the height vector does not fit g or has negative entries.
void check_shape(const Multigraph& g, const Sandpile& eta);

struct TopplingReport {
  std::vector<std::int64_t> odometer;  // by vertex id
  std::int64_t lost_to_sink = 0;
};

struct Stabilized {
  Sandpile result;
  TopplingReport report;
};

// FIFO queue of unstable vertices.
Stabilized stabilize(const Multigraph& g, Sandpile eta);
// Topples a uniformly chosen unstable vertex at each step.
Stabilized stabilize_random_order(const Multigraph& g, Sandpile eta, std::mt19937_64& rng);
// In-place FIFO stabilization without bookkeeping; the hot path of the chain.
void stabilize_in_place(const Multigraph& g, Sandpile& eta);

// Adds a particle at a uniform non-sink vertex and stabilizes.
void chain_step(const Multigraph& g, Sandpile& eta, std::mt19937_64& rng);
Sandpile chain_step(const Multigraph& g, const Sandpile& eta, std::mt19937_64& rng);

struct BurningTest {
  bool recurrent = false;
  std::vector<std::vector<VertexId>> rounds;  // witness; round 0 ({s}) omitted
  std::vector<VertexId> unburnt;
};

// Iterated burning. Throws NotStableError for unstable input.
BurningTest dhar_recurrence_test(const Multigraph& g, const Sandpile& eta);
bool is_recurrent(const Multigraph& g, const Sandpile& eta);

// Round-by-round record of burning based on Q. Round 0 of phase 1 is {s};
// round 0 of phase 2 is everything burnt in phase 1 together with s. Both
// are implicit and not stored.
struct BurningRecord {
  std::vector<std::vector<VertexId>> phase1;
  std::vector<std::vector<VertexId>> phase2;
  std::vector<VertexId> unburnt_after_phase1;  // W0
  std::vector<VertexId> unburnt;               // empty iff recurrent
  std::vector<int> phase;                      // by vertex: 0 sink, 1, 2, -1 unburnt
  std::vector<int> round;                      // by vertex, 1-based within its phase

  int fixed_point_index() const { return static_cast<int>(phase1.size()); }
  bool complete() const { return unburnt.empty(); }
};

BurningRecord two_phase_burn(const Multigraph& g, const Sandpile& eta,
                             std::span<const VertexId> Q);

// E_{V,Q}: every vertex outside Q burns in phase 1. Throws for
// non-recurrent eta.
bool is_E_VQ(const Multigraph& g, const Sandpile& eta, std::span<const VertexId> Q);
std::vector<VertexId> W0(const Multigraph& g, const Sandpile& eta,
                         std::span<const VertexId> Q);

// Rounds flattened into one burning sequence, ties broken by vertex label.
std::vector<VertexId> linearize(const Multigraph& g, const BurningRecord& record);

struct SamplerOptions {
  std::uint64_t seed = 1;
  std::int64_t burn_in = -1;  // negative: 2 * |V| * max degree
  std::int64_t thin = 1;
  std::int64_t count = 1;
};

std::int64_t default_burn_in(const Multigraph& g);

// Runs the chain from the all-maximal state (which is recurrent) and calls
// `visit(index, state)` for each emitted sample.
template <typename Visitor>
void sample_stationary(const Multigraph& g, const SamplerOptions& opts, Visitor&& visit) {
  if (opts.thin < 1) throw std::invalid_argument("thin must be at least 1");
  std::mt19937_64 rng(opts.seed);
  Sandpile eta = max_stable(g);
  const std::int64_t burn = opts.burn_in < 0 ? default_burn_in(g) : opts.burn_in;
  for (std::int64_t i = 0; i < burn; ++i) chain_step(g, eta, rng);
  for (std::int64_t k = 0; k < opts.count; ++k) {
    for (std::int64_t i = 0; i < opts.thin; ++i) chain_step(g, eta, rng);
    visit(k, static_cast<const Sandpile&>(eta));
  }
}

std::vector<Sandpile> sample_stationary(const Multigraph& g, const SamplerOptions& opts);

}  // namespace sandpile

#endif  // SANDPILE_DYNAMICS_HPP
