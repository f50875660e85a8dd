#ifndef SANDPILE_Z2_HPP
#define SANDPILE_Z2_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sandpile/bijection.hpp"
#include "sandpile/graph.hpp"
#include "sandpile/matrix.hpp"
#include "sandpile/minimal.hpp"
#include "sandpile/potential_kernel.hpp"

namespace sandpile {

// ---- limiting transfer current --------------------------------------------

struct Z2TransferCurrent {
  std::vector<LatticeEdge> edges;
  Matrix<double> Y;
};

// Y(e,f) = [a(tf-he) + a(hf-te) - a(tf-te) - a(hf-he)] / 4, the limit of the
// wired-box matrices.
Z2TransferCurrent z2_transfer_current(const PotentialKernelTable& a,
                                      std::span<const LatticeEdge> edges);

double z2_prob_absent(const PotentialKernelTable& a, std::span<const LatticeEdge> edges);

// Finite graph on W' = W plus its finite holes in Z^2, everything else wired
// into "s". Edge labels are lattice edges, oriented towards +x/+y inside W'
// and towards the sink on the boundary.
Multigraph z2_wired_graph(std::span<const Point> W);

struct Z2MinimalProbability {
  std::vector<LatticeEdge> E;
  double value = 0.0;
};

// lim nu_{V_n}[eta_W = xi] = det K_{Z^2} over E. Throws NotMinimalError.
Z2MinimalProbability z2_minimal_probability(const PotentialKernelTable& a,
                                            std::span<const Point> W,
                                            std::span<const std::int64_t> xi);

// Through z2_minimal_probability with W = {o}, xi = 0.
double p0_z2(const PotentialKernelTable& a);
double p0_closed_form();  // 2/pi^2 - 4/pi^3

// nu[eta(x) = 0, eta(y) = 0] - p0^2; for x = y the single-site p0 - p0^2.
double pair_correlation_zero_height(const PotentialKernelTable& a, Point x, Point y);

struct DecayRow {
  int distance;
  double value;
};

struct DecayExperiment {
  std::vector<DecayRow> rows;
  double slope = 0.0;
  double intercept = 0.0;
};

// x = o, y = (d, 0); least squares of log|value| on log d.
DecayExperiment decay_experiment(const PotentialKernelTable& a, std::span<const int> distances);

// ---- sampling --------------------------------------------------------------

// Wilson's algorithm rooted at the sink: loop-erased walks that pick a
// uniform incident edge id, hence uniform over spanning trees as edge sets.
RootedSpanningTree wilson_ust(const Multigraph& g, std::mt19937_64& rng);

// Deterministic per-index seed from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// Default worker count: SANDPILE_THREADS if set, else 1.
unsigned default_threads();

// Runs body(i, rng_i) for i in [0, count) on `threads` workers; rng_i is
// seeded from derive_seed(master, i), so results do not depend on the
// worker count.
void parallel_samples(std::uint64_t count, std::uint64_t master, unsigned threads,
                      const std::function<void(std::uint64_t, std::mt19937_64&)>& body);

// ---- wired shell and series -----------------------------------------------

// W u {s}: edges inside W, plus an edge x-s for every lattice edge from
// x in Q to a site outside W. Vertices of W \ Q get no sink edges. Empty
// if the sink ends up isolated from some vertex.
std::optional<Multigraph> wired_shell(std::span<const Point> W, std::span<const Point> Q);

// Connected sets of at most max_size sites containing the origin
// (fixed polyominoes), each sorted.
std::vector<std::vector<Point>> lattice_animals(int max_size);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
  double lo(double z) const { return value - z * std_error; }
  double hi(double z) const { return value + z * std_error; }
};

Estimate bernoulli_estimate(std::uint64_t hits, std::uint64_t samples);

// E_{V,W}: no tree edge points from outside W into W.
bool event_no_edge_into(const LatticeBox& box, const RootedSpanningTree& t,
                        std::span<const Point> W);

struct PWEstimate {
  Estimate box;        // at the requested side
  Estimate half_box;   // at half the side; no samples if W does not fit
  int side = 0;
};

PWEstimate estimate_pW(std::span<const Point> W, int side, std::uint64_t samples,
                       std::uint64_t seed, unsigned threads);

struct SeriesTerm {
  std::vector<Point> W;
  Rational factor;       // tau(G*_W)/tau(G_W) * nu_{G*_W}[eta_o = xi]
  Rational shell_prob;   // nu_{G*_W}[eta_o = xi]
  Rational tree_ratio;   // tau(G*_W)/tau(G_W)
  Estimate pW;
};

struct SeriesLevel {
  int max_w = 0;
  Estimate partial_sum;
  Estimate mass;  // sum over all heights at this truncation
  double truncation_gap = 0.0;
};

struct SeriesResult {
  int height = 0;
  int side = 0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  std::vector<SeriesTerm> terms;  // nonzero factors only
  std::vector<SeriesLevel> levels;
  Estimate mc_frequency;          // eta(o) = height, from the same trees
};

// Q = {o}: sum over connected W containing o with |W| <= max_w of
// p_W * tau(G*_W)/tau(G_W) * nu_{G*_W}[eta_o = xi], estimated from
// uniform spanning trees of the centred box. One result per height 0..3,
// all from the same trees.
std::vector<SeriesResult> height_prob_series_all(int max_w, int side, std::uint64_t samples,
                                                 std::uint64_t seed, unsigned threads);
SeriesResult height_prob_series(int height, int max_w, int side, std::uint64_t samples,
                                std::uint64_t seed, unsigned threads);

// Frequency of eta(o) = height over exact uniform recurrent samples
// (Wilson tree pushed through the bijection).
std::vector<Estimate> height_frequencies(int side, std::uint64_t samples, std::uint64_t seed,
                                         unsigned threads);

// Histogram of |D({o})|, capped at `cap` (last bucket collects the rest).
std::vector<Estimate> descendant_size_distribution(int side, int cap, std::uint64_t samples,
                                                   std::uint64_t seed, unsigned threads);

}  // namespace sandpile

#endif  // SANDPILE_Z2_HPP
