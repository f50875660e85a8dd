#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sandpile/bijection.hpp"
#include "sandpile/dynamics.hpp"
#include "sandpile/io.hpp"
#include "sandpile/minimal.hpp"
#include "sandpile/oracle.hpp"
#include "sandpile/potential_kernel.hpp"
#include "sandpile/transfer_current.hpp"
#include "sandpile/z2.hpp"

using namespace sandpile;
using io::json;

namespace {

constexpr const char* kVersion = "0.1.0";

// Bad flag values that CLI11 cannot see (unknown vertex, malformed list).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string out;
  std::string csv;
};

// ---- output ------------------------------------------------------------------

json fraction_json(const Rational& q) {
  return {{"fraction", fraction_string(q)}, {"decimal", to_double(q)}};
}

json estimate_json(const Estimate& e, double z) {
  return {{"value", e.value},
          {"std_error", e.std_error},
          {"samples", e.samples},
          {"ci", {e.lo(z), e.hi(z)}}};
}

json manifest(const std::string& command, json parameters,
              std::optional<std::uint64_t> seed, const Common& common) {
  json m;
  m["command"] = command;
  m["parameters"] = std::move(parameters);
  if (seed) m["seed"] = *seed;
  m["version"] = kVersion;
  json outputs = json::array();
  if (!common.out.empty()) outputs.push_back(common.out);
  if (!common.csv.empty()) outputs.push_back(common.csv);
  m["outputs"] = outputs;
  return m;
}

void emit(const json& result, const Common& common) {
  const std::string text = result.dump(2) + "\n";
  if (common.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(common.out);
  if (!f) throw std::runtime_error("cannot write " + common.out);
  f << text;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) f << ',';
      const bool quote = cells[i].find_first_of(",\"") != std::string::npos;
      if (!quote) {
        f << cells[i];
        continue;
      }
      f << '"';
      for (char c : cells[i]) f << (c == '"' ? "\"\"" : std::string(1, c));
      f << '"';
    }
    f << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---- input -------------------------------------------------------------------

struct GraphSource {
  std::string path;
  int box = 0;
};

void add_graph_flags(CLI::App* cmd, GraphSource& src) {
  cmd->add_option("--graph", src.path, "graph file (JSON)");
  cmd->add_option("--box", src.box, "centred wired lattice box of this side")
      ->check(CLI::PositiveNumber);
}

json graph_parameter(const GraphSource& src) {
  if (src.box > 0) return {{"box", src.box}};
  return src.path;
}

io::GraphFile load(const GraphSource& src, const std::string& fallback = "") {
  if (src.box > 0) {
    if (!src.path.empty()) throw UsageError("--graph and --box are exclusive");
    LatticeBox b = lattice_box(centered_box(src.box));
    return {b.graph, b};
  }
  const std::string path = src.path.empty() ? fallback : src.path;
  if (path.empty()) throw UsageError("a graph is required (--graph or --box)");
  return io::load_graph(path);
}

// The graph a sandpile or tree file points at, unless --graph/--box says otherwise.
std::string referenced_graph(const std::string& file) {
  if (file.empty()) return "";
  const auto ref = io::graph_reference(io::read_document(file));
  return ref ? ref->string() : "";
}

std::vector<std::string> split(const std::string& text, const std::string& seps) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (seps.find(c) != std::string::npos) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// "x,y" names vertices x and y. Lattice labels contain a comma themselves,
// so "0,0,1,0" is read as 0,0 and 1,0; ';' or spaces also separate.
std::vector<VertexId> parse_vertices(const Multigraph& g, const std::string& text) {
  if (text.empty()) return {};
  const bool explicit_sep = text.find_first_of("; ") != std::string::npos;
  std::vector<std::string> names = split(text, explicit_sep ? "; " : ",");
  auto resolve = [&](const std::vector<std::string>& ns) -> std::optional<std::vector<VertexId>> {
    std::vector<VertexId> out;
    for (const auto& n : ns) {
      const auto v = g.find(n);
      if (!v || g.is_sink(*v)) return std::nullopt;
      out.push_back(*v);
    }
    return out;
  };
  if (auto r = resolve(names)) return *r;
  if (!explicit_sep && names.size() % 2 == 0) {
    std::vector<std::string> paired;
    for (std::size_t i = 0; i < names.size(); i += 2) paired.push_back(names[i] + "," + names[i + 1]);
    if (auto r = resolve(paired)) return *r;
  }
  throw UsageError("unknown or sink vertex in '" + text + "'");
}

std::vector<EdgeId> parse_edges(const Multigraph& g, const std::string& text) {
  std::vector<EdgeId> out;
  for (const auto& name : split(text, "; ")) {
    const auto e = g.find_edge(name);
    if (!e) throw UsageError("unknown edge '" + name + "'");
    out.push_back(*e);
  }
  if (out.empty() && !text.empty()) throw UsageError("empty edge list");
  return out;
}

std::vector<std::int64_t> parse_heights(const std::string& text) {
  std::vector<std::int64_t> out;
  for (const auto& t : split(text, ",; ")) {
    std::size_t used = 0;
    long long h = 0;
    try {
      h = std::stoll(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != t.size()) throw UsageError("bad height '" + t + "'");
    out.push_back(h);
  }
  return out;
}

json labels(const Multigraph& g, const std::vector<VertexId>& vs) {
  json out = json::array();
  for (VertexId v : vs) out.push_back(g.label(v));
  return out;
}

json edge_labels(const Multigraph& g, const std::vector<EdgeId>& es) {
  json out = json::array();
  for (EdgeId e : es) out.push_back(g.edge(e).label);
  return out;
}

json heights_json(const Multigraph& g, const Sandpile& eta) {
  json out = json::array();
  for (VertexId v : g.vertices()) out.push_back(eta[v]);
  return out;
}

json rounds_json(const Multigraph& g, const std::vector<std::vector<VertexId>>& rounds) {
  json out = json::array();
  for (const auto& r : rounds) out.push_back(labels(g, r));
  return out;
}

json points_json(const std::vector<Point>& ps) {
  json out = json::array();
  for (const Point& p : ps) out.push_back(point_label(p));
  return out;
}

// ---- subcommands -------------------------------------------------------------

struct OracleArgs {
  GraphSource graph;
  bool list = false;
  bool stationary = false;
  std::uint64_t max_configurations = 5'000'000;
};

int cmd_oracle(const OracleArgs& a, const Common& common) {
  const Multigraph g = load(a.graph).graph;
  oracle::EnumerationBudget budget;
  budget.max_configurations = a.max_configurations;
  const auto trees = oracle::enumerate_spanning_trees(g, budget);
  const auto recurrent = oracle::enumerate_recurrent(g, budget);
  json r;
  r["manifest"] = manifest("oracle",
                           {{"graph", graph_parameter(a.graph)},
                            {"list", a.list},
                            {"stationary", a.stationary},
                            {"max_configurations", a.max_configurations}},
                           std::nullopt, common);
  r["vertices"] = labels(g, g.vertices());
  r["spanning_trees"] = trees.size();
  r["recurrent"] = recurrent.size();
  r["matrix_tree"] = spanning_tree_count(g).get_str();
  if (a.list) {
    json ts = json::array();
    for (const auto& t : trees) ts.push_back(edge_labels(g, t));
    r["trees"] = ts;
    json rs = json::array();
    for (const auto& eta : recurrent) rs.push_back(heights_json(g, eta));
    r["recurrent_states"] = rs;
  }
  if (a.stationary) {
    const auto dist = oracle::exact_stationary(g, budget);
    json rows = json::array();
    for (std::size_t i = 0; i < dist.states.size(); ++i) {
      if (dist.mass[i] == 0) continue;
      rows.push_back({{"heights", heights_json(g, dist.states[i])},
                      {"mass", fraction_json(dist.mass[i])}});
    }
    r["stationary"] = rows;
  }
  emit(r, common);
  return 0;
}

struct StabilizeArgs {
  GraphSource graph;
  std::string sandpile;
  std::string order = "fifo";
  std::uint64_t seed = 1;
};

int cmd_stabilize(const StabilizeArgs& a, const Common& common) {
  const Multigraph g = load(a.graph, referenced_graph(a.sandpile)).graph;
  const Sandpile eta = io::load_sandpile(a.sandpile, g);
  std::mt19937_64 rng(a.seed);
  const Stabilized s = a.order == "random" ? stabilize_random_order(g, eta, rng) : stabilize(g, eta);
  json r;
  json params = {{"graph", graph_parameter(a.graph)}, {"sandpile", a.sandpile}, {"order", a.order}};
  r["manifest"] = manifest("stabilize", params,
                           a.order == "random" ? std::optional(a.seed) : std::nullopt, common);
  r["result"] = io::sandpile_to_json(g, s.result, "");
  json odo = json::object();
  for (VertexId v : g.vertices()) odo[g.label(v)] = s.report.odometer[v];
  r["odometer"] = odo;
  r["lost_to_sink"] = s.report.lost_to_sink;
  r["recurrent"] = is_recurrent(g, s.result);
  emit(r, common);
  return 0;
}

struct SampleArgs {
  GraphSource graph;
  std::string method = "chain";
  std::uint64_t seed = 1;
  std::int64_t count = 10;
  std::int64_t thin = 1;
  std::int64_t burn_in = -1;
  unsigned threads = 0;
};

int cmd_sample(const SampleArgs& a, const Common& common) {
  const Multigraph g = load(a.graph).graph;
  std::vector<Sandpile> samples;
  if (a.method == "chain") {
    SamplerOptions opts;
    opts.seed = a.seed;
    opts.count = a.count;
    opts.thin = a.thin;
    opts.burn_in = a.burn_in;
    samples = sample_stationary(g, opts);
  } else {
    samples.resize(static_cast<std::size_t>(a.count));
    const unsigned threads = a.threads ? a.threads : default_threads();
    parallel_samples(static_cast<std::uint64_t>(a.count), a.seed, threads,
                     [&](std::uint64_t i, std::mt19937_64& rng) {
                       samples[i] = tree_to_sandpile(g, wilson_ust(g, rng), {});
                     });
  }
  json r;
  r["manifest"] = manifest("sample",
                           {{"graph", graph_parameter(a.graph)},
                            {"method", a.method},
                            {"count", a.count},
                            {"thin", a.thin},
                            {"burn_in", a.method == "chain" && a.burn_in < 0 ? default_burn_in(g)
                                                                              : a.burn_in}},
                           a.seed, common);
  r["vertices"] = labels(g, g.vertices());
  json rows = json::array();
  for (const auto& eta : samples) rows.push_back(heights_json(g, eta));
  r["samples"] = rows;
  if (!common.csv.empty()) {
    std::vector<std::string> header = {"index"};
    for (VertexId v : g.vertices()) header.push_back(g.label(v));
    std::vector<std::vector<std::string>> table;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      std::vector<std::string> row = {std::to_string(i)};
      for (VertexId v : g.vertices()) row.push_back(std::to_string(samples[i][v]));
      table.push_back(row);
    }
    write_csv(common.csv, header, table);
  }
  emit(r, common);
  return 0;
}

struct BurnArgs {
  GraphSource graph;
  std::string sandpile;
  std::string q;
};

int cmd_burn(const BurnArgs& a, const Common& common) {
  const Multigraph g = load(a.graph, referenced_graph(a.sandpile)).graph;
  const Sandpile eta = io::load_sandpile(a.sandpile, g);
  const auto Q = parse_vertices(g, a.q);
  json r;
  r["manifest"] = manifest(
      "burn-test", {{"graph", graph_parameter(a.graph)}, {"sandpile", a.sandpile}, {"q", a.q}},
      std::nullopt, common);
  if (Q.empty()) {
    const BurningTest t = dhar_recurrence_test(g, eta);
    r["recurrent"] = t.recurrent;
    r["rounds"] = rounds_json(g, t.rounds);
    r["unburnt"] = labels(g, t.unburnt);
  } else {
    if (!is_stable(g, eta)) throw NotStableError("sandpile is not stable");
    const BurningRecord rec = two_phase_burn(g, eta, Q);
    r["recurrent"] = rec.complete();
    r["phase1"] = rounds_json(g, rec.phase1);
    r["phase2"] = rounds_json(g, rec.phase2);
    r["W0"] = labels(g, rec.unburnt_after_phase1);
    r["unburnt"] = labels(g, rec.unburnt);
    if (rec.complete()) r["E_VQ"] = is_E_VQ(g, eta, Q);
  }
  emit(r, common);
  return r["recurrent"].get<bool>() ? 0 : 1;
}

struct BijectionArgs {
  GraphSource graph;
  std::string sandpile;
  std::string tree;
  std::string q;
  std::string ordering = "default";
};

int cmd_bijection(const BijectionArgs& a, const Common& common) {
  if (a.sandpile.empty() == a.tree.empty())
    throw UsageError("give exactly one of --sandpile and --tree");
  const std::string input = a.sandpile.empty() ? a.tree : a.sandpile;
  const Multigraph g = load(a.graph, referenced_graph(input)).graph;
  const auto Q = parse_vertices(g, a.q);
  const EdgeOrdering& order = ordering_by_name(a.ordering);
  const std::string ref = a.graph.box > 0 ? "" : a.graph.path;
  json r;
  r["manifest"] = manifest("bijection",
                           {{"graph", graph_parameter(a.graph)},
                            {"sandpile", a.sandpile},
                            {"tree", a.tree},
                            {"q", a.q},
                            {"ordering", a.ordering}},
                           std::nullopt, common);
  if (!a.sandpile.empty()) {
    const Sandpile eta = io::load_sandpile(a.sandpile, g);
    const RootedSpanningTree t = sandpile_to_tree(g, eta, Q, order);
    r["tree"] = io::tree_to_json(g, t, ref);
    r["event_E"] = tree_event_E(g, t, Q);
  } else {
    const RootedSpanningTree t = io::load_tree(a.tree, g);
    const Sandpile eta = tree_to_sandpile(g, t, Q, order);
    r["sandpile"] = io::sandpile_to_json(g, eta, ref);
    r["event_E"] = tree_event_E(g, t, Q);
  }
  emit(r, common);
  return 0;
}

struct TransferArgs {
  GraphSource graph;
  std::string backend = "exact";
  std::string edges;
};

int cmd_transfer(const TransferArgs& a, const Common& common) {
  const Multigraph g = load(a.graph).graph;
  const Backend backend = parse_backend(a.backend);
  std::vector<EdgeId> edges = a.edges.empty() ? all_edges(g) : parse_edges(g, a.edges);
  if (a.edges.empty() && edges.size() > 400)
    throw UsageError("graph has " + std::to_string(edges.size()) + " edges; pass --edges");
  json r;
  r["manifest"] = manifest(
      "transfer-current",
      {{"graph", graph_parameter(a.graph)}, {"backend", a.backend}, {"edges", a.edges}},
      std::nullopt, common);
  r["edges"] = edge_labels(g, edges);
  r["spanning_trees"] = spanning_tree_count(g).get_str();
  std::vector<std::vector<std::string>> table;
  json rows = json::array();
  if (backend == Backend::exact) {
    const auto y = transfer_current_exact(g, edges);
    json frac = json::array(), dec = json::array();
    for (std::size_t i = 0; i < y.size(); ++i) {
      json fr = json::array(), dr = json::array();
      for (std::size_t j = 0; j < y.size(); ++j) {
        fr.push_back(fraction_string(y.Y(i, j)));
        dr.push_back(to_double(y.Y(i, j)));
        table.push_back({g.edge(edges[i]).label, g.edge(edges[j]).label,
                         fraction_string(y.Y(i, j)), fmt(to_double(y.Y(i, j)))});
      }
      frac.push_back(fr);
      dec.push_back(dr);
    }
    r["Y"] = {{"fractions", frac}, {"decimals", dec}};
  } else {
    const auto y = transfer_current_float(g, edges);
    json dec = json::array();
    for (std::size_t i = 0; i < y.size(); ++i) {
      json dr = json::array();
      for (std::size_t j = 0; j < y.size(); ++j) {
        dr.push_back(y.Y(i, j));
        table.push_back({g.edge(edges[i]).label, g.edge(edges[j]).label, "", fmt(y.Y(i, j))});
      }
      dec.push_back(dr);
    }
    r["Y"] = {{"decimals", dec}};
  }
  if (!common.csv.empty()) write_csv(common.csv, {"e", "f", "fraction", "decimal"}, table);
  emit(r, common);
  return 0;
}

struct MinimalArgs {
  GraphSource graph;
  std::string w;
  std::string xi;
  std::string backend = "exact";
  bool oracle = false;
};

int cmd_minimal(const MinimalArgs& a, const Common& common) {
  const Multigraph g = load(a.graph).graph;
  Subconfig xi{parse_vertices(g, a.w), parse_heights(a.xi)};
  if (xi.W.size() != xi.heights.size()) throw UsageError("--w and --xi differ in length");
  check_subconfig(g, xi);
  const Backend backend = parse_backend(a.backend);
  json r;
  r["manifest"] = manifest("minimal-prob",
                           {{"graph", graph_parameter(a.graph)},
                            {"w", a.w},
                            {"xi", a.xi},
                            {"backend", a.backend},
                            {"oracle", a.oracle}},
                           std::nullopt, common);
  const GeneralizedMinimalResult gen = is_generalized_minimal(g, xi);
  r["verdict"] = to_string(gen.witness.verdict);
  if (gen.witness.failed_condition) r["failed_condition"] = gen.witness.failed_condition;
  if (!gen.witness.reason.empty()) r["reason"] = gen.witness.reason;
  json holes = json::array();
  for (std::size_t j = 0; j < gen.holes.components.size(); ++j) {
    json h = {{"vertices", labels(g, gen.holes.components[j])}};
    if (gen.holes.entry[j] != kNoVertex) h["entry"] = g.label(gen.holes.entry[j]);
    if (j < gen.holes.r.size()) h["r"] = gen.holes.r[j];
    holes.push_back(h);
  }
  r["holes"] = holes;
  int code = 0;
  if (gen.witness.is_minimal()) {
    const MinimalProbability p = minimal_probability(g, xi, backend);
    r["E"] = edge_labels(g, p.E);
    if (p.exact)
      r["probability"] = fraction_json(*p.exact);
    else
      r["probability"] = {{"decimal", p.value}};
  } else {
    std::cerr << "error: xi is " << to_string(gen.witness.verdict) << " on W\n";
    code = 1;
  }
  if (a.oracle) {
    const Rational q = oracle::brute_force_marginal(g, xi);
    r["oracle"] = fraction_json(q);
    if (r.contains("probability") && r["probability"].contains("fraction"))
      r["agrees"] = r["probability"]["fraction"] == r["oracle"]["fraction"];
  }
  emit(r, common);
  return code;
}

struct ValidateArgs {
  std::vector<std::string> files;
};

int cmd_validate(const ValidateArgs& a, const Common& common) {
  json r;
  r["manifest"] = manifest("validate", {{"files", a.files}}, std::nullopt, common);
  json files = json::array();
  bool errors = false;
  for (const auto& path : a.files) {
    json diags = json::array();
    for (const auto& d : io::validate_file(path)) {
      const bool err = d.severity == io::Diagnostic::Severity::error;
      errors = errors || err;
      std::cerr << d.format() << "\n";
      diags.push_back({{"severity", err ? "error" : "warning"},
                       {"line", d.line},
                       {"pointer", d.pointer},
                       {"message", d.message}});
    }
    files.push_back({{"file", path}, {"ok", diags.empty()}, {"diagnostics", diags}});
  }
  r["files"] = files;
  emit(r, common);
  return errors ? 1 : 0;
}

// ---- z2 ----------------------------------------------------------------------

struct P0Args {
  int radius = 8;
};

int cmd_p0(const P0Args& a, const Common& common) {
  const PotentialKernelTable kernel(a.radius);
  const double value = p0_z2(kernel);
  const double closed = p0_closed_form();
  json r;
  r["manifest"] = manifest("z2 p0", {{"radius", a.radius}}, std::nullopt, common);
  r["p0"] = value;
  r["closed_form"] = closed;
  r["difference"] = value - closed;
  emit(r, common);
  return 0;
}

struct SeriesArgs {
  int height = 0;
  int max_w = 5;
  int box = 64;
  std::uint64_t samples = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  double z = 1.96;
};

int cmd_series(const SeriesArgs& a, const Common& common) {
  const unsigned threads = a.threads ? a.threads : default_threads();
  const auto start = std::chrono::steady_clock::now();
  const SeriesResult s = height_prob_series(a.height, a.max_w, a.box, a.samples, a.seed, threads);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json r;
  r["manifest"] = manifest("z2 series",
                           {{"height", a.height},
                            {"max_w", a.max_w},
                            {"box", a.box},
                            {"samples", a.samples},
                            {"z", a.z}},
                           a.seed, common);
  r["runtime"] = {{"threads", threads}, {"seconds", secs}};
  json terms = json::array();
  std::vector<std::vector<std::string>> table;
  for (const auto& t : s.terms) {
    terms.push_back({{"W", points_json(t.W)},
                     {"factor", fraction_json(t.factor)},
                     {"tree_ratio", fraction_json(t.tree_ratio)},
                     {"shell_probability", fraction_json(t.shell_prob)},
                     {"p_W", estimate_json(t.pW, a.z)}});
  }
  r["terms"] = terms;
  json levels = json::array();
  for (const auto& l : s.levels) {
    levels.push_back({{"max_w", l.max_w},
                      {"partial_sum", estimate_json(l.partial_sum, a.z)},
                      {"mass", estimate_json(l.mass, a.z)},
                      {"truncation_gap", l.truncation_gap}});
    table.push_back({std::to_string(l.max_w), fmt(l.partial_sum.value),
                     fmt(l.partial_sum.std_error), fmt(l.truncation_gap)});
  }
  r["levels"] = levels;
  r["monte_carlo"] = estimate_json(s.mc_frequency, a.z);
  if (a.height == 0) r["p0_closed_form"] = p0_closed_form();
  if (!common.csv.empty())
    write_csv(common.csv, {"max_w", "partial_sum", "std_error", "truncation_gap"}, table);
  emit(r, common);
  return 0;
}

struct DecayArgs {
  int dmin = 4;
  int dmax = 32;
};

int cmd_decay(const DecayArgs& a, const Common& common) {
  if (a.dmin < 1 || a.dmax < a.dmin) throw UsageError("need 1 <= dmin <= dmax");
  const PotentialKernelTable kernel(a.dmax + 8);
  std::vector<int> ds;
  for (int d = a.dmin; d <= a.dmax; ++d) ds.push_back(d);
  const DecayExperiment e = decay_experiment(kernel, ds);
  json r;
  r["manifest"] = manifest("z2 decay", {{"dmin", a.dmin}, {"dmax", a.dmax}}, std::nullopt, common);
  json rows = json::array();
  std::vector<std::vector<std::string>> table;
  for (const auto& row : e.rows) {
    rows.push_back({{"distance", row.distance}, {"value", row.value}});
    table.push_back({std::to_string(row.distance), fmt(row.value)});
  }
  r["rows"] = rows;
  r["slope"] = e.slope;
  r["intercept"] = e.intercept;
  if (!common.csv.empty()) write_csv(common.csv, {"distance", "covariance"}, table);
  emit(r, common);
  return 0;
}

struct KernelArgs {
  int radius = 8;
  int digits = 20;
};

int cmd_kernel(const KernelArgs& a, const Common& common) {
  const PotentialKernelTable kernel(a.radius, a.digits);
  json r;
  r["manifest"] = manifest("z2 kernel", {{"radius", a.radius}, {"digits", a.digits}},
                           std::nullopt, common);
  json rows = json::array();
  std::vector<std::vector<std::string>> table;
  for (int x = 0; x <= a.radius; ++x)
    for (int y = 0; y <= x; ++y) {
      const std::string A = fraction_string(kernel.rational_part(x, y));
      const std::string B = fraction_string(kernel.inverse_pi_part(x, y));
      const std::string dec = kernel.decimal(x, y, a.digits);
      rows.push_back({{"x", x}, {"y", y}, {"rational", A}, {"inverse_pi", B}, {"decimal", dec}});
      table.push_back({std::to_string(x), std::to_string(y), A, B, dec});
    }
  r["values"] = rows;
  r["harmonic_defect"] = kernel.harmonic_defect();
  r["rim_deviation"] = kernel.rim_deviation();
  if (!common.csv.empty()) write_csv(common.csv, {"x", "y", "rational", "inverse_pi", "decimal"}, table);
  emit(r, common);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Abelian sandpiles, burning bijections and transfer currents"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Common common;
  auto common_flags = [&](CLI::App* cmd) {
    cmd->add_option("-o,--out", common.out, "write the JSON result here instead of stdout");
  };
  auto csv_flag = [&](CLI::App* cmd) {
    cmd->add_option("--csv", common.csv, "also write the table as CSV");
  };

  OracleArgs oracle_args;
  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force counts and stationary law");
  add_graph_flags(oracle_cmd, oracle_args.graph);
  oracle_cmd->add_flag("--list", oracle_args.list, "list trees and recurrent states");
  oracle_cmd->add_flag("--stationary", oracle_args.stationary, "exact stationary masses");
  oracle_cmd->add_option("--max-configurations", oracle_args.max_configurations);
  common_flags(oracle_cmd);

  StabilizeArgs stab_args;
  auto* stab_cmd = app.add_subcommand("stabilize", "topple a sandpile until stable");
  add_graph_flags(stab_cmd, stab_args.graph);
  stab_cmd->add_option("--sandpile", stab_args.sandpile)->required()->check(CLI::ExistingFile);
  stab_cmd->add_option("--order", stab_args.order)->check(CLI::IsMember({"fifo", "random"}));
  stab_cmd->add_option("--seed", stab_args.seed);
  common_flags(stab_cmd);

  SampleArgs sample_args;
  auto* sample_cmd = app.add_subcommand("sample", "draw stationary sandpiles");
  add_graph_flags(sample_cmd, sample_args.graph);
  sample_cmd->add_option("--method", sample_args.method, "chain or wilson")
      ->check(CLI::IsMember({"chain", "wilson"}));
  sample_cmd->add_option("--seed", sample_args.seed);
  sample_cmd->add_option("--count", sample_args.count)->check(CLI::PositiveNumber);
  sample_cmd->add_option("--thin", sample_args.thin)->check(CLI::PositiveNumber);
  sample_cmd->add_option("--burn-in", sample_args.burn_in, "negative: default");
  sample_cmd->add_option("--threads", sample_args.threads, "0: SANDPILE_THREADS or 1");
  common_flags(sample_cmd);
  csv_flag(sample_cmd);

  BurnArgs burn_args;
  auto* burn_cmd = app.add_subcommand("burn-test", "burning test, optionally based on Q");
  add_graph_flags(burn_cmd, burn_args.graph);
  burn_cmd->add_option("--sandpile", burn_args.sandpile)->required()->check(CLI::ExistingFile);
  burn_cmd->add_option("--q", burn_args.q, "vertex list");
  common_flags(burn_cmd);

  BijectionArgs bij_args;
  auto* bij_cmd = app.add_subcommand("bijection", "sandpile to tree or back");
  add_graph_flags(bij_cmd, bij_args.graph);
  bij_cmd->add_option("--sandpile", bij_args.sandpile)->check(CLI::ExistingFile);
  bij_cmd->add_option("--tree", bij_args.tree)->check(CLI::ExistingFile);
  bij_cmd->add_option("--q", bij_args.q, "vertex list");
  bij_cmd->add_option("--ordering", bij_args.ordering)->check(CLI::IsMember({"default"}));
  common_flags(bij_cmd);

  TransferArgs tc_args;
  auto* tc_cmd = app.add_subcommand("transfer-current", "transfer current matrix");
  add_graph_flags(tc_cmd, tc_args.graph);
  tc_cmd->add_option("--backend", tc_args.backend)->check(CLI::IsMember({"exact", "float64"}));
  tc_cmd->add_option("--edges", tc_args.edges, "edge ids separated by ';' or spaces");
  common_flags(tc_cmd);
  csv_flag(tc_cmd);

  MinimalArgs min_args;
  auto* min_cmd = app.add_subcommand("minimal-prob", "probability of a minimal subconfiguration");
  add_graph_flags(min_cmd, min_args.graph);
  min_cmd->add_option("--w", min_args.w, "vertex list")->required();
  min_cmd->add_option("--xi", min_args.xi, "heights, one per vertex of W")->required();
  min_cmd->add_option("--backend", min_args.backend)->check(CLI::IsMember({"exact", "float64"}));
  min_cmd->add_flag("--oracle", min_args.oracle, "also enumerate recurrent states");
  common_flags(min_cmd);

  ValidateArgs val_args;
  auto* val_cmd = app.add_subcommand("validate", "check graph, sandpile and tree files");
  val_cmd->add_option("files", val_args.files)->required();
  common_flags(val_cmd);

  auto* z2_cmd = app.add_subcommand("z2", "infinite-volume quantities on Z^2");
  z2_cmd->require_subcommand(1);

  P0Args p0_args;
  auto* p0_cmd = z2_cmd->add_subcommand("p0", "single-site height-zero probability");
  p0_cmd->add_option("--radius", p0_args.radius)->check(CLI::Range(2, 400));
  common_flags(p0_cmd);

  SeriesArgs series_args;
  auto* series_cmd = z2_cmd->add_subcommand("series", "height probability as a sum over W");
  series_cmd->add_option("--height", series_args.height)->check(CLI::Range(0, 3));
  series_cmd->add_option("--max-w", series_args.max_w)->check(CLI::Range(1, 7));
  series_cmd->add_option("--box", series_args.box)->check(CLI::Range(4, 1024));
  series_cmd->add_option("--samples", series_args.samples)->check(CLI::PositiveNumber);
  series_cmd->add_option("--seed", series_args.seed);
  series_cmd->add_option("--threads", series_args.threads, "0: SANDPILE_THREADS or 1");
  series_cmd->add_option("--z", series_args.z, "CI half-width in standard errors");
  common_flags(series_cmd);
  csv_flag(series_cmd);

  DecayArgs decay_args;
  auto* decay_cmd = z2_cmd->add_subcommand("decay", "height-zero pair covariance against distance");
  decay_cmd->add_option("--dmin", decay_args.dmin);
  decay_cmd->add_option("--dmax", decay_args.dmax)->check(CLI::Range(1, 200));
  common_flags(decay_cmd);
  csv_flag(decay_cmd);

  KernelArgs kernel_args;
  auto* kernel_cmd = z2_cmd->add_subcommand("kernel", "potential kernel table");
  kernel_cmd->add_option("--radius", kernel_args.radius)->check(CLI::Range(1, 400));
  kernel_cmd->add_option("--digits", kernel_args.digits)->check(CLI::Range(1, 200));
  common_flags(kernel_cmd);
  csv_flag(kernel_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (oracle_cmd->parsed()) return cmd_oracle(oracle_args, common);
    if (stab_cmd->parsed()) return cmd_stabilize(stab_args, common);
    if (sample_cmd->parsed()) return cmd_sample(sample_args, common);
    if (burn_cmd->parsed()) return cmd_burn(burn_args, common);
    if (bij_cmd->parsed()) return cmd_bijection(bij_args, common);
    if (tc_cmd->parsed()) return cmd_transfer(tc_args, common);
    if (min_cmd->parsed()) return cmd_minimal(min_args, common);
    if (val_cmd->parsed()) return cmd_validate(val_args, common);
    if (p0_cmd->parsed()) return cmd_p0(p0_args, common);
    if (series_cmd->parsed()) return cmd_series(series_args, common);
    if (decay_cmd->parsed()) return cmd_decay(decay_args, common);
    if (kernel_cmd->parsed()) return cmd_kernel(kernel_args, common);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
