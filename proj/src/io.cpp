#include "sandpile/io.hpp"

#include <fstream>
#include <sstream>

namespace sandpile::io {

std::string Diagnostic::format() const {
  std::string out = file;
  if (line > 0) out += ":" + std::to_string(line);
  out += severity == Severity::error ? ": error: " : ": warning: ";
  if (!pointer.empty()) out += "at " + pointer + ": ";
  return out + message;
}

int Document::line_of(const std::string& pointer) const {
  // fall back to the nearest enclosing value that has a line
  std::string p = pointer;
  while (true) {
    auto it = lines.find(p);
    if (it != lines.end()) return it->second;
    const auto slash = p.rfind('/');
    if (slash == std::string::npos) return 0;
    p.resize(slash);
  }
}

void Document::fail(const std::string& pointer, const std::string& message) const {
  throw IoError({Diagnostic::Severity::error, file, line_of(pointer), pointer, message});
}

namespace {

// Walks syntactically valid JSON and records the line of every value.
class LineScanner {
 public:
  LineScanner(const std::string& text, std::map<std::string, int>& lines)
      : text_(text), lines_(lines) {}

  void run() {
    skip_ws();
    value("");
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '\n') ++line_;
      if (c != ' ' && c != '\t' && c != '\n' && c != '\r') break;
      ++pos_;
    }
  }

  std::string string_token() {
    std::string out;
    ++pos_;  // opening quote
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\') {
        ++pos_;
        if (pos_ < text_.size()) out += text_[pos_];
      } else {
        out += text_[pos_];
      }
      ++pos_;
    }
    ++pos_;  // closing quote
    return out;
  }

  static std::string escape(const std::string& key) {
    std::string out;
    for (char c : key) {
      if (c == '~') out += "~0";
      else if (c == '/') out += "~1";
      else out += c;
    }
    return out;
  }

  void value(const std::string& pointer) {
    lines_[pointer] = line_;
    if (pos_ >= text_.size()) return;
    const char c = text_[pos_];
    if (c == '{') {
      ++pos_;
      skip_ws();
      if (text_[pos_] == '}') {
        ++pos_;
        return;
      }
      while (true) {
        skip_ws();
        const std::string key = string_token();
        skip_ws();
        ++pos_;  // ':'
        skip_ws();
        value(pointer + "/" + escape(key));
        skip_ws();
        if (text_[pos_++] == '}') return;
      }
    }
    if (c == '[') {
      ++pos_;
      skip_ws();
      if (text_[pos_] == ']') {
        ++pos_;
        return;
      }
      for (int index = 0;; ++index) {
        skip_ws();
        value(pointer + "/" + std::to_string(index));
        skip_ws();
        if (text_[pos_++] == ']') return;
      }
    }
    if (c == '"') {
      string_token();
      return;
    }
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ']' &&
           text_[pos_] != '}' && text_[pos_] != ' ' && text_[pos_] != '\n' &&
           text_[pos_] != '\t' && text_[pos_] != '\r')
      ++pos_;
  }

  const std::string& text_;
  std::map<std::string, int>& lines_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw IoError({Diagnostic::Severity::error, path.string(), 0, "", "cannot open file"});
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const json& member(const Document& doc, const json& obj, const std::string& pointer,
                   const std::string& key) {
  if (!obj.is_object()) doc.fail(pointer, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) doc.fail(pointer, "missing field '" + key + "'");
  return *it;
}

std::string string_at(const Document& doc, const json& v, const std::string& pointer) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  doc.fail(pointer, "expected a string identifier");
}

long long integer_at(const Document& doc, const json& v, const std::string& pointer) {
  if (!v.is_number_integer()) doc.fail(pointer, "expected an integer");
  return v.get<long long>();
}

}  // namespace

Document parse_document(const std::string& text, const std::string& file) {
  Document doc;
  doc.file = file;
  try {
    doc.value = json::parse(text);
  } catch (const json::parse_error& e) {
    int line = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < upto; ++i) line += text[i] == '\n';
    std::string what = e.what();
    const auto colon = what.find("parse error");
    throw IoError({Diagnostic::Severity::error, file, line, "",
                   colon == std::string::npos ? what : what.substr(colon)});
  }
  LineScanner(text, doc.lines).run();
  return doc;
}

Document read_document(const std::filesystem::path& path) {
  return parse_document(read_text(path), path.string());
}

GraphFile graph_from_document(const Document& doc) {
  const json& root = doc.value;
  if (!root.is_object()) doc.fail("", "graph file must be an object");
  GraphFile out;
  try {
    if (root.contains("box")) {
      const json& b = root["box"];
      LatticeBoxSpec spec;
      if (b.contains("side")) {
        spec = centered_box(static_cast<int>(integer_at(doc, b["side"], "/box/side")));
      } else {
        spec.x0 = static_cast<int>(integer_at(doc, member(doc, b, "/box", "x0"), "/box/x0"));
        spec.y0 = static_cast<int>(integer_at(doc, member(doc, b, "/box", "y0"), "/box/y0"));
        spec.x1 = static_cast<int>(integer_at(doc, member(doc, b, "/box", "x1"), "/box/x1"));
        spec.y1 = static_cast<int>(integer_at(doc, member(doc, b, "/box", "y1"), "/box/y1"));
      }
      out.box = lattice_box(spec);
      out.graph = out.box->graph;
      return out;
    }
  } catch (const GraphError& e) {
    doc.fail("/box", e.what());
  }

  GraphSpec spec;
  const json& vertices = member(doc, root, "", "vertices");
  if (!vertices.is_array()) doc.fail("/vertices", "expected an array of vertex ids");
  for (std::size_t i = 0; i < vertices.size(); ++i)
    spec.vertices.push_back(string_at(doc, vertices[i], "/vertices/" + std::to_string(i)));
  spec.sink = string_at(doc, member(doc, root, "", "sink"), "/sink");
  const json& edges = member(doc, root, "", "edges");
  if (!edges.is_array()) doc.fail("/edges", "expected an array of edges");

  std::map<std::string, bool> declared;
  for (const auto& v : spec.vertices) declared[v] = true;
  if (!declared.count(spec.sink)) doc.fail("/sink", "sink '" + spec.sink + "' is not a declared vertex");

  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string p = "/edges/" + std::to_string(i);
    const json& e = edges[i];
    EdgeSpec es;
    es.u = string_at(doc, member(doc, e, p, "u"), p + "/u");
    es.v = string_at(doc, member(doc, e, p, "v"), p + "/v");
    if (!declared.count(es.u)) doc.fail(p + "/u", "unknown vertex '" + es.u + "'");
    if (!declared.count(es.v)) doc.fail(p + "/v", "unknown vertex '" + es.v + "'");
    if (es.u == es.v) doc.fail(p, "loop edge at '" + es.u + "'");
    if (e.contains("mult")) {
      const long long m = integer_at(doc, e["mult"], p + "/mult");
      if (m < 1) doc.fail(p + "/mult", "multiplicity must be at least 1");
      es.mult = static_cast<int>(m);
    }
    if (e.contains("ids")) {
      const json& ids = e["ids"];
      if (!ids.is_array()) doc.fail(p + "/ids", "expected an array of edge ids");
      for (std::size_t k = 0; k < ids.size(); ++k)
        es.ids.push_back(string_at(doc, ids[k], p + "/ids/" + std::to_string(k)));
      if (!e.contains("mult")) es.mult = static_cast<int>(es.ids.size());
      if (static_cast<int>(es.ids.size()) != es.mult)
        doc.fail(p + "/ids", "number of ids differs from the multiplicity");
    } else if (e.contains("id")) {
      es.ids.push_back(string_at(doc, e["id"], p + "/id"));
      if (es.mult != 1) doc.fail(p + "/id", "a single id needs multiplicity 1");
    }
    spec.edges.push_back(std::move(es));
  }
  try {
    out.graph = build_graph(spec);
  } catch (const GraphError& e) {
    doc.fail("", e.what());
  }
  return out;
}

GraphFile load_graph(const std::filesystem::path& path) {
  return graph_from_document(read_document(path));
}

json graph_to_json(const Multigraph& g) {
  json out;
  json vertices = json::array();
  for (VertexId v = 0; v < static_cast<VertexId>(g.num_vertices()); ++v)
    vertices.push_back(g.label(v));
  out["vertices"] = vertices;
  out["sink"] = g.label(g.sink());
  json edges = json::array();
  for (const auto& e : g.edges())
    edges.push_back({{"u", g.label(e.tail)}, {"v", g.label(e.head)}, {"id", e.label}});
  out["edges"] = edges;
  return out;
}

std::optional<std::filesystem::path> graph_reference(const Document& doc) {
  if (!doc.value.is_object() || !doc.value.contains("graph")) return std::nullopt;
  const json& ref = doc.value["graph"];
  if (!ref.is_string()) doc.fail("/graph", "expected a file path");
  std::filesystem::path p = ref.get<std::string>();
  if (p.is_relative()) p = std::filesystem::path(doc.file).parent_path() / p;
  return p;
}

Sandpile sandpile_from_document(const Document& doc, const Multigraph& g) {
  const json& heights = member(doc, doc.value, "", "heights");
  if (!heights.is_array()) doc.fail("/heights", "expected an array");
  Sandpile eta(g.num_vertices());
  std::vector<char> seen(g.num_vertices(), 0);
  for (std::size_t i = 0; i < heights.size(); ++i) {
    const std::string p = "/heights/" + std::to_string(i);
    const std::string name = string_at(doc, member(doc, heights[i], p, "vertex"), p + "/vertex");
    const auto v = g.find(name);
    if (!v) doc.fail(p + "/vertex", "unknown vertex '" + name + "'");
    if (g.is_sink(*v)) doc.fail(p + "/vertex", "the sink carries no height");
    if (seen[*v]) doc.fail(p + "/vertex", "vertex '" + name + "' listed twice");
    seen[*v] = 1;
    const long long h = integer_at(doc, member(doc, heights[i], p, "h"), p + "/h");
    if (h < 0) doc.fail(p + "/h", "heights must be nonnegative");
    eta[*v] = h;
  }
  return eta;
}

Sandpile load_sandpile(const std::filesystem::path& path, const Multigraph& g) {
  return sandpile_from_document(read_document(path), g);
}

json sandpile_to_json(const Multigraph& g, const Sandpile& eta, const std::string& graph_ref) {
  json out;
  if (!graph_ref.empty()) out["graph"] = graph_ref;
  json heights = json::array();
  for (VertexId v : g.vertices()) heights.push_back({{"vertex", g.label(v)}, {"h", eta[v]}});
  out["heights"] = heights;
  return out;
}

RootedSpanningTree tree_from_document(const Document& doc, const Multigraph& g) {
  const json& parents = member(doc, doc.value, "", "parents");
  if (!parents.is_array()) doc.fail("/parents", "expected an array");
  RootedSpanningTree t;
  t.parent_edge.assign(g.num_vertices(), kNoEdge);
  for (std::size_t i = 0; i < parents.size(); ++i) {
    const std::string p = "/parents/" + std::to_string(i);
    const std::string name = string_at(doc, member(doc, parents[i], p, "vertex"), p + "/vertex");
    const auto v = g.find(name);
    if (!v) doc.fail(p + "/vertex", "unknown vertex '" + name + "'");
    if (g.is_sink(*v)) doc.fail(p + "/vertex", "the sink has no parent");
    if (t.parent_edge[*v] != kNoEdge) doc.fail(p + "/vertex", "vertex '" + name + "' listed twice");
    const std::string edge = string_at(doc, member(doc, parents[i], p, "edge"), p + "/edge");
    const auto e = g.find_edge(edge);
    if (!e) doc.fail(p + "/edge", "unknown edge '" + edge + "'");
    const EdgeRef& ref = g.edge(*e);
    if (ref.tail != *v && ref.head != *v)
      doc.fail(p + "/edge", "edge '" + edge + "' is not incident to '" + name + "'");
    t.parent_edge[*v] = *e;
  }
  for (VertexId v : g.vertices())
    if (t.parent_edge[v] == kNoEdge) doc.fail("/parents", "no parent edge for '" + g.label(v) + "'");
  try {
    validate_tree(g, t);
  } catch (const TreeError& e) {
    doc.fail("/parents", e.what());
  }
  return t;
}

RootedSpanningTree load_tree(const std::filesystem::path& path, const Multigraph& g) {
  return tree_from_document(read_document(path), g);
}

json tree_to_json(const Multigraph& g, const RootedSpanningTree& t, const std::string& graph_ref) {
  json out;
  if (!graph_ref.empty()) out["graph"] = graph_ref;
  json parents = json::array();
  for (VertexId v : g.vertices())
    parents.push_back({{"vertex", g.label(v)}, {"edge", g.edge(t.parent_edge[v]).label}});
  out["parents"] = parents;
  return out;
}

std::vector<Diagnostic> validate_file(const std::filesystem::path& path) {
  std::vector<Diagnostic> out;
  try {
    const Document doc = read_document(path);
    const json& root = doc.value;
    if (!root.is_object()) doc.fail("", "expected an object at the top level");
    if (root.contains("heights") || root.contains("parents")) {
      const auto ref = graph_reference(doc);
      if (!ref) doc.fail("", "missing field 'graph' (path of the graph file)");
      GraphFile gf;
      try {
        gf = load_graph(*ref);
      } catch (const IoError& e) {
        Diagnostic d = e.diagnostic();
        out.push_back(d);
        doc.fail("/graph", "referenced graph file is invalid");
      }
      if (root.contains("heights")) {
        const Sandpile eta = sandpile_from_document(doc, gf.graph);
        const json& heights = root["heights"];
        for (std::size_t i = 0; i < heights.size(); ++i) {
          const VertexId v = gf.graph.at(heights[i]["vertex"].is_string()
                                             ? heights[i]["vertex"].get<std::string>()
                                             : std::to_string(heights[i]["vertex"].get<long long>()));
          if (eta[v] >= gf.graph.degree(v)) {
            const std::string p = "/heights/" + std::to_string(i) + "/h";
            out.push_back({Diagnostic::Severity::warning, doc.file, doc.line_of(p), p,
                           "height " + std::to_string(eta[v]) + " at '" + gf.graph.label(v) +
                               "' is not below its degree " +
                               std::to_string(gf.graph.degree(v)) + " (unstable)"});
          }
        }
      } else {
        tree_from_document(doc, gf.graph);
      }
    } else {
      graph_from_document(doc);
    }
  } catch (const IoError& e) {
    out.push_back(e.diagnostic());
  } catch (const std::exception& e) {
    out.push_back({Diagnostic::Severity::error, path.string(), 0, "", e.what()});
  }
  return out;
}

}  // namespace sandpile::io
