#ifndef SANDPILE_IO_HPP
#define SANDPILE_IO_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "sandpile/bijection.hpp"
#include "sandpile/dynamics.hpp"
#include "sandpile/graph.hpp"

namespace sandpile::io {

using json = nlohmann::ordered_json;

struct Diagnostic {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  std::string file;
  int line = 0;  // 1-based, 0 if unknown
  std::string pointer;
  std::string message;

  std::string format() const;
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(Diagnostic d) : std::runtime_error(d.format()), diagnostic_(std::move(d)) {}
  const Diagnostic& diagnostic() const { return diagnostic_; }

 private:
  Diagnostic diagnostic_;
};

// Parsed document plus the line on which each value starts, keyed by JSON
// pointer ("" is the root, "/edges/2/u" a nested value).
struct Document {
  std::string file;
  json value;
  std::map<std::string, int> lines;

  int line_of(const std::string& pointer) const;
  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const;
};

Document parse_document(const std::string& text, const std::string& file = "<input>");
Document read_document(const std::filesystem::path& path);

// Graph files: {"vertices": [...], "sink": id, "edges": [{"u", "v", "mult", "ids"}]}
// or {"box": {"side": n}} / {"box": {"x0", "y0", "x1", "y1"}}.
struct GraphFile {
  Multigraph graph;
  std::optional<LatticeBox> box;
};

GraphFile graph_from_document(const Document& doc);
GraphFile load_graph(const std::filesystem::path& path);
json graph_to_json(const Multigraph& g);

// Sandpile files: {"graph": ref, "heights": [{"vertex": id, "h": n}]}.
// Vertices not listed get height 0.
Sandpile sandpile_from_document(const Document& doc, const Multigraph& g);
Sandpile load_sandpile(const std::filesystem::path& path, const Multigraph& g);
json sandpile_to_json(const Multigraph& g, const Sandpile& eta, const std::string& graph_ref);

// Tree files: {"graph": ref, "parents": [{"vertex": id, "edge": edge id}]}.
RootedSpanningTree tree_from_document(const Document& doc, const Multigraph& g);
RootedSpanningTree load_tree(const std::filesystem::path& path, const Multigraph& g);
json tree_to_json(const Multigraph& g, const RootedSpanningTree& t, const std::string& graph_ref);

// The "graph" reference of a sandpile or tree file, resolved against the
// file's own directory.
std::optional<std::filesystem::path> graph_reference(const Document& doc);

// Schema checks for graph, sandpile and tree files. Never throws; problems
// come back as diagnostics. Unstable sandpiles are warnings.
std::vector<Diagnostic> validate_file(const std::filesystem::path& path);

}  // namespace sandpile::io

#endif  // SANDPILE_IO_HPP
