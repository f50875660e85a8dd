#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "sandpile/io.hpp"

using namespace sandpile;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("sandpile-io-" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return path / name;
  }
};

const char* kTriangle = R"({
  "vertices": ["A", "B", "C"],
  "sink": "C",
  "edges": [
    {"u": "B", "v": "A", "mult": 2, "ids": ["e1", "e2"]},
    {"u": "A", "v": "C", "ids": ["f"]},
    {"u": "C", "v": "B", "ids": ["g"]}
  ]
})";

}  // namespace

TEST_CASE("graph files") {
  const io::Document doc = io::parse_document(kTriangle, "triangle.json");
  CHECK(doc.line_of("/edges/1/v") == 6);
  CHECK(doc.line_of("/sink") == 3);
  const io::GraphFile gf = io::graph_from_document(doc);
  const Multigraph ref = fixtures::triangle();
  CHECK(gf.graph.num_edges() == 4);
  CHECK(gf.graph.label(gf.graph.edge(gf.graph.edge_at("g")).tail) == "C");
  CHECK_FALSE(gf.box);

  const io::GraphFile again = io::graph_from_document(
      io::parse_document(io::graph_to_json(gf.graph).dump(2)));
  CHECK(again.graph.num_edges() == 4);
  for (const auto& e : ref.edges()) {
    const EdgeRef& f = again.graph.edge(again.graph.edge_at(e.label));
    CHECK(again.graph.label(f.tail) == ref.label(e.tail));
  }

  const io::GraphFile box = io::graph_from_document(io::parse_document(R"({"box": {"side": 4}})"));
  REQUIRE(box.box);
  CHECK(box.graph.num_vertices() == 17);
}

TEST_CASE("graph file errors carry line numbers") {
  const std::string bad = "{\n  \"vertices\": [\"a\", \"s\"],\n  \"sink\": \"s\",\n"
                          "  \"edges\": [\n    {\"u\": \"a\", \"v\": \"q\"}\n  ]\n}";
  try {
    io::graph_from_document(io::parse_document(bad, "bad.json"));
    FAIL("expected an error");
  } catch (const io::IoError& e) {
    CHECK(e.diagnostic().line == 5);
    CHECK(e.diagnostic().pointer == "/edges/0/v");
    CHECK(std::string(e.what()).find("bad.json:5") == 0);
  }
  try {
    io::parse_document("{\n \"a\": 1,\n \"b\": ]\n}", "syntax.json");
    FAIL("expected an error");
  } catch (const io::IoError& e) {
    CHECK(e.diagnostic().line == 3);
  }
}

TEST_CASE("sandpile and tree files round trip") {
  TempDir dir;
  dir.write("triangle.json", kTriangle);
  const Multigraph g = io::load_graph(dir.path / "triangle.json").graph;
  Sandpile eta(g.num_vertices());
  eta[g.at("A")] = 2;
  eta[g.at("B")] = 1;
  dir.write("eta.json", io::sandpile_to_json(g, eta, "triangle.json").dump(2));
  const io::Document doc = io::read_document(dir.path / "eta.json");
  const auto ref = io::graph_reference(doc);
  REQUIRE(ref);
  CHECK(fs::equivalent(*ref, dir.path / "triangle.json"));
  CHECK(io::sandpile_from_document(doc, g) == eta);

  const RootedSpanningTree t = sandpile_to_tree(g, eta, {});
  dir.write("tree.json", io::tree_to_json(g, t, "triangle.json").dump(2));
  CHECK(io::load_tree(dir.path / "tree.json", g) == t);
}

TEST_CASE("validation diagnostics") {
  TempDir dir;
  dir.write("triangle.json", kTriangle);
  CHECK(io::validate_file(dir.path / "triangle.json").empty());

  const auto unstable = dir.write(
      "hot.json",
      "{\n  \"graph\": \"triangle.json\",\n  \"heights\": [\n    {\"vertex\": \"A\", \"h\": 3}\n  ]\n}");
  const auto diags = io::validate_file(unstable);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].severity == io::Diagnostic::Severity::warning);
  CHECK(diags[0].line == 4);
  CHECK(diags[0].message.find("unstable") != std::string::npos);

  const auto cyclic = dir.write("cycle.json",
                                "{\"graph\": \"triangle.json\", \"parents\": [\n"
                                "  {\"vertex\": \"A\", \"edge\": \"e1\"},\n"
                                "  {\"vertex\": \"B\", \"edge\": \"e2\"}\n]}");
  const auto cyc = io::validate_file(cyclic);
  REQUIRE(cyc.size() == 1);
  CHECK(cyc[0].severity == io::Diagnostic::Severity::error);
  CHECK(cyc[0].message.find("cycle") != std::string::npos);
  CHECK(cyc[0].message.find("A") != std::string::npos);
  CHECK(cyc[0].message.find("B") != std::string::npos);

  const auto missing = io::validate_file(dir.path / "nope.json");
  REQUIRE(missing.size() == 1);
  CHECK(missing[0].severity == io::Diagnostic::Severity::error);

  const auto neg = dir.write("neg.json", "{\"graph\": \"triangle.json\",\n \"heights\": [{\"vertex\": \"A\", \"h\": -1}]}");
  const auto nd = io::validate_file(neg);
  REQUIRE(nd.size() == 1);
  CHECK(nd[0].line == 2);
  CHECK(nd[0].pointer == "/heights/0/h");
}
