#include <algorithm>

#include "doctest.h"
#include "fixtures.hpp"
#include "sandpile/transfer_current.hpp"

using namespace sandpile;

TEST_CASE("double-edge triangle") {
  const Multigraph g = fixtures::triangle();
  CHECK(g.num_vertices() == 3);
  CHECK(g.num_edges() == 4);
  const VertexId a = g.at("A"), b = g.at("B");
  CHECK(g.multiplicity(a, b) == 2);
  CHECK(g.degree(a) == 3);
  CHECK(g.label(g.sink()) == "C");
  CHECK(g.edge(g.edge_at("e2")).copy == 1);
  CHECK(g.edge(g.edge_at("f")).tail == a);
  CHECK(g.other_end(g.edge_at("g"), b) == g.at("C"));
  CHECK_THROWS_AS(g.other_end(g.edge_at("g"), a), GraphError);
}

TEST_CASE("construction rejects malformed graphs") {
  GraphSpec spec{{"a", "b", "s"}, "s", {{"a", "s", 1, {}}}};
  CHECK_THROWS_WITH_AS(build_graph(spec), doctest::Contains("disconnected"), GraphError);
  spec.edges.push_back({"b", "b", 1, {}});
  CHECK_THROWS_WITH_AS(build_graph(spec), doctest::Contains("loop"), GraphError);
  spec.edges.back() = {"b", "a", 2, {"x", "x"}};
  CHECK_THROWS_WITH_AS(build_graph(spec), doctest::Contains("duplicate edge"), GraphError);
  spec.edges.back() = {"b", "q", 1, {}};
  CHECK_THROWS_AS(build_graph(spec), GraphError);
  spec.vertices.push_back("a");
  CHECK_THROWS_AS(build_graph(spec), GraphError);
  CHECK_THROWS_AS(build_graph({{"s"}, "s", {}}), GraphError);
}

TEST_CASE("wiring the endpoints of a double edge") {
  // sink A, W = {B}: C is absorbed into the sink
  const Multigraph g = fixtures::triangle("A");
  const VertexId w[] = {g.at("B")};
  const Quotient q = wire(g, w);
  CHECK(q.graph.num_vertices() == 2);
  const VertexId b = q.vertex_map[g.at("B")];
  CHECK(q.graph.multiplicity(b, q.graph.sink()) == 3);
  CHECK(q.vertex_map[g.at("C")] == q.graph.sink());

  // with the sink C, W = {A, B}: f and g become parallel edges to s
  const Multigraph h = fixtures::triangle();
  const VertexId both[] = {h.at("A"), h.at("B")};
  const Quotient r = wire(h, both);
  CHECK(r.graph.num_edges() == 4);
  CHECK(r.graph.multiplicity(r.vertex_map[h.at("A")], r.vertex_map[h.at("B")]) == 2);
  CHECK(r.edge_origin.size() == 4);
}

TEST_CASE("identify drops loops and tracks edges") {
  const Multigraph g = fixtures::box(0, 0, 1, 1);
  std::vector<VertexId> rep(g.num_vertices());
  for (VertexId v = 0; v < static_cast<VertexId>(rep.size()); ++v) rep[v] = v;
  const VertexId p = g.at("0,0"), q = g.at("1,0");
  rep[q] = p;
  const Quotient quo = identify(g, rep);
  CHECK(quo.graph.num_vertices() == g.num_vertices() - 1);
  CHECK(quo.graph.num_edges() == g.num_edges() - 1);
  const EdgeId joined = g.edge_at("0,0|1,0");
  CHECK(quo.edge_image[joined] == kNoEdge);
  for (EdgeId e = 0; e < static_cast<EdgeId>(quo.edge_origin.size()); ++e)
    CHECK(quo.edge_image[quo.edge_origin[e]] == e);
  rep[p] = q;
  CHECK_THROWS_AS(identify(g, rep), GraphError);
}

TEST_CASE("laplacians and the tree count of double-edge triangle") {
  for (const char* sink : {"A", "B", "C"}) {
    const Multigraph g = fixtures::triangle(sink);
    const auto l = laplacian(g);
    for (std::size_t i = 0; i < l.rows(); ++i) {
      long long row = 0;
      for (std::size_t j = 0; j < l.cols(); ++j) row += l(i, j);
      CHECK(row == 0);
    }
    CHECK(spanning_tree_count(g) == 5);
  }
}

TEST_CASE("lattice boxes") {
  const LatticeBox box = lattice_box(centered_box(5));
  CHECK(box.spec.x0 == -2);
  CHECK(box.spec.x1 == 2);
  CHECK(box.graph.num_vertices() == 26);
  CHECK(box.graph.num_edges() == 40 + 20);
  for (VertexId v : box.graph.vertices()) {
    CHECK(box.graph.degree(v) == 4);
    CHECK(box.vertex(box.point(v)) == v);
    CHECK(box.graph.label(v) == point_label(box.point(v)));
  }
  const EdgeId out = box.graph.edge_at("2,0|3,0");
  CHECK(box.graph.edge(out).head == box.graph.sink());
  const auto e = parse_lattice_edge("-1,2|0,2");
  REQUIRE(e);
  CHECK(e->tail == Point{-1, 2});
  CHECK(!parse_lattice_edge("1,2"));
  CHECK(parse_point("-3,4") == Point{-3, 4});
  CHECK_THROWS(parse_point("3;4"));
  CHECK(centered_box(64).x0 == -31);
}

TEST_CASE("degree into a set counts multiplicity") {
  const Multigraph g = fixtures::triangle();
  const VertexId b[] = {g.at("B")};
  const auto mask = vertex_mask(g, b);
  CHECK(degree_into(g, g.at("A"), mask) == 2);
  CHECK(degree_into(g, g.at("C"), mask) == 1);
}
