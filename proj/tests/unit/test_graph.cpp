#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dgmm;
using namespace dgmm::test;

namespace {

Batch commit_builder(MemoryGraph& g, auto&& stage) {
  BatchBuilder b(g, BatchKind::ingest);
  stage(b);
  Batch batch = std::move(b).finish();
  g.commit(batch);
  return batch;
}

}  // namespace

TEST_CASE("elements resolve to one node per canonical name") {
  MemoryGraph g;
  BatchBuilder b(g, BatchKind::ingest);
  NodeId w1 = b.resolve_or_create_element("water");
  NodeId w2 = b.resolve_or_create_element("water");
  NodeId w3 = b.resolve_or_create_element("Water");
  CHECK(w1 == w2);
  CHECK(w1 == w3);
  CHECK_THROWS_AS(b.resolve_or_create_element(""), Error);
  g.commit(std::move(b).finish());
  CHECK(g.nodes_of_type(NodeType::Element).size() == 1);

  BatchBuilder again(g, BatchKind::ingest);
  CHECK(again.resolve_or_create_element("  WATER ") == w1);
}

TEST_CASE("times resolve by canonical rendering") {
  MemoryGraph g;
  BatchBuilder b(g, BatchKind::ingest);
  NodeId a = b.resolve_or_create_time(when("2000-01-01"));
  CHECK(b.resolve_or_create_time(when("2000-01-01")) == a);
  CHECK(b.resolve_or_create_time(when("2000-01-01/2000-01-01")) == a);
  CHECK(b.resolve_or_create_time(when("2000-01-01/2000-12-31")) != a);
  CHECK(b.node(a).name == "2000-01-01");
}

TEST_CASE("concepts are always fresh and ids increase") {
  MemoryGraph g;
  BatchBuilder b(g, BatchKind::ingest);
  NodeId c1 = b.create_concept("same");
  NodeId c2 = b.create_concept("same");
  CHECK(c1 < c2);
  CHECK(b.node(c1).name == b.node(c2).name);
}

TEST_CASE("commit validates before anything changes") {
  MemoryGraph g;
  ingest(g, jack_and_jill());
  auto digest = content_digest(g);

  SUBCASE("stale version") {
    BatchBuilder b(g, BatchKind::ingest);
    b.create_concept("x");
    Batch batch = std::move(b).finish();
    batch.version = 7;
    CHECK_THROWS_AS(g.commit(batch), Error);
  }
  SUBCASE("inadmissible relation") {
    BatchBuilder b(g, BatchKind::ingest);
    NodeId e1 = b.resolve_or_create_element("jack");
    NodeId e2 = b.resolve_or_create_element("jill");
    CHECK_THROWS_AS(b.add_relation(e1, e2, RelationType::HasAction), Error);
  }
  SUBCASE("ingest batches cannot remove") {
    BatchBuilder b(g, BatchKind::ingest);
    b.remove_relation(g.sorted_relations().front().key());
    CHECK_THROWS_AS(g.commit(std::move(b).finish()), Error);
  }
  SUBCASE("non-positive weight") {
    BatchBuilder b(g, BatchKind::ingest);
    NodeId c = b.create_concept("x");
    NodeId e = b.resolve_or_create_element("y");
    b.add_relation(c, e, RelationType::HasObject, 0.0);
    CHECK_THROWS_AS(g.commit(std::move(b).finish()), Error);
  }
  CHECK(content_digest(g) == digest);
  CHECK(g.version() == 1);
}

TEST_CASE("adjacency, weights and lookups") {
  MemoryGraph g;
  auto r = ingest(g, jack_and_jill());
  NodeId c = r.concept_id;
  CHECK(g.out_relations(c).size() == 8);
  CHECK(g.in_relations(c).size() == 1);
  auto water = g.find_by_name(NodeType::Element, "water");
  REQUIRE(water);
  CHECK(g.weight({c, *water, RelationType::HasObject}) == 1.0);
  CHECK_FALSE(g.weight({c, *water, RelationType::HasSubject}));
  CHECK_FALSE(g.find_by_name(NodeType::Element, "milk"));
  CHECK_THROWS_AS(g.node(NodeId{999}), Error);
  CHECK(g.find_node(NodeId{999}) == nullptr);
  auto sorted = g.sorted_relations();
  CHECK(std::is_sorted(sorted.begin(), sorted.end(),
                       [](const Relation& a, const Relation& b) { return a.key() < b.key(); }));
}

TEST_CASE("snapshots rebuild earlier versions exactly") {
  MemoryGraph g;
  ingest(g, jack_and_jill());
  ingest(g, project_x_success());
  ingest(g, project_x_delay());

  CHECK(g.snapshot(0).node_count() == 0);
  CHECK(g.snapshot(0).version() == 0);
  std::size_t last = 0;
  for (Version t = 0; t <= g.version(); ++t) {
    auto s = g.snapshot(t);
    CHECK(s.version() == t);
    CHECK(s.node_count() >= last);
    last = s.node_count();
    if (t > 0) {
      CHECK(subset(node_set(g.snapshot(t - 1)), node_set(s)));
    }
  }
  CHECK(content_equal(g.snapshot(g.version()), g));
  try {
    g.snapshot(g.version() + 1);
    FAIL("expected out of range");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::out_of_range);
  }
}

TEST_CASE("canonical text round trips through restore_state") {
  MemoryGraph g;
  ingest(g, jack_and_jill());
  ingest(g, jack_and_jill());
  consolidation_pass(g);
  auto text = canonical_text(g);
  CHECK(text.rfind("version 3\n", 0) == 0);
  CHECK(text.find("tomb ") != std::string::npos);

  auto back = restore_state(g.schema_ptr(), text, g.history());
  CHECK(content_equal(back, g));
  CHECK(content_digest(back) == content_digest(g));

  // A stale snapshot plus the full history catches up.
  auto partial = restore_state(g.schema_ptr(), canonical_text(g.snapshot(1)), g.history());
  CHECK(content_equal(partial, g));
}

TEST_CASE("replay of the batch history reproduces the graph") {
  MemoryGraph g;
  ingest(g, project_x_success());
  ingest(g, project_x_delay());
  auto a = MemoryGraph::replay(g.schema_ptr(), g.history());
  auto b = MemoryGraph::replay(g.schema_ptr(), g.history());
  CHECK(content_equal(a, g));
  CHECK(content_digest(a) == content_digest(b));
  CHECK(MemoryGraph::replay(g.schema_ptr(), {}).version() == 0);
}

TEST_CASE("copies drop the sink and share nothing") {
  struct Counting : BatchSink {
    int n = 0;
    void append(const Batch&) override { ++n; }
  } sink;
  MemoryGraph g;
  g.attach_sink(&sink);
  ingest(g, jack_and_jill());
  MemoryGraph copy = g;
  ingest(copy, project_x_success());
  CHECK(sink.n == 1);
  CHECK(g.version() == 1);
  CHECK(copy.version() == 2);
}

TEST_CASE("a throwing sink aborts the commit") {
  struct Failing : BatchSink {
    void append(const Batch&) override { throw Error(ErrorKind::io, "disk full"); }
  } sink;
  MemoryGraph g;
  g.attach_sink(&sink);
  CHECK_THROWS_AS(ingest(g, jack_and_jill()), Error);
  CHECK(g.version() == 0);
  CHECK(g.node_count() == 0);
}

TEST_CASE("concepts without element links can be constructed directly") {
  MemoryGraph g;
  NodeId c;
  commit_builder(g, [&](BatchBuilder& b) {
    c = b.create_concept("lonely");
    b.add_relation(b.resolve_or_create(NodeType::Source, "s"), c, RelationType::Recounts);
  });
  CHECK(element_signature(g, c).empty());
  CHECK(validate_graph(g.schema(), g).empty());
}
