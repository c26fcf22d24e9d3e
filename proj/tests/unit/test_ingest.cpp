#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dgmm;
using namespace dgmm::test;

TEST_CASE("jack and jill on an empty store") {
  MemoryGraph g;
  auto r = ingest(g, jack_and_jill());
  CHECK(r.version == 1);
  CHECK(r.created_node_ids.size() == 10);
  CHECK(r.created_relation_count == 9);
  CHECK(std::count(r.created_node_ids.begin(), r.created_node_ids.end(), r.concept_id) == 1);
  CHECK(g.nodes_of_type(NodeType::Concept).size() == 1);
  CHECK(g.nodes_of_type(NodeType::Element).size() == 5);
  CHECK(g.nodes_of_type(NodeType::Time).size() == 2);
  CHECK(g.nodes_of_type(NodeType::Source).size() == 1);
  CHECK(g.nodes_of_type(NodeType::Interaction).size() == 1);
  CHECK(g.relation_count() == 9);
  CHECK(validate_graph(g.schema(), g).empty());
}

TEST_CASE("re-ingesting the same gist adds exactly one concept") {
  MemoryGraph g;
  ingest(g, jack_and_jill());
  auto before = node_set(g);
  auto r = ingest(g, jack_and_jill());
  CHECK(r.created_node_ids.size() == 1);
  CHECK(r.created_node_ids.front() == r.concept_id);
  CHECK(r.created_relation_count == 9);
  CHECK(g.node_count() == before.size() + 1);
  CHECK(g.nodes_of_type(NodeType::Concept).size() == 2);
}

TEST_CASE("new relations all touch the new concept") {
  MemoryGraph g;
  ingest(g, project_x_success());
  auto rels_before = relation_map(g);
  auto nodes_before = node_set(g);
  auto r = ingest(g, project_x_delay());
  auto rels_after = relation_map(g);
  CHECK(subset(nodes_before, node_set(g)));
  for (const auto& [k, w] : rels_before) CHECK(rels_after.at(k) == w);
  for (const auto& [k, w] : rels_after) {
    if (rels_before.count(k)) continue;
    CHECK((k.src == r.concept_id || k.dst == r.concept_id));
    CHECK(g.schema().admissible(g.node(k.src).type, g.node(k.dst).type, k.type));
  }
}

TEST_CASE("inadmissible or incomplete gists leave the graph untouched") {
  MemoryGraph g;
  ingest(g, jack_and_jill());
  auto digest = content_digest(g);

  auto expect_rejected = [&](Gist gist, ErrorKind kind) {
    try {
      ingest(g, gist);
      FAIL("expected rejection");
    } catch (const Error& e) {
      CHECK(e.kind() == kind);
    }
    CHECK(content_digest(g) == digest);
    CHECK(g.version() == 1);
  };

  Gist acquired_as_element = jack_and_jill();
  acquired_as_element.elements = {el(RelationType::AcquiredAt, "jack")};
  expect_rejected(acquired_as_element, ErrorKind::schema_violation);

  Gist recounts = jack_and_jill();
  recounts.elements.push_back(el(RelationType::Recounts, "x"));
  expect_rejected(recounts, ErrorKind::schema_violation);

  Gist unknown = jack_and_jill();
  unknown.elements.push_back(el(RelationType{55}, "x"));
  expect_rejected(unknown, ErrorKind::schema_violation);

  Gist no_elements = jack_and_jill();
  no_elements.elements.clear();
  expect_rejected(no_elements, ErrorKind::schema_violation);

  Gist no_source = jack_and_jill();
  no_source.source_name = "  ";
  expect_rejected(no_source, ErrorKind::invalid_name);

  Gist blank_element = jack_and_jill();
  blank_element.elements.push_back(el(RelationType::HasObject, ""));
  expect_rejected(blank_element, ErrorKind::invalid_name);
}

TEST_CASE("acquisition time defaults to the injected clock") {
  MemoryGraph g;
  Gist gist = project_x_success();
  gist.acquisition_time.reset();
  gist.event_time.reset();
  auto r = ingest(g, gist, fixed_clock(946'684'800));
  bool found = false;
  for (const auto& k : g.out_relations(r.concept_id)) {
    if (k.type == RelationType::AcquiredAt) {
      CHECK(g.node(k.dst).name == "2000-01-01");
      found = true;
    }
    CHECK(k.type != RelationType::OccurredAt);
  }
  CHECK(found);
}

TEST_CASE("N gists make N concepts even with colliding labels") {
  MemoryGraph g;
  for (int i = 0; i < 7; ++i) ingest(g, project_x_success());
  CHECK(g.nodes_of_type(NodeType::Concept).size() == 7);
  CHECK(g.version() == 7);
}

TEST_CASE("extension dimensions take gist elements") {
  SchemaBuilder b;
  NodeType emotion = b.add_node_type("Emotion");
  RelationType has_emotion = b.add_relation_type("HAS_EMOTION");
  b.admit(NodeType::Concept, has_emotion, emotion);
  MemoryGraph g(b.freeze());
  Gist gist = jack_and_jill();
  gist.elements.push_back(el(has_emotion, "joy"));
  auto r = ingest(g, gist);
  CHECK(r.created_relation_count == 10);
  CHECK(g.find_by_name(emotion, "joy"));
  CHECK_FALSE(g.find_by_name(NodeType::Element, "joy"));
  CHECK(validate_graph(g.schema(), g).empty());
}

TEST_CASE("ingest_stream skips bad gists with diagnostics") {
  MemoryGraph g;
  SUBCASE("project x pair") {
    std::vector<Gist> gists = {project_x_success(), project_x_delay()};
    auto res = ingest_stream(g, gists);
    CHECK(res.receipts.size() == 2);
    CHECK(res.diagnostics.empty());
    CHECK(g.version() == 2);
  }
  SUBCASE("empty") {
    auto res = ingest_stream(g, {});
    CHECK(res.receipts.empty());
    CHECK(g.version() == 0);
  }
  SUBCASE("middle record invalid") {
    Gist bad = project_x_delay();
    bad.elements = {el(RelationType::AcquiredAt, "jack")};
    std::vector<Gist> gists = {project_x_success(), bad, project_x_delay()};
    auto res = ingest_stream(g, gists);
    CHECK(res.receipts.size() == 2);
    REQUIRE(res.diagnostics.size() == 1);
    CHECK(res.diagnostics[0].index == 1);
    CHECK(g.version() == 2);
  }
}

TEST_CASE("gist lines parse, skip comments and report bad lines") {
  auto schema = Schema::default_schema();
  std::istringstream in(
      "# header\n"
      "\n" +
      format_gist(*schema, jack_and_jill()) + "\n" +
      "{\"concept\": \"x\"}\n"
      "not json\n"
      "   \n" +
      format_gist(*schema, project_x_delay()) + "\n");
  auto lines = read_gist_lines(*schema, in);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0].line_number == 3);
  REQUIRE(lines[0].gist);
  CHECK(lines[0].gist->concept_label == "fetch-water");
  CHECK(lines[0].gist->elements.size() == 5);
  CHECK(lines[0].gist->event_time == when("2000-01-01"));
  CHECK_FALSE(lines[1].gist);
  CHECK_FALSE(lines[1].error.empty());
  CHECK_FALSE(lines[2].gist);
  CHECK(lines[3].line_number == 7);
  CHECK(lines[3].gist);
}

TEST_CASE("gist format round trips including intervals") {
  auto schema = Schema::default_schema();
  Gist g = project_x_success();
  g.event_time = when("2025-01-01/2025-02-01");
  auto back = parse_gist(*schema, format_gist(*schema, g));
  CHECK(back.event_time == g.event_time);
  CHECK(back.acquisition_time == g.acquisition_time);
  CHECK(back.source_name == g.source_name);
  CHECK(back.elements.size() == g.elements.size());
  CHECK(back.elements[1].rel == RelationType::HasAction);
  CHECK_THROWS_AS(parse_gist(*schema, R"({"concept":"x","elements":[{"rel":"NOPE","name":"a"}],"source":"s","interaction":"i"})"),
                  Error);
}
