#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dgmm;
using namespace dgmm::test;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::io;
}

struct ProjectX {
  MemoryGraph g;
  NodeId success, delay;
  ProjectX() {
    success = ingest(g, project_x_success()).concept_id;
    delay = ingest(g, project_x_delay()).concept_id;
  }
  NodeId source(std::string_view name) const { return *g.find_by_name(NodeType::Source, name); }
};

bool holds(std::string_view text, const WorkingMemory& w) { return evaluate(parse_predicate(text), w); }

}  // namespace

TEST_CASE("source attribution") {
  ProjectX px;
  auto w = recall(px.g, broad_cue());
  CHECK(source_attribution(w, px.success) == std::set<NodeId>{px.source("source-a")});
  CHECK(source_attribution(w, px.delay) == std::set<NodeId>{px.source("source-b")});

  auto stripped = w;
  std::erase_if(stripped.relations, [](const Relation& r) { return r.type == RelationType::Recounts; });
  CHECK(source_attribution(stripped, px.success).empty());

  CHECK(kind_of([&] { source_attribution(w, NodeId{999}); }) == ErrorKind::not_recalled);
  CHECK(kind_of([&] { source_attribution(w, px.source("source-a")); }) == ErrorKind::precondition);
}

TEST_CASE("merged concepts are attributed to both sources") {
  MemoryGraph g;
  auto a = ingest(g, jack_and_jill());
  Gist other = jack_and_jill();
  other.source_name = "nursery-rhymes";
  ingest(g, other);
  consolidation_pass(g);
  Cue c;
  c.elements = {"water"};
  auto w = recall(g, c);
  auto sources = source_attribution(w, a.concept_id);
  CHECK(sources.size() == 2);
}

TEST_CASE("source distributions") {
  ProjectX px;
  auto broad = source_distribution(recall(px.g, broad_cue()));
  CHECK(broad.masses.at(px.source("source-a")) == 1.0);
  CHECK(broad.masses.at(px.source("source-b")) == 1.0);
  CHECK(broad.probabilities.at(px.source("source-a")) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(broad.probabilities.at(px.source("source-b")) == doctest::Approx(0.5).epsilon(1e-9));

  auto narrow = source_distribution(recall(px.g, narrow_cue()));
  REQUIRE(narrow.probabilities.size() == 1);
  CHECK(narrow.probabilities.at(px.source("source-b")) == 1.0);

  // Element weight sum: three element links per concept.
  auto weighted = source_distribution(recall(px.g, broad_cue()), Weighting::element_weight_sum);
  CHECK(weighted.masses.at(px.source("source-a")) == 3.0);
  CHECK(weighted.probabilities.at(px.source("source-b")) == 0.5);

  Cue none;
  none.source_name = "nobody";
  auto empty = source_distribution(recall(px.g, none));
  CHECK(empty.masses.empty());
  CHECK(empty.probabilities.empty());

  auto text = format_distribution(broad);
  CHECK(text.find("source-a mass=1 p=0.5") != std::string::npos);

  CHECK(parse_weighting("element-weight-sum") == Weighting::element_weight_sum);
  CHECK(to_string(Weighting::uniform) == "uniform");
  CHECK(kind_of([] { parse_weighting("heavy"); }) == ErrorKind::invalid_parameters);
}

TEST_CASE("a concept with two sources gives its full weight to each") {
  MemoryGraph g;
  ingest(g, jack_and_jill());
  Gist other = jack_and_jill();
  other.source_name = "nursery-rhymes";
  ingest(g, other);
  consolidation_pass(g);
  Cue c;
  c.elements = {"jack"};
  auto d = source_distribution(recall(g, c));
  REQUIRE(d.masses.size() == 2);
  for (const auto& [id, m] : d.masses) CHECK(m == 1.0);
  for (const auto& [id, p] : d.probabilities) CHECK(p == 0.5);
}

TEST_CASE("predicate parsing") {
  auto p = parse_predicate("requires-source(Source-A)");
  CHECK(p.kind == PredicateKind::requires_source);
  CHECK(p.source_name == "source-a");
  auto age = parse_predicate(" max-event-age( 30d , 2025-12-01 ) ");
  CHECK(age.kind == PredicateKind::max_event_age);
  CHECK(age.max_age_seconds == 30 * 86'400);
  CHECK(age.reference_time == parse_instant("2025-12-01"));
  CHECK(parse_predicate("max-event-age(90m, 2025-12-01)").max_age_seconds == 5400);
  CHECK(parse_predicate("max-event-age(7, 2025-12-01)").max_age_seconds == 7);
  CHECK(parse_predicate("min-concepts(2)").count == 2);
  CHECK(parse_predicate("min-provenance-count(3)").kind == PredicateKind::min_provenance_count);
  CHECK(parse_predicate("excludes-source(x)").kind == PredicateKind::excludes_source);

  for (const char* bad : {"", "min-concepts", "min-concepts()", "min-concepts(-1)",
                          "min-concepts(two)", "requires-source()", "max-event-age(3w, 2025-01-01)",
                          "max-event-age(3d)", "unknown(1)", "min-concepts(1) trailing"}) {
    CAPTURE(bad);
    CHECK(kind_of([&] { parse_predicate(bad); }) == ErrorKind::parse);
  }
  for (const char* text : {"requires-source(source-a)", "max-event-age(30d, 2025-12-01)",
                           "min-concepts(2)", "excludes-source(b)", "min-provenance-count(1)"}) {
    CHECK(parse_predicate(format_predicate(parse_predicate(text))) == parse_predicate(text));
  }
}

TEST_CASE("predicate evaluation on project x") {
  ProjectX px;
  auto broad = recall(px.g, broad_cue());
  auto narrow = recall(px.g, narrow_cue());
  CHECK(holds("requires-source(source-a)", broad));
  CHECK_FALSE(holds("requires-source(source-a)", narrow));
  CHECK(holds("excludes-source(source-a)", narrow));
  CHECK_FALSE(holds("min-concepts(3)", broad));
  CHECK(holds("min-concepts(2)", broad));
  CHECK(holds("min-provenance-count(2)", broad));
  CHECK_FALSE(holds("min-provenance-count(2)", narrow));
  // Event times 2025-01-10 and 2025-03-02.
  CHECK(holds("max-event-age(365d, 2025-12-01)", broad));
  CHECK_FALSE(holds("max-event-age(100d, 2025-06-01)", broad));
  CHECK(holds("max-event-age(100d, 2025-06-01)", narrow));
}

TEST_CASE("governance signatures") {
  ProjectX px;
  auto w = recall(px.g, broad_cue());
  CHECK(governance_signature(w, std::vector<GovernancePredicate>{}).outcomes.empty());
  CHECK(governance_signature(w, std::vector<GovernancePredicate>{}).satisfied().empty());

  auto lines = read_predicate_lines(
      "# comment\nrequires-source(source-a)\n\nmin-concepts(3)\nbogus(1)\n  \nmin-provenance-count(2)\n");
  REQUIRE(lines.size() == 4);
  auto sig = governance_signature(w, lines);
  REQUIRE(sig.outcomes.size() == 4);
  CHECK(sig.has_errors());
  CHECK(sig.satisfied() ==
        std::vector<std::string>{"requires-source(source-a)", "min-provenance-count(2)"});
  CHECK_FALSE(sig.outcomes[2].error.empty());
  auto text = format_signature(sig);
  CHECK(text.find("signature: 2 of 4 predicate(s) satisfied") != std::string::npos);
  CHECK(text.find("violated  min-concepts(3)") != std::string::npos);
  CHECK(text.find("error     bogus(1)") != std::string::npos);
}

TEST_CASE("jack and jill proposition") {
  MemoryGraph g;
  ingest(g, jack_and_jill());
  Cue c;
  c.elements = {"water"};
  auto props = generate_propositions(recall(g, c), nullptr, 10);
  REQUIRE(props.size() == 1);
  CHECK(props[0].text == "jack and jill fetch water (fresh) at 2000-01-01 per jack-and-jill-book");
  CHECK(props[0].source_names == std::vector<std::string>{"jack-and-jill-book"});
  CHECK(*props[0].time_summary == "2000-01-01");
}

TEST_CASE("project x propositions cover success and delay") {
  ProjectX px;
  auto w = recall(px.g, broad_cue());
  auto z = embed(w);
  auto props = generate_propositions(w, &z, 10);
  REQUIRE(props.size() == 2);
  std::string joined = props[0].text + " | " + props[1].text;
  CHECK(joined.find("success") != std::string::npos);
  CHECK(joined.find("delay") != std::string::npos);
  CHECK(props[0].source_names != props[1].source_names);
  for (const auto& p : props) {
    REQUIRE(p.supporting_concepts.size() == 1);
    std::string expected = p.text.find("delay") != std::string::npos ? "source-b" : "source-a";
    CHECK(p.source_names == std::vector<std::string>{expected});
  }
  CHECK(generate_propositions(w, nullptr, 1).size() == 1);
  CHECK(generate_propositions(w, nullptr, 10).size() == 2);
  CHECK(kind_of([&] { generate_propositions(w, nullptr, 0); }) == ErrorKind::invalid_parameters);
  auto text = format_propositions(props);
  CHECK(text.find("supports:") != std::string::npos);

  // Deterministic across calls.
  auto again = generate_propositions(w, &z, 10);
  CHECK(again[0].text == props[0].text);
}

TEST_CASE("empty working memory yields nothing") {
  ProjectX px;
  Cue c;
  c.source_name = "nobody";
  auto w = recall(px.g, c);
  CHECK(generate_propositions(w, nullptr, 5).empty());
  CHECK_FALSE(holds("min-concepts(1)", w));
  CHECK(holds("min-concepts(0)", w));
  CHECK(holds("max-event-age(1s, 2025-01-01)", w));
}
