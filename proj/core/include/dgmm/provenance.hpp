#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dgmm/analyze.hpp"
#include "dgmm/recall.hpp"

namespace dgmm {

// Sources with a RECOUNTS edge to concept `v` inside w.
// Errors: not_recalled (v not in w), precondition (v not a Concept).
std::set<NodeId> source_attribution(const WorkingMemory& w, NodeId v);

enum class Weighting {
  uniform,             // w(v) = 1
  element_weight_sum,  // w(v) = sum of v's element relation weights in w
};

std::string_view to_string(Weighting weighting);
// Accepts "uniform" and "element-weight-sum"; Error(invalid_parameters) otherwise.
Weighting parse_weighting(std::string_view text);

struct SourceDistribution {
  Cue cue;
  Version version = 0;
  Weighting weighting = Weighting::uniform;
  std::map<NodeId, std::string> names;
  std::map<NodeId, double> masses;
  std::map<NodeId, double> probabilities;  // empty when total mass is 0
};

// A concept with several sources contributes its full weight to each one.
SourceDistribution source_distribution(const WorkingMemory& w,
                                       Weighting weighting = Weighting::uniform);

std::string format_distribution(const SourceDistribution& d);

enum class PredicateKind {
  requires_source,
  excludes_source,
  max_event_age,
  min_provenance_count,
  min_concepts,
};

// Text form: `kind(arg,...)`, e.g. `requires-source(source-a)`,
// `max-event-age(30d, 2025-12-01)`, `min-concepts(2)`. Durations take an
// s/m/h/d suffix or none for seconds.
struct GovernancePredicate {
  PredicateKind kind = PredicateKind::min_concepts;
  std::string source_name;            // requires/excludes-source
  std::int64_t max_age_seconds = 0;   // max-event-age
  std::int64_t reference_time = 0;    // max-event-age
  std::size_t count = 0;              // min-provenance-count, min-concepts

  friend bool operator==(const GovernancePredicate&, const GovernancePredicate&) = default;
};

// Throws Error(parse) for unknown kinds or malformed arguments.
GovernancePredicate parse_predicate(std::string_view text);
std::string format_predicate(const GovernancePredicate& p);

// Total over working memories. max-event-age checks every recalled concept's
// most recent event time (OCCURRED_AT, else ACQUIRED_AT); min-provenance-count
// counts distinct sources in w.
bool evaluate(const GovernancePredicate& p, const WorkingMemory& w);

struct PredicateOutcome {
  std::string text;
  bool satisfied = false;
  std::string error;  // set when the predicate could not be parsed
};

struct GovernanceSignature {
  std::vector<PredicateOutcome> outcomes;  // input order

  // σ_Π: the satisfied predicates' texts.
  std::vector<std::string> satisfied() const;
  bool has_errors() const;
};

GovernanceSignature governance_signature(const WorkingMemory& w,
                                         std::span<const GovernancePredicate> predicates);
// Parses each line independently; a malformed one becomes an error outcome.
GovernanceSignature governance_signature(const WorkingMemory& w,
                                         std::span<const std::string> predicate_lines);

// Predicate file: one predicate per line; blank lines and '#' comments skipped.
std::vector<std::string> read_predicate_lines(std::string_view text);

std::string format_signature(const GovernanceSignature& s);

struct Proposition {
  std::string text;
  std::vector<NodeId> supporting_concepts;
  std::vector<std::string> source_names;
  std::optional<std::string> time_summary;
  double salience = 0.0;
};

// One templated proposition per recalled concept, ranked by degree in w.
// Ties go to the concept closer to the cue-element centroid when `z` is
// given, then to the more recent concept. Error(invalid_parameters) when
// limit < 1.
std::vector<Proposition> generate_propositions(const WorkingMemory& w,
                                               const EmbeddingSpace* z, std::size_t limit);

std::string format_propositions(const std::vector<Proposition>& props);

}  // namespace dgmm
