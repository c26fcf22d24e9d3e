#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dgmm/graph.hpp"

namespace dgmm {

// Structured recall cue. Conditions combine conjunctively; absent fields are
// not conditions. Time bounds are epoch seconds, each optional.
struct Cue {
  std::vector<std::string> elements;
  std::size_t min_element_overlap = 1;
  std::optional<std::int64_t> from;
  std::optional<std::int64_t> to;
  std::optional<std::string> source_name;
  std::optional<std::string> interaction_id;
  std::optional<std::size_t> max_concepts;

  bool has_time_window() const noexcept { return from.has_value() || to.has_value(); }
  bool has_condition() const noexcept {
    return !elements.empty() || has_time_window() || source_name || interaction_id;
  }

  friend bool operator==(const Cue&, const Cue&) = default;
};

// Throws Error(invalid_cue) when the cue cannot select anything by
// construction. Returns canonical names with elements sorted and unique.
Cue canonical_cue(const Cue& cue);

// One-line canonical rendering, e.g. `elements=[a,b] min_overlap=1 source=x`.
std::string describe(const Cue& cue);

// True when every Concept selected by `narrow` is necessarily selected by
// `broad` on any store. Both cues must already be canonical.
bool refines(const Cue& narrow, const Cue& broad);

// Cue file: a JSON object with keys elements, min_overlap, from, to, source,
// interaction, max_concepts (the CLI flag names). Throws Error(parse).
Cue parse_cue_json(std::string_view text);

// Transient subgraph W_q. Self-contained: node copies and relations, so it
// stays valid after the store moves on.
struct WorkingMemory {
  Cue cue;  // canonical
  Version version = 0;
  std::shared_ptr<const Schema> schema;
  std::map<NodeId, Node> nodes;
  std::vector<Relation> relations;  // ordered by key

  bool empty() const noexcept { return nodes.empty(); }
  const Node* find_node(NodeId id) const;
  bool has_node(NodeId id) const { return nodes.contains(id); }
  bool has_relation(const RelationKey& key) const;
  std::vector<NodeId> nodes_of_type(NodeType type) const;
  std::vector<NodeId> concepts() const { return nodes_of_type(NodeType::Concept); }
};

// Candidate Concepts satisfying every present condition, capped to the top
// max_concepts by (element overlap desc, id desc), closed over one hop.
// `at` defaults to the current version; Error(out_of_range) beyond it.
WorkingMemory recall(const MemoryGraph& graph, const Cue& cue,
                     std::optional<Version> at = std::nullopt);

struct TraceEntry {
  NodeId concept_id;
  std::string label;
  std::map<std::string, std::size_t> matched_elements;  // name -> link count
  std::vector<std::string> satisfied;                   // condition names
  std::vector<std::string> failed;
  bool included = false;
  std::string exclusion;  // "failed: ..." or "capped"; empty when included
};

struct TraceReport {
  // Every Concept that satisfied at least one condition, by id.
  std::vector<TraceEntry> entries;
  // Set when the cue selected every Concept of the store (no selectivity).
  bool all_concepts_selected = false;
};

std::pair<WorkingMemory, TraceReport> recall_trace(const MemoryGraph& graph, const Cue& cue,
                                                   std::optional<Version> at = std::nullopt);

// w1 ⊆ w2 on nodes and relations. Requires equal versions and cues that are
// equal or where one refines the other; otherwise Error(incomparable).
bool contains(const WorkingMemory& w1, const WorkingMemory& w2);

// Canonical sorted subgraph document, diffable between runs.
std::string format_subgraph(const WorkingMemory& w);
// Human-oriented listing with names resolved.
std::string format_working_memory(const WorkingMemory& w);
std::string format_trace(const TraceReport& trace);

}  // namespace dgmm
