#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dgmm/graph.hpp"

namespace dgmm {

// Typed element links of a Concept: (relation type, Element id), sorted.
struct ElementSignature {
  std::vector<std::pair<RelationType, NodeId>> links;

  bool empty() const noexcept { return links.empty(); }
  // The element set alone, ignoring roles.
  std::vector<NodeId> elements() const;

  friend bool operator==(const ElementSignature&, const ElementSignature&) = default;
};

enum class SignatureMode {
  typed,       // (role, element) pairs must match
  role_blind,  // only the element sets must match
};

bool equivalent(const ElementSignature& a, const ElementSignature& b, SignatureMode mode);

// Throws Error(precondition) when `concept_id` is not a live Concept node.
ElementSignature element_signature(const MemoryGraph& graph, NodeId concept_id);

// Concept pairs with equal, non-empty signatures. Within each equivalence
// class members are paired in id order, so a concept appears in at most one
// pair; the result is sorted by the lower id.
std::vector<std::pair<NodeId, NodeId>> find_equivalent_pairs(
    const MemoryGraph& graph, SignatureMode mode = SignatureMode::typed);

struct ConsolidationOptions {
  // Collapse OCCURRED_AT times of a merged pair into their minimal covering
  // interval. ACQUIRED_AT times are always reattached verbatim.
  bool generalize_times = false;
  SignatureMode mode = SignatureMode::typed;
};

struct TimeGeneralization {
  std::vector<NodeId> replaced;
  NodeId generalized;
};

struct ConsolidationReport {
  std::vector<std::pair<NodeId, NodeId>> merged_pairs;  // (kept, absorbed)
  std::size_t reattached_provenance_count = 0;
  std::vector<TimeGeneralization> time_generalizations;
  Version version_before = 0;
  Version version_after = 0;

  bool empty() const noexcept { return merged_pairs.empty(); }
};

// Stages the merge of two equivalent concepts without committing it.
Batch prepare_consolidate_pair(const MemoryGraph& graph, NodeId a, NodeId b,
                               const ConsolidationOptions& options,
                               ConsolidationReport& report);

// Merges two equivalent concepts into the lower id. Element weights are
// summed and context links move to the survivor; the absorbed concept leaves
// a tombstone. One version tick.
// Throws Error(precondition) when the signatures differ or a == b.
ConsolidationReport consolidate_pair(MemoryGraph& graph, NodeId a, NodeId b,
                                     const ConsolidationOptions& options = {});

// find_equivalent_pairs + consolidate_pair until no equivalent pair remains.
ConsolidationReport consolidation_pass(MemoryGraph& graph,
                                       const ConsolidationOptions& options = {});

std::string format_consolidation_report(const MemoryGraph& graph,
                                        const ConsolidationReport& report);

}  // namespace dgmm
