#include "dgmm/consolidate.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "dgmm/error.hpp"

namespace dgmm {

std::vector<NodeId> ElementSignature::elements() const {
  std::vector<NodeId> out;
  out.reserve(links.size());
  for (const auto& [rel, id] : links) out.push_back(id);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool equivalent(const ElementSignature& a, const ElementSignature& b, SignatureMode mode) {
  if (mode == SignatureMode::typed) return a == b;
  return a.elements() == b.elements();
}

ElementSignature element_signature(const MemoryGraph& graph, NodeId concept_id) {
  const Node* n = graph.find_node(concept_id);
  if (!n || n->type != NodeType::Concept) {
    throw Error(ErrorKind::precondition,
                "type error: node " + std::to_string(concept_id.value) + " is not a Concept");
  }
  ElementSignature sig;
  for (const auto& k : graph.out_relations(concept_id)) {
    if (graph.node(k.dst).type == NodeType::Element) sig.links.emplace_back(k.type, k.dst);
  }
  std::sort(sig.links.begin(), sig.links.end());
  return sig;
}

std::vector<std::pair<NodeId, NodeId>> find_equivalent_pairs(const MemoryGraph& graph,
                                                             SignatureMode mode) {
  std::map<std::vector<std::pair<std::uint16_t, std::uint64_t>>, std::vector<NodeId>> classes;
  for (NodeId c : graph.nodes_of_type(NodeType::Concept)) {
    auto sig = element_signature(graph, c);
    if (sig.empty()) continue;
    std::vector<std::pair<std::uint16_t, std::uint64_t>> key;
    if (mode == SignatureMode::typed) {
      for (const auto& [rel, id] : sig.links) key.emplace_back(rel.index, id.value);
    } else {
      for (NodeId id : sig.elements()) key.emplace_back(0, id.value);
    }
    classes[std::move(key)].push_back(c);  // ascending: nodes_of_type is ordered
  }
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (const auto& [key, members] : classes) {
    for (std::size_t i = 0; i + 1 < members.size(); i += 2) {
      pairs.emplace_back(members[i], members[i + 1]);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

Batch prepare_consolidate_pair(const MemoryGraph& graph, NodeId a, NodeId b,
                               const ConsolidationOptions& options,
                               ConsolidationReport& report) {
  if (a == b) throw Error(ErrorKind::precondition, "cannot consolidate a concept with itself");
  auto sa = element_signature(graph, a);
  auto sb = element_signature(graph, b);
  if (!equivalent(sa, sb, options.mode)) {
    throw Error(ErrorKind::precondition, "concepts " + std::to_string(a.value) + " and " +
                                             std::to_string(b.value) +
                                             " are not structurally equivalent");
  }
  NodeId kept = std::min(a, b);
  NodeId absorbed = std::max(a, b);

  BatchBuilder batch(graph, BatchKind::consolidate);
  std::set<NodeId> event_times;
  for (const auto& k : graph.out_relations(kept)) {
    if (k.type == RelationType::OccurredAt) event_times.insert(k.dst);
  }

  auto reattach = [&](NodeId src, NodeId dst, RelationType type, double w) {
    if (!batch.has_relation({src, dst, type})) batch.add_relation(src, dst, type, w);
    ++report.reattached_provenance_count;
  };

  // Copy: the spans alias graph storage, which the batch never touches, but
  // keep iteration independent of staging anyway.
  std::vector<RelationKey> outgoing(graph.out_relations(absorbed).begin(),
                                    graph.out_relations(absorbed).end());
  std::vector<RelationKey> incoming(graph.in_relations(absorbed).begin(),
                                    graph.in_relations(absorbed).end());

  for (const auto& k : outgoing) {
    double w = *graph.weight(k);
    batch.remove_relation(k);
    const Node& dst = graph.node(k.dst);
    if (dst.type == NodeType::Element) {
      RelationKey merged{kept, k.dst, k.type};
      if (auto existing = graph.weight(merged)) {
        batch.set_weight(merged, *existing + w);
      } else {
        batch.add_relation(kept, k.dst, k.type, w);
      }
    } else if (k.type == RelationType::OccurredAt && options.generalize_times) {
      event_times.insert(k.dst);
      ++report.reattached_provenance_count;
    } else {
      reattach(kept, k.dst, k.type, w);
    }
  }
  for (const auto& k : incoming) {
    double w = *graph.weight(k);
    batch.remove_relation(k);
    reattach(k.src, kept, k.type, w);
  }

  if (options.generalize_times && !event_times.empty()) {
    if (event_times.size() == 1) {
      NodeId t = *event_times.begin();
      if (!batch.has_relation({kept, t, RelationType::OccurredAt})) {
        batch.add_relation(kept, t, RelationType::OccurredAt);
      }
    } else {
      std::int64_t lo = 0;
      std::int64_t hi = 0;
      bool first = true;
      for (NodeId t : event_times) {
        const auto& tv = *graph.node(t).time;
        lo = first ? tv.start() : std::min(lo, tv.start());
        hi = first ? tv.end() : std::max(hi, tv.end());
        first = false;
      }
      NodeId cover = batch.resolve_or_create_time(TimeValue::interval(lo, hi));
      TimeGeneralization gen{{}, cover};
      for (NodeId t : event_times) {
        if (t == cover) continue;
        gen.replaced.push_back(t);
        RelationKey old{kept, t, RelationType::OccurredAt};
        if (graph.has_relation(old)) batch.remove_relation(old);
      }
      if (!batch.has_relation({kept, cover, RelationType::OccurredAt})) {
        batch.add_relation(kept, cover, RelationType::OccurredAt);
      }
      report.time_generalizations.push_back(std::move(gen));
    }
  }

  batch.remove_node(absorbed);
  batch.tombstone(absorbed, kept);
  report.merged_pairs.emplace_back(kept, absorbed);
  return std::move(batch).finish();
}

ConsolidationReport consolidate_pair(MemoryGraph& graph, NodeId a, NodeId b,
                                     const ConsolidationOptions& options) {
  ConsolidationReport report;
  report.version_before = graph.version();
  Batch batch = prepare_consolidate_pair(graph, a, b, options, report);
  graph.commit(batch);
  report.version_after = graph.version();
  return report;
}

ConsolidationReport consolidation_pass(MemoryGraph& graph, const ConsolidationOptions& options) {
  ConsolidationReport report;
  report.version_before = graph.version();
  for (auto pairs = find_equivalent_pairs(graph, options.mode); !pairs.empty();
       pairs = find_equivalent_pairs(graph, options.mode)) {
    for (const auto& [a, b] : pairs) {
      Batch batch = prepare_consolidate_pair(graph, a, b, options, report);
      graph.commit(batch);
    }
  }
  report.version_after = graph.version();
  return report;
}

std::string format_consolidation_report(const MemoryGraph& graph,
                                        const ConsolidationReport& report) {
  std::ostringstream os;
  os << "consolidation: versions " << report.version_before << " -> " << report.version_after
     << '\n';
  os << "merged " << report.merged_pairs.size() << " pair(s)\n";
  for (const auto& [kept, absorbed] : report.merged_pairs) {
    os << "  merge " << absorbed.value << " -> " << kept.value;
    if (const Node* n = graph.find_node(kept)) os << " (" << n->name << ")";
    os << '\n';
  }
  os << "reattached provenance links: " << report.reattached_provenance_count << '\n';
  for (const auto& g : report.time_generalizations) {
    os << "  time generalization:";
    for (NodeId t : g.replaced) os << ' ' << graph.node(t).name;
    os << " -> " << graph.node(g.generalized).name << '\n';
  }
  return os.str();
}

}  // namespace dgmm
