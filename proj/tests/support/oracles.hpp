#pragma once

// Reference computations written against the raw node and relation tables,
// without the graph's adjacency indexes or the recall/analysis code paths.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dgmm/dgmm.hpp"

namespace dgmm::test {

inline std::set<NodeId> node_set(const MemoryGraph& g) {
  std::set<NodeId> out;
  for (const auto& [id, n] : g.nodes()) out.insert(id);
  return out;
}

inline std::map<RelationKey, double> relation_map(const MemoryGraph& g) {
  return {g.relations().begin(), g.relations().end()};
}

template <class A, class B>
bool subset(const A& small, const B& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

inline std::set<NodeId> node_set(const WorkingMemory& w) {
  std::set<NodeId> out;
  for (const auto& [id, n] : w.nodes) out.insert(id);
  return out;
}

inline std::set<RelationKey> relation_set(const WorkingMemory& w) {
  std::set<RelationKey> out;
  for (const auto& r : w.relations) out.insert(r.key());
  return out;
}

struct NaiveRecall {
  std::set<NodeId> nodes;
  std::set<RelationKey> relations;
  std::set<NodeId> concepts;
};

// Brute-force recall straight from the definition: full scans of the
// relation table for every concept and every condition.
inline NaiveRecall naive_recall(const MemoryGraph& g, const Cue& raw) {
  Cue cue = canonical_cue(raw);
  auto rels = relation_map(g);
  std::vector<std::pair<std::size_t, NodeId>> passing;
  for (const auto& [id, n] : g.nodes()) {
    if (n.type != NodeType::Concept) continue;
    std::set<std::string> matched;
    bool source_ok = false, interaction_ok = false, event_in = false, acquired_in = false;
    bool has_event = false;
    for (const auto& [k, w] : rels) {
      if (k.src == id) {
        const Node& d = g.nodes().at(k.dst);
        if (d.type != NodeType::Concept && d.type != NodeType::Time &&
            d.type != NodeType::Interaction && d.type != NodeType::Source &&
            std::count(cue.elements.begin(), cue.elements.end(), d.name)) {
          matched.insert(d.name);
        }
        if (k.type == RelationType::PartOf && cue.interaction_id && d.name == *cue.interaction_id)
          interaction_ok = true;
        if (k.type == RelationType::OccurredAt || k.type == RelationType::AcquiredAt) {
          bool in = (!cue.from || d.time->start() >= *cue.from) &&
                    (!cue.to || d.time->end() <= *cue.to);
          if (k.type == RelationType::OccurredAt) {
            has_event = true;
            event_in = event_in || in;
          } else {
            acquired_in = acquired_in || in;
          }
        }
      }
      if (k.dst == id && k.type == RelationType::Recounts && cue.source_name &&
          g.nodes().at(k.src).name == *cue.source_name) {
        source_ok = true;
      }
    }
    bool ok = true;
    if (!cue.elements.empty()) ok = ok && matched.size() >= cue.min_element_overlap;
    if (cue.from || cue.to) ok = ok && (has_event ? event_in : acquired_in);
    if (cue.source_name) ok = ok && source_ok;
    if (cue.interaction_id) ok = ok && interaction_ok;
    if (ok) passing.emplace_back(matched.size(), id);
  }
  std::sort(passing.rbegin(), passing.rend());
  if (cue.max_concepts && passing.size() > *cue.max_concepts) passing.resize(*cue.max_concepts);

  NaiveRecall out;
  for (const auto& [o, id] : passing) out.concepts.insert(id);
  out.nodes = out.concepts;
  for (const auto& [k, w] : rels) {
    if (out.concepts.count(k.src) || out.concepts.count(k.dst)) {
      out.relations.insert(k);
      out.nodes.insert(k.src);
      out.nodes.insert(k.dst);
    }
  }
  return out;
}

// Nodes of a given type reachable from a concept by one relation, in either
// direction.
inline std::set<std::string> context_names(const MemoryGraph& g, NodeId c, NodeType type) {
  std::set<std::string> out;
  for (const auto& [k, w] : g.relations()) {
    NodeId other;
    if (k.src == c) other = k.dst;
    else if (k.dst == c) other = k.src;
    else continue;
    const Node& n = g.nodes().at(other);
    if (n.type == type) out.insert(n.name);
  }
  return out;
}

inline std::vector<TimeValue> event_times(const MemoryGraph& g, NodeId c) {
  std::vector<TimeValue> out;
  for (const auto& [k, w] : g.relations()) {
    if (k.src == c && k.type == RelationType::OccurredAt) out.push_back(*g.nodes().at(k.dst).time);
  }
  return out;
}

// Total relation weight entering each element-like node, keyed by name.
inline std::map<std::string, double> element_mass(const MemoryGraph& g) {
  std::map<std::string, double> out;
  for (const auto& [k, w] : g.relations()) {
    const Node& d = g.nodes().at(k.dst);
    if (d.type == NodeType::Element) out[d.name] += w;
  }
  return out;
}

// Follows consolidation tombstones.
inline NodeId survivor(const MemoryGraph& g, NodeId id) {
  while (g.tombstones().count(id)) id = g.tombstones().at(id);
  return id;
}

// Breadth-first k-hop node set written against the relation vector.
inline std::set<NodeId> hop_set(const WorkingMemory& w, NodeId v, int k) {
  std::set<NodeId> frontier{v}, seen{v};
  for (int d = 0; d < k; ++d) {
    std::set<NodeId> next;
    for (const auto& r : w.relations) {
      if (frontier.count(r.src) && !seen.count(r.dst)) next.insert(r.dst);
      if (frontier.count(r.dst) && !seen.count(r.src)) next.insert(r.src);
    }
    seen.insert(next.begin(), next.end());
    frontier = std::move(next);
  }
  seen.erase(v);
  return seen;
}

}  // namespace dgmm::test
