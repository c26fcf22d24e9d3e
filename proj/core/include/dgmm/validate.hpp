#pragma once

#include <string>
#include <vector>

#include "dgmm/graph.hpp"
#include "dgmm/schema.hpp"

namespace dgmm {

struct RelationViolation {
  Relation relation;
  std::string reason;
};

struct NodeViolation {
  NodeId id;
  std::string reason;
};

struct ValidationReport {
  std::vector<RelationViolation> relations;
  std::vector<NodeViolation> nodes;

  bool empty() const noexcept { return relations.empty() && nodes.empty(); }
  std::size_t size() const noexcept { return relations.size() + nodes.size(); }
};

// Checks every node type and every relation of `graph` against `schema`.
// Violations are reported, never thrown.
ValidationReport validate_graph(const Schema& schema, const MemoryGraph& graph);

// Same check over raw parts, for graphs assembled outside the commit path.
ValidationReport validate_graph(const Schema& schema, const std::vector<Node>& nodes,
                                const std::vector<Relation>& relations);

std::string format_report(const Schema& schema, const ValidationReport& report);

}  // namespace dgmm
