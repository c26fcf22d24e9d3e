#include "dgmm/validate.hpp"

#include <map>
#include <sstream>

namespace dgmm {
namespace {

std::string type_label(const Schema& schema, NodeType t) {
  return schema.contains(t) ? std::string(schema.name(t))
                            : "#" + std::to_string(t.index);
}

std::string rel_label(const Schema& schema, RelationType r) {
  return schema.contains(r) ? std::string(schema.name(r))
                            : "#" + std::to_string(r.index);
}

ValidationReport check(const Schema& schema, const std::map<NodeId, NodeType>& types,
                       const std::vector<Relation>& relations) {
  ValidationReport report;
  for (const auto& [id, t] : types) {
    if (!schema.contains(t)) {
      report.nodes.push_back({id, "unknown node type " + type_label(schema, t)});
    }
  }
  for (const auto& r : relations) {
    auto s = types.find(r.src);
    auto d = types.find(r.dst);
    if (s == types.end() || d == types.end()) {
      report.relations.push_back({r, "dangling endpoint"});
      continue;
    }
    if (!schema.contains(s->second) || !schema.contains(d->second) ||
        !schema.contains(r.type)) {
      report.relations.push_back({r, "unknown tag"});
      continue;
    }
    if (!schema.admissible(s->second, d->second, r.type)) {
      report.relations.push_back(
          {r, type_label(schema, s->second) + " -" + rel_label(schema, r.type) + "-> " +
                  type_label(schema, d->second) + " is not admissible"});
    }
  }
  return report;
}

}  // namespace

ValidationReport validate_graph(const Schema& schema, const MemoryGraph& graph) {
  std::map<NodeId, NodeType> types;
  for (const auto& [id, n] : graph.nodes()) types.emplace(id, n.type);
  return check(schema, types, graph.sorted_relations());
}

ValidationReport validate_graph(const Schema& schema, const std::vector<Node>& nodes,
                                const std::vector<Relation>& relations) {
  std::map<NodeId, NodeType> types;
  for (const auto& n : nodes) types.emplace(n.id, n.type);
  return check(schema, types, relations);
}

std::string format_report(const Schema& schema, const ValidationReport& report) {
  std::ostringstream os;
  if (report.empty()) {
    os << "ok: graph conforms to schema\n";
    return os.str();
  }
  for (const auto& v : report.nodes) {
    os << "node " << v.id.value << ": " << v.reason << '\n';
  }
  for (const auto& v : report.relations) {
    os << "relation " << v.relation.src.value << " -" << rel_label(schema, v.relation.type)
       << "-> " << v.relation.dst.value << ": " << v.reason << '\n';
  }
  os << report.size() << " violation(s)\n";
  return os.str();
}

}  // namespace dgmm
