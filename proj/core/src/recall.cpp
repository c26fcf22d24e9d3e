#include "dgmm/recall.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "dgmm/error.hpp"

namespace dgmm {
namespace {

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorKind::invalid_cue, message);
}

std::string canonical_or_invalid(std::string_view raw) {
  try {
    return canonical_name(raw);
  } catch (const Error& e) {
    invalid(e.what());
  }
}

// Element-like node types: Element plus registered extension dimensions.
std::vector<NodeType> element_types(const Schema& schema) {
  std::vector<NodeType> out{NodeType::Element};
  for (auto i = kCoreNodeTypeCount; i < schema.node_type_count(); ++i) {
    out.push_back(NodeType{static_cast<std::uint16_t>(i)});
  }
  return out;
}

struct Evaluation {
  std::map<std::string, std::size_t> matched;
  std::vector<std::string> satisfied;
  std::vector<std::string> failed;
};

class Matcher {
 public:
  Matcher(const MemoryGraph& graph, const Cue& cue) : graph_(graph), cue_(cue) {}

  // Concepts that satisfy at least one present condition.
  std::set<NodeId> touched() {
    std::set<NodeId> out;
    if (!cue_.elements.empty()) {
      auto types = element_types(graph_.schema());
      for (const auto& name : cue_.elements) {
        for (NodeType t : types) {
          auto id = graph_.find_by_name(t, name);
          if (!id) continue;
          for (const auto& k : graph_.in_relations(*id)) {
            if (graph_.node(k.src).type != NodeType::Concept) continue;
            overlap_[k.src][name] += 1;
            out.insert(k.src);
          }
        }
      }
    }
    if (cue_.source_name) {
      if (auto s = graph_.find_by_name(NodeType::Source, *cue_.source_name)) {
        for (const auto& k : graph_.out_relations(*s)) {
          if (k.type == RelationType::Recounts) out.insert(k.dst);
        }
      }
    }
    if (cue_.interaction_id) {
      if (auto i = graph_.find_by_name(NodeType::Interaction, *cue_.interaction_id)) {
        for (const auto& k : graph_.in_relations(*i)) {
          if (k.type == RelationType::PartOf) out.insert(k.src);
        }
      }
    }
    if (cue_.has_time_window()) {
      for (NodeId c : graph_.nodes_of_type(NodeType::Concept)) {
        if (time_ok(c)) out.insert(c);
      }
    }
    return out;
  }

  Evaluation evaluate(NodeId c) const {
    Evaluation ev;
    auto mark = [&ev](bool ok, const char* name) {
      (ok ? ev.satisfied : ev.failed).emplace_back(name);
    };
    if (!cue_.elements.empty()) {
      if (auto it = overlap_.find(c); it != overlap_.end()) ev.matched = it->second;
      mark(ev.matched.size() >= cue_.min_element_overlap, "elements");
    }
    if (cue_.has_time_window()) mark(time_ok(c), "time");
    if (cue_.source_name) mark(linked_source(c), "source");
    if (cue_.interaction_id) mark(linked_interaction(c), "interaction");
    return ev;
  }

 private:
  bool in_window(NodeId t) const {
    const auto& tv = *graph_.node(t).time;
    return (!cue_.from || tv.start() >= *cue_.from) && (!cue_.to || tv.end() <= *cue_.to);
  }

  // OCCURRED_AT, falling back to ACQUIRED_AT only when there is no event time.
  bool time_ok(NodeId c) const {
    bool has_event = false;
    for (const auto& k : graph_.out_relations(c)) {
      if (k.type != RelationType::OccurredAt) continue;
      has_event = true;
      if (in_window(k.dst)) return true;
    }
    if (has_event) return false;
    for (const auto& k : graph_.out_relations(c)) {
      if (k.type == RelationType::AcquiredAt && in_window(k.dst)) return true;
    }
    return false;
  }

  bool linked_source(NodeId c) const {
    for (const auto& k : graph_.in_relations(c)) {
      if (k.type == RelationType::Recounts && graph_.node(k.src).name == *cue_.source_name) {
        return true;
      }
    }
    return false;
  }

  bool linked_interaction(NodeId c) const {
    for (const auto& k : graph_.out_relations(c)) {
      if (k.type == RelationType::PartOf && graph_.node(k.dst).name == *cue_.interaction_id) {
        return true;
      }
    }
    return false;
  }

  const MemoryGraph& graph_;
  const Cue& cue_;
  std::map<NodeId, std::map<std::string, std::size_t>> overlap_;
};

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::pair<WorkingMemory, TraceReport> run_recall(const MemoryGraph& current, const Cue& raw,
                                                 std::optional<Version> at) {
  Cue cue = canonical_cue(raw);
  if (at && *at > current.version()) {
    throw Error(ErrorKind::out_of_range, "version " + std::to_string(*at) +
                                             " is beyond the current version " +
                                             std::to_string(current.version()));
  }
  std::optional<MemoryGraph> pinned;
  if (at && *at < current.version()) pinned.emplace(current.snapshot(*at));
  const MemoryGraph& graph = pinned ? *pinned : current;

  Matcher matcher(graph, cue);
  TraceReport trace;
  std::vector<std::pair<std::size_t, NodeId>> candidates;  // (overlap, id)
  for (NodeId c : matcher.touched()) {
    Evaluation ev = matcher.evaluate(c);
    TraceEntry entry;
    entry.concept_id = c;
    entry.label = graph.node(c).name;
    entry.matched_elements = std::move(ev.matched);
    entry.satisfied = std::move(ev.satisfied);
    entry.failed = std::move(ev.failed);
    if (entry.failed.empty()) {
      entry.included = true;
      candidates.emplace_back(entry.matched_elements.size(), c);
    } else {
      entry.exclusion = "failed: " + join(entry.failed, ",");
    }
    trace.entries.push_back(std::move(entry));
  }

  std::sort(candidates.begin(), candidates.end(),
            [](const auto& a, const auto& b) { return a > b; });
  std::set<NodeId> selected;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (cue.max_concepts && i >= *cue.max_concepts) break;
    selected.insert(candidates[i].second);
  }
  for (auto& e : trace.entries) {
    if (e.included && !selected.contains(e.concept_id)) {
      e.included = false;
      e.exclusion = "capped";
    }
  }
  trace.all_concepts_selected =
      !selected.empty() && selected.size() == graph.nodes_of_type(NodeType::Concept).size();

  WorkingMemory w;
  w.cue = cue;
  w.version = graph.version();
  w.schema = graph.schema_ptr();
  std::set<RelationKey> keys;
  for (NodeId c : selected) {
    w.nodes.emplace(c, graph.node(c));
    for (const auto& k : graph.out_relations(c)) {
      keys.insert(k);
      w.nodes.emplace(k.dst, graph.node(k.dst));
    }
    for (const auto& k : graph.in_relations(c)) {
      keys.insert(k);
      w.nodes.emplace(k.src, graph.node(k.src));
    }
  }
  w.relations.reserve(keys.size());
  for (const auto& k : keys) w.relations.push_back({k.src, k.dst, k.type, *graph.weight(k)});
  return {std::move(w), std::move(trace)};
}

bool window_within(const Cue& narrow, const Cue& broad) {
  if (broad.from && (!narrow.from || *narrow.from < *broad.from)) return false;
  if (broad.to && (!narrow.to || *narrow.to > *broad.to)) return false;
  return true;
}

}  // namespace

Cue canonical_cue(const Cue& cue) {
  if (!cue.has_condition()) invalid("cue requires at least one condition");
  Cue c = cue;
  for (auto& e : c.elements) e = canonical_or_invalid(e);
  std::sort(c.elements.begin(), c.elements.end());
  c.elements.erase(std::unique(c.elements.begin(), c.elements.end()), c.elements.end());
  if (c.source_name) c.source_name = canonical_or_invalid(*c.source_name);
  if (c.interaction_id) c.interaction_id = canonical_or_invalid(*c.interaction_id);

  if (c.min_element_overlap < 1) invalid("min_overlap must be at least 1");
  if (c.elements.empty() && c.min_element_overlap != 1) {
    invalid("min_overlap requires at least one element");
  }
  if (c.min_element_overlap > std::max<std::size_t>(c.elements.size(), 1)) {
    invalid("min_overlap " + std::to_string(c.min_element_overlap) + " exceeds the " +
            std::to_string(c.elements.size()) + " distinct cue element(s)");
  }
  if (c.from && c.to && *c.from > *c.to) invalid("time window starts after it ends");
  if (c.max_concepts && *c.max_concepts < 1) invalid("max_concepts must be at least 1");
  return c;
}

std::string describe(const Cue& cue) {
  std::vector<std::string> parts;
  if (!cue.elements.empty()) {
    parts.push_back("elements=[" + join(cue.elements, ",") + "]");
    parts.push_back("min_overlap=" + std::to_string(cue.min_element_overlap));
  }
  if (cue.from) parts.push_back("from=" + format_instant(*cue.from));
  if (cue.to) parts.push_back("to=" + format_instant(*cue.to));
  if (cue.source_name) parts.push_back("source=" + *cue.source_name);
  if (cue.interaction_id) parts.push_back("interaction=" + *cue.interaction_id);
  if (cue.max_concepts) parts.push_back("max_concepts=" + std::to_string(*cue.max_concepts));
  return join(parts, " ");
}

bool refines(const Cue& narrow, const Cue& broad) {
  if (narrow == broad) return true;
  // A cap breaks monotonicity: a narrower cue can keep what the broad cap drops.
  if (narrow.max_concepts || broad.max_concepts) return false;
  if (!broad.elements.empty()) {
    if (narrow.elements.empty()) return false;
    // Worst case a narrow match covers every narrow-only element; what is
    // left must still reach the broad threshold.
    std::size_t extra = 0;
    for (const auto& e : narrow.elements) {
      if (!std::binary_search(broad.elements.begin(), broad.elements.end(), e)) ++extra;
    }
    if (narrow.min_element_overlap < extra + broad.min_element_overlap) return false;
  }
  if (!window_within(narrow, broad)) return false;
  if (broad.source_name && narrow.source_name != broad.source_name) return false;
  if (broad.interaction_id && narrow.interaction_id != broad.interaction_id) return false;
  return true;
}

Cue parse_cue_json(std::string_view text) {
  using nlohmann::json;
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, std::string("malformed cue file: ") + e.what());
  }
  if (!obj.is_object()) throw Error(ErrorKind::parse, "cue file must hold a JSON object");
  Cue cue;
  try {
    for (const auto& [key, value] : obj.items()) {
      if (key == "elements") {
        cue.elements = value.get<std::vector<std::string>>();
      } else if (key == "min_overlap" || key == "min_element_overlap") {
        cue.min_element_overlap = value.get<std::size_t>();
      } else if (key == "from") {
        cue.from = parse_instant(value.get<std::string>());
      } else if (key == "to") {
        cue.to = parse_instant(value.get<std::string>());
      } else if (key == "source" || key == "source_name") {
        cue.source_name = value.get<std::string>();
      } else if (key == "interaction" || key == "interaction_id") {
        cue.interaction_id = value.get<std::string>();
      } else if (key == "max_concepts") {
        cue.max_concepts = value.get<std::size_t>();
      } else {
        throw Error(ErrorKind::parse, "unknown cue field '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("bad cue field: ") + e.what());
  }
  return cue;
}

const Node* WorkingMemory::find_node(NodeId id) const {
  auto it = nodes.find(id);
  return it == nodes.end() ? nullptr : &it->second;
}

bool WorkingMemory::has_relation(const RelationKey& key) const {
  auto it = std::lower_bound(relations.begin(), relations.end(), key,
                             [](const Relation& r, const RelationKey& k) { return r.key() < k; });
  return it != relations.end() && it->key() == key;
}

std::vector<NodeId> WorkingMemory::nodes_of_type(NodeType type) const {
  std::vector<NodeId> out;
  for (const auto& [id, n] : nodes) {
    if (n.type == type) out.push_back(id);
  }
  return out;
}

WorkingMemory recall(const MemoryGraph& graph, const Cue& cue, std::optional<Version> at) {
  return run_recall(graph, cue, at).first;
}

std::pair<WorkingMemory, TraceReport> recall_trace(const MemoryGraph& graph, const Cue& cue,
                                                   std::optional<Version> at) {
  return run_recall(graph, cue, at);
}

bool contains(const WorkingMemory& w1, const WorkingMemory& w2) {
  if (w1.version != w2.version) {
    throw Error(ErrorKind::incomparable, "recalls at versions " + std::to_string(w1.version) +
                                             " and " + std::to_string(w2.version) +
                                             " are not comparable");
  }
  if (!refines(w1.cue, w2.cue) && !refines(w2.cue, w1.cue)) {
    throw Error(ErrorKind::incomparable, "cues [" + describe(w1.cue) + "] and [" +
                                             describe(w2.cue) + "] are not comparable");
  }
  for (const auto& [id, n] : w1.nodes) {
    if (!w2.has_node(id)) return false;
  }
  for (const auto& r : w1.relations) {
    if (!w2.has_relation(r.key())) return false;
  }
  return true;
}

std::string format_subgraph(const WorkingMemory& w) {
  const Schema& s = *w.schema;
  std::ostringstream os;
  os << "subgraph version " << w.version << '\n';
  os << "cue " << describe(w.cue) << '\n';
  for (const auto& [id, n] : w.nodes) {
    os << "node " << id.value << ' ' << s.name(n.type) << ' ' << n.name << '\n';
  }
  for (const auto& r : w.relations) {
    os << "rel " << r.src.value << ' ' << r.dst.value << ' ' << s.name(r.type) << ' '
       << format_number(r.weight) << '\n';
  }
  return os.str();
}

std::string format_working_memory(const WorkingMemory& w) {
  const Schema& s = *w.schema;
  std::ostringstream os;
  os << "working memory at version " << w.version << " for cue: " << describe(w.cue) << '\n';
  auto concept_ids = w.concepts();
  os << concept_ids.size() << " concept(s), " << w.nodes.size() << " node(s), "
     << w.relations.size() << " relation(s)\n";
  for (NodeId c : concept_ids) {
    os << "concept " << c.value << ' ' << w.nodes.at(c).name << '\n';
    for (const auto& r : w.relations) {
      if (r.src == c) {
        const Node& d = w.nodes.at(r.dst);
        os << "  " << s.name(r.type) << ' ' << s.name(d.type) << ' ' << d.name;
      } else if (r.dst == c) {
        const Node& src = w.nodes.at(r.src);
        os << "  " << s.name(src.type) << ' ' << src.name << ' ' << s.name(r.type);
      } else {
        continue;
      }
      if (r.weight != 1.0) os << " w=" << format_number(r.weight);
      os << '\n';
    }
  }
  return os.str();
}

std::string format_trace(const TraceReport& trace) {
  std::ostringstream os;
  os << "trace: " << trace.entries.size() << " concept(s) touched\n";
  for (const auto& e : trace.entries) {
    os << "concept " << e.concept_id.value << ' ' << e.label << ": "
       << (e.included ? "included" : "excluded (" + e.exclusion + ")");
    if (!e.matched_elements.empty()) {
      os << " overlap {";
      bool first = true;
      for (const auto& [name, count] : e.matched_elements) {
        os << (first ? "" : ",") << name << ':' << count;
        first = false;
      }
      os << '}';
    }
    if (!e.satisfied.empty()) os << " satisfied " << join(e.satisfied, ",");
    os << '\n';
  }
  if (trace.all_concepts_selected) os << "note: every concept in the store satisfied the cue\n";
  return os.str();
}

}  // namespace dgmm
