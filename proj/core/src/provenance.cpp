#include "dgmm/provenance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "dgmm/error.hpp"

namespace dgmm {
namespace {

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string_view trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_predicate(std::string_view text, const std::string& why) {
  throw Error(ErrorKind::parse, "predicate '" + std::string(text) + "': " + why);
}

std::size_t parse_count(std::string_view text, std::string_view arg) {
  std::size_t n = 0;
  auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), n);
  if (ec != std::errc{} || ptr != arg.data() + arg.size()) {
    bad_predicate(text, "expected a non-negative integer, got '" + std::string(arg) + "'");
  }
  return n;
}

std::int64_t parse_duration(std::string_view text, std::string_view arg) {
  std::int64_t unit = 1;
  std::string_view digits = arg;
  if (!arg.empty()) {
    switch (arg.back()) {
      case 'd': unit = 86400; break;
      case 'h': unit = 3600; break;
      case 'm': unit = 60; break;
      case 's': unit = 1; break;
      default: unit = 0;
    }
    if (unit) digits = arg.substr(0, arg.size() - 1);
    else unit = 1;
  }
  std::int64_t n = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
  if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size() || n < 0) {
    bad_predicate(text, "bad duration '" + std::string(arg) + "'");
  }
  return n * unit;
}

std::string format_duration(std::int64_t seconds) {
  if (seconds % 86400 == 0) return std::to_string(seconds / 86400) + "d";
  if (seconds % 3600 == 0) return std::to_string(seconds / 3600) + "h";
  if (seconds % 60 == 0) return std::to_string(seconds / 60) + "m";
  return std::to_string(seconds) + "s";
}

bool element_like(NodeType t) {
  return t == NodeType::Element || t.index >= kCoreNodeTypeCount;
}

std::vector<NodeId> recalled_sources(const WorkingMemory& w) {
  std::set<NodeId> out;
  for (const auto& r : w.relations) {
    if (r.type == RelationType::Recounts) out.insert(r.src);
  }
  return {out.begin(), out.end()};
}

// Most recent event time of a concept inside w: OCCURRED_AT, else ACQUIRED_AT.
std::optional<TimeValue> latest_time(const WorkingMemory& w, NodeId c, RelationType rel) {
  std::optional<TimeValue> best;
  for (const auto& r : w.relations) {
    if (r.src != c || r.type != rel) continue;
    const auto& t = *w.nodes.at(r.dst).time;
    if (!best || t.end() > best->end()) best = t;
  }
  return best;
}

// First time by node id, OCCURRED_AT before ACQUIRED_AT.
std::optional<std::string> time_summary(const WorkingMemory& w, NodeId c) {
  for (RelationType rel : {RelationType::OccurredAt, RelationType::AcquiredAt}) {
    for (const auto& r : w.relations) {
      if (r.src == c && r.type == rel) return w.nodes.at(r.dst).name;
    }
  }
  return std::nullopt;
}

std::string with_modifiers(const std::vector<std::string>& heads,
                           const std::vector<std::string>& mods) {
  std::string out = join(heads, " and ");
  if (!mods.empty()) out += (out.empty() ? "(" : " (") + join(mods, ", ") + ")";
  return out;
}

Proposition realize(const WorkingMemory& w, NodeId c) {
  std::vector<std::string> subjects, actions, objects;
  std::vector<std::string> subject_mods, action_mods, object_mods, others;
  double degree = 0;
  for (const auto& r : w.relations) {
    if (r.src != c && r.dst != c) continue;
    degree += 1;
    if (r.src != c) continue;
    const Node& d = w.nodes.at(r.dst);
    if (!element_like(d.type)) continue;
    if (r.type == RelationType::HasSubject) subjects.push_back(d.name);
    else if (r.type == RelationType::HasAction) actions.push_back(d.name);
    else if (r.type == RelationType::HasObject) objects.push_back(d.name);
    else if (r.type == RelationType::ModifySubject) subject_mods.push_back(d.name);
    else if (r.type == RelationType::ModifyAction) action_mods.push_back(d.name);
    else if (r.type == RelationType::ModifyObject) object_mods.push_back(d.name);
    else others.push_back(d.name);
  }

  Proposition p;
  p.supporting_concepts = {c};
  p.salience = degree;
  std::string subject_part = with_modifiers(subjects, subject_mods);
  std::vector<std::string> parts;
  if (!actions.empty()) {
    if (!subject_part.empty()) parts.push_back(subject_part);
    parts.push_back(with_modifiers(actions, action_mods));
    std::string object_part = with_modifiers(objects, object_mods);
    if (!object_part.empty()) parts.push_back(object_part);
    p.text = join(parts, " ");
  } else {
    std::vector<std::string> rest;
    std::string object_part = with_modifiers(objects, object_mods);
    if (!object_part.empty()) rest.push_back(object_part);
    if (!action_mods.empty()) rest.push_back(with_modifiers({}, action_mods));
    rest.insert(rest.end(), others.begin(), others.end());
    if (subject_part.empty()) {
      p.text = join(rest, " ");
    } else {
      p.text = rest.empty() ? subject_part : subject_part + " — " + join(rest, " ");
    }
  }
  if (p.text.empty()) p.text = w.nodes.at(c).name;

  p.time_summary = time_summary(w, c);
  if (p.time_summary) p.text += " at " + *p.time_summary;
  for (const auto& r : w.relations) {
    if (r.dst == c && r.type == RelationType::Recounts) {
      p.source_names.push_back(w.nodes.at(r.src).name);
    }
  }
  std::sort(p.source_names.begin(), p.source_names.end());
  if (!p.source_names.empty()) p.text += " per " + join(p.source_names, ", ");
  return p;
}

}  // namespace

std::set<NodeId> source_attribution(const WorkingMemory& w, NodeId v) {
  const Node* n = w.find_node(v);
  if (!n) {
    throw Error(ErrorKind::not_recalled,
                "node " + std::to_string(v.value) + " is not in the working memory");
  }
  if (n->type != NodeType::Concept) {
    throw Error(ErrorKind::precondition,
                "node " + std::to_string(v.value) + " is not a Concept");
  }
  std::set<NodeId> out;
  for (const auto& r : w.relations) {
    if (r.dst == v && r.type == RelationType::Recounts) out.insert(r.src);
  }
  return out;
}

std::string_view to_string(Weighting weighting) {
  return weighting == Weighting::uniform ? "uniform" : "element-weight-sum";
}

Weighting parse_weighting(std::string_view text) {
  if (text == "uniform") return Weighting::uniform;
  if (text == "element-weight-sum") return Weighting::element_weight_sum;
  throw Error(ErrorKind::invalid_parameters,
              "unknown weighting '" + std::string(text) + "' (uniform | element-weight-sum)");
}

SourceDistribution source_distribution(const WorkingMemory& w, Weighting weighting) {
  SourceDistribution d;
  d.cue = w.cue;
  d.version = w.version;
  d.weighting = weighting;
  for (NodeId c : w.concepts()) {
    double mass = 1.0;
    if (weighting == Weighting::element_weight_sum) {
      mass = 0.0;
      for (const auto& r : w.relations) {
        if (r.src == c && element_like(w.nodes.at(r.dst).type)) mass += r.weight;
      }
    }
    for (NodeId s : source_attribution(w, c)) {
      d.names[s] = w.nodes.at(s).name;
      d.masses[s] += mass;
    }
  }
  double total = 0.0;
  for (const auto& [s, m] : d.masses) total += m;
  if (total > 0.0) {
    for (const auto& [s, m] : d.masses) d.probabilities[s] = m / total;
  }
  return d;
}

std::string format_distribution(const SourceDistribution& d) {
  std::ostringstream os;
  os << "source distribution at version " << d.version << " (" << to_string(d.weighting)
     << ") for cue: " << describe(d.cue) << '\n';
  if (d.masses.empty()) os << "no recalled sources\n";
  for (const auto& [s, m] : d.masses) {
    os << "  " << d.names.at(s) << " mass=" << format_number(m);
    if (auto it = d.probabilities.find(s); it != d.probabilities.end()) {
      os << " p=" << format_number(it->second);
    }
    os << '\n';
  }
  return os.str();
}

GovernancePredicate parse_predicate(std::string_view raw) {
  std::string_view text = trim(raw);
  auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') {
    bad_predicate(text, "expected kind(arg,...)");
  }
  std::string_view kind = trim(text.substr(0, open));
  std::vector<std::string_view> args;
  std::string_view inner = text.substr(open + 1, text.size() - open - 2);
  if (!trim(inner).empty()) {
    for (std::size_t pos = 0;;) {
      auto comma = inner.find(',', pos);
      args.push_back(trim(inner.substr(pos, comma - pos)));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
  }
  auto expect = [&](std::size_t n) {
    if (args.size() != n) {
      bad_predicate(text, "expected " + std::to_string(n) + " argument(s), got " +
                              std::to_string(args.size()));
    }
  };

  GovernancePredicate p;
  if (kind == "requires-source" || kind == "excludes-source") {
    expect(1);
    p.kind = kind == "requires-source" ? PredicateKind::requires_source
                                       : PredicateKind::excludes_source;
    try {
      p.source_name = canonical_name(args[0]);
    } catch (const Error& e) {
      bad_predicate(text, e.what());
    }
  } else if (kind == "max-event-age") {
    expect(2);
    p.kind = PredicateKind::max_event_age;
    p.max_age_seconds = parse_duration(text, args[0]);
    try {
      p.reference_time = parse_instant(args[1]);
    } catch (const Error& e) {
      bad_predicate(text, e.what());
    }
  } else if (kind == "min-provenance-count" || kind == "min-concepts") {
    expect(1);
    p.kind = kind == "min-concepts" ? PredicateKind::min_concepts
                                    : PredicateKind::min_provenance_count;
    p.count = parse_count(text, args[0]);
  } else {
    bad_predicate(text, "unknown predicate kind '" + std::string(kind) + "'");
  }
  return p;
}

std::string format_predicate(const GovernancePredicate& p) {
  switch (p.kind) {
    case PredicateKind::requires_source: return "requires-source(" + p.source_name + ")";
    case PredicateKind::excludes_source: return "excludes-source(" + p.source_name + ")";
    case PredicateKind::max_event_age:
      return "max-event-age(" + format_duration(p.max_age_seconds) + ", " +
             format_instant(p.reference_time) + ")";
    case PredicateKind::min_provenance_count:
      return "min-provenance-count(" + std::to_string(p.count) + ")";
    case PredicateKind::min_concepts: return "min-concepts(" + std::to_string(p.count) + ")";
  }
  return {};
}

bool evaluate(const GovernancePredicate& p, const WorkingMemory& w) {
  auto sources = recalled_sources(w);
  auto has_source = [&](const std::string& name) {
    return std::any_of(sources.begin(), sources.end(),
                       [&](NodeId s) { return w.nodes.at(s).name == name; });
  };
  switch (p.kind) {
    case PredicateKind::requires_source: return has_source(p.source_name);
    case PredicateKind::excludes_source: return !has_source(p.source_name);
    case PredicateKind::min_provenance_count: return sources.size() >= p.count;
    case PredicateKind::min_concepts: return w.concepts().size() >= p.count;
    case PredicateKind::max_event_age: {
      for (NodeId c : w.concepts()) {
        auto t = latest_time(w, c, RelationType::OccurredAt);
        if (!t) t = latest_time(w, c, RelationType::AcquiredAt);
        if (t && p.reference_time - t->end() > p.max_age_seconds) return false;
      }
      return true;
    }
  }
  return false;
}

std::vector<std::string> GovernanceSignature::satisfied() const {
  std::vector<std::string> out;
  for (const auto& o : outcomes) {
    if (o.satisfied) out.push_back(o.text);
  }
  return out;
}

bool GovernanceSignature::has_errors() const {
  return std::any_of(outcomes.begin(), outcomes.end(),
                     [](const auto& o) { return !o.error.empty(); });
}

GovernanceSignature governance_signature(const WorkingMemory& w,
                                         std::span<const GovernancePredicate> predicates) {
  GovernanceSignature sig;
  for (const auto& p : predicates) sig.outcomes.push_back({format_predicate(p), evaluate(p, w), {}});
  return sig;
}

GovernanceSignature governance_signature(const WorkingMemory& w,
                                         std::span<const std::string> predicate_lines) {
  GovernanceSignature sig;
  for (const auto& line : predicate_lines) {
    PredicateOutcome o;
    try {
      auto p = parse_predicate(line);
      o.text = format_predicate(p);
      o.satisfied = evaluate(p, w);
    } catch (const Error& e) {
      o.text = std::string(trim(line));
      o.error = e.what();
    }
    sig.outcomes.push_back(std::move(o));
  }
  return sig;
}

std::vector<std::string> read_predicate_lines(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.emplace_back(t);
  }
  return out;
}

std::string format_signature(const GovernanceSignature& s) {
  std::ostringstream os;
  std::size_t satisfied = 0;
  for (const auto& o : s.outcomes) {
    if (!o.error.empty()) {
      os << "error     " << o.text << ": " << o.error << '\n';
    } else {
      os << (o.satisfied ? "satisfied " : "violated  ") << o.text << '\n';
      satisfied += o.satisfied;
    }
  }
  os << "signature: " << satisfied << " of " << s.outcomes.size() << " predicate(s) satisfied\n";
  return os.str();
}

std::vector<Proposition> generate_propositions(const WorkingMemory& w, const EmbeddingSpace* z,
                                               std::size_t limit) {
  if (limit < 1) throw Error(ErrorKind::invalid_parameters, "limit must be at least 1");

  std::vector<double> centroid;
  if (z) {
    std::size_t used = 0;
    for (const auto& [id, n] : w.nodes) {
      if (!element_like(n.type)) continue;
      if (!std::binary_search(w.cue.elements.begin(), w.cue.elements.end(), n.name)) continue;
      const auto* v = z->find(id);
      if (!v) continue;
      if (centroid.empty()) centroid.assign(v->size(), 0.0);
      for (std::size_t i = 0; i < v->size(); ++i) centroid[i] += (*v)[i];
      ++used;
    }
    for (double& x : centroid) x /= static_cast<double>(used);
  }
  auto distance = [&](NodeId c) {
    const auto* v = z ? z->find(c) : nullptr;
    if (!v || centroid.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < v->size(); ++i) sum += ((*v)[i] - centroid[i]) * ((*v)[i] - centroid[i]);
    return std::sqrt(sum);
  };

  struct Ranked {
    Proposition p;
    double distance;
    NodeId id;
  };
  std::vector<Ranked> ranked;
  for (NodeId c : w.concepts()) ranked.push_back({realize(w, c), distance(c), c});
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.p.salience != b.p.salience) return a.p.salience > b.p.salience;
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.id > b.id;
  });
  std::vector<Proposition> out;
  for (std::size_t i = 0; i < ranked.size() && i < limit; ++i) out.push_back(std::move(ranked[i].p));
  return out;
}

std::string format_propositions(const std::vector<Proposition>& props) {
  std::ostringstream os;
  for (const auto& p : props) {
    os << p.text << '\n';
    std::vector<std::string> ids;
    for (NodeId c : p.supporting_concepts) ids.push_back(std::to_string(c.value));
    os << "  supports: " << join(ids, ", ") << "; sources: " << join(p.source_names, ", ")
       << '\n';
  }
  return os.str();
}

}  // namespace dgmm
