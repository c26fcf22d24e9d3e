#include "dgmm/graph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "dgmm/error.hpp"

namespace dgmm {
namespace {

std::string collapse_whitespace(std::string_view raw, bool fold_case) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(fold_case ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
  }
  return out;
}

void insert_sorted(std::vector<RelationKey>& v, const RelationKey& key) {
  v.insert(std::lower_bound(v.begin(), v.end(), key), key);
}

void erase_sorted(std::vector<RelationKey>& v, const RelationKey& key) {
  auto it = std::lower_bound(v.begin(), v.end(), key);
  if (it != v.end() && *it == key) v.erase(it);
}

bool valid_weight(double w) { return std::isfinite(w) && w > 0.0; }

[[noreturn]] void reject(const std::string& message) {
  throw Error(ErrorKind::schema_violation, message);
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string_view to_string(BatchKind kind) {
  return kind == BatchKind::ingest ? "ING" : "CSL";
}

std::string canonical_name(std::string_view raw) {
  auto out = collapse_whitespace(raw, true);
  if (out.empty()) {
    throw Error(ErrorKind::invalid_name, "name is empty after canonicalization");
  }
  return out;
}

std::string normalize_label(std::string_view raw) {
  auto out = collapse_whitespace(raw, false);
  if (out.empty()) throw Error(ErrorKind::invalid_name, "label is empty");
  return out;
}

// ---------------------------------------------------------------------------
// MemoryGraph

MemoryGraph::MemoryGraph(std::shared_ptr<const Schema> schema)
    : schema_(std::move(schema)), by_type_(schema_->node_type_count()) {}

MemoryGraph::MemoryGraph(const MemoryGraph& other)
    : schema_(other.schema_),
      version_(other.version_),
      next_id_(other.next_id_),
      nodes_(other.nodes_),
      by_type_(other.by_type_),
      name_index_(other.name_index_),
      relations_(other.relations_),
      out_(other.out_),
      in_(other.in_),
      tombstones_(other.tombstones_),
      history_(other.history_),
      sink_(nullptr) {}

MemoryGraph& MemoryGraph::operator=(const MemoryGraph& other) {
  if (this != &other) {
    MemoryGraph copy(other);
    *this = std::move(copy);
  }
  return *this;
}

const Node* MemoryGraph::find_node(NodeId id) const {
  auto it = nodes_.find(id);
  return it == nodes_.end() ? nullptr : &it->second;
}

const Node& MemoryGraph::node(NodeId id) const {
  if (const Node* n = find_node(id)) return *n;
  throw Error(ErrorKind::out_of_range, "no node with id " + std::to_string(id.value));
}

const std::set<NodeId>& MemoryGraph::nodes_of_type(NodeType type) const {
  if (type.index >= by_type_.size()) {
    throw Error(ErrorKind::schema_violation,
                "unknown node type tag #" + std::to_string(type.index));
  }
  return by_type_[type.index];
}

std::optional<NodeId> MemoryGraph::find_by_name(NodeType type,
                                                std::string_view canonical) const {
  auto it = name_index_.find(std::pair{type.index, std::string(canonical)});
  if (it == name_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> MemoryGraph::weight(const RelationKey& key) const {
  auto it = relations_.find(key);
  if (it == relations_.end()) return std::nullopt;
  return it->second;
}

std::vector<Relation> MemoryGraph::sorted_relations() const {
  std::vector<Relation> out;
  out.reserve(relations_.size());
  for (const auto& [k, w] : relations_) out.push_back({k.src, k.dst, k.type, w});
  std::sort(out.begin(), out.end(),
            [](const Relation& a, const Relation& b) { return a.key() < b.key(); });
  return out;
}

std::span<const RelationKey> MemoryGraph::out_relations(NodeId id) const {
  auto it = out_.find(id);
  if (it == out_.end()) return {};
  return it->second;
}

std::span<const RelationKey> MemoryGraph::in_relations(NodeId id) const {
  auto it = in_.find(id);
  if (it == in_.end()) return {};
  return it->second;
}

NodeId MemoryGraph::resolve(NodeId id) const {
  for (auto it = tombstones_.find(id); it != tombstones_.end();
       it = tombstones_.find(id)) {
    id = it->second;
  }
  return id;
}

void MemoryGraph::validate(const Batch& batch) const {
  if (batch.version != version_ + 1) {
    throw Error(ErrorKind::precondition,
                "batch version " + std::to_string(batch.version) +
                    " does not follow current version " + std::to_string(version_));
  }
  if (batch.kind == BatchKind::ingest &&
      (!batch.removed_relations.empty() || !batch.weight_updates.empty() ||
       !batch.removed_nodes.empty() || !batch.tombstones.empty())) {
    throw Error(ErrorKind::precondition,
                "ingestion batches may only add nodes and relations");
  }

  std::map<NodeId, NodeType> created;
  std::set<std::pair<std::uint16_t, std::string>> created_names;
  std::uint64_t expect_min = next_id_;
  for (const auto& n : batch.created_nodes) {
    if (n.id.value < expect_min) {
      reject("node id " + std::to_string(n.id.value) + " is not freshly allocated");
    }
    expect_min = n.id.value + 1;
    if (!schema_->contains(n.type)) {
      reject("node " + std::to_string(n.id.value) + " has unknown type tag #" +
             std::to_string(n.type.index));
    }
    if (n.name.empty()) reject("node " + std::to_string(n.id.value) + " has empty name");
    if (n.type == NodeType::Time) {
      if (!n.time || n.time->canonical() != n.name) {
        reject("time node " + std::to_string(n.id.value) + " lacks a canonical time value");
      }
    } else if (n.time) {
      reject("node " + std::to_string(n.id.value) + " carries a time value but is not a Time node");
    }
    if (Schema::name_keyed(n.type)) {
      auto key = std::pair{n.type.index, n.name};
      if (name_index_.contains(key) || !created_names.insert(key).second) {
        reject(std::string(schema_->name(n.type)) + " '" + n.name + "' already exists");
      }
    }
    created.emplace(n.id, n.type);
  }

  std::set<NodeId> removed_nodes(batch.removed_nodes.begin(), batch.removed_nodes.end());
  auto type_of = [&](NodeId id) -> std::optional<NodeType> {
    if (auto it = created.find(id); it != created.end()) return it->second;
    if (const Node* n = find_node(id)) return n->type;
    return std::nullopt;
  };

  std::set<RelationKey> removed;
  for (const auto& k : batch.removed_relations) {
    if (!relations_.contains(k) || !removed.insert(k).second) {
      throw Error(ErrorKind::precondition, "removed relation does not exist");
    }
  }
  std::set<RelationKey> added;
  for (const auto& r : batch.created_relations) {
    auto st = type_of(r.src);
    auto dt = type_of(r.dst);
    if (!st || !dt) reject("relation endpoint does not exist");
    if (removed_nodes.contains(r.src) || removed_nodes.contains(r.dst)) {
      reject("relation attaches to a node removed in the same batch");
    }
    if (!schema_->admissible(*st, *dt, r.type)) {
      reject("inadmissible relation " + std::string(schema_->name(*st)) + " -" +
             std::string(schema_->name(r.type)) + "-> " + std::string(schema_->name(*dt)));
    }
    if (!valid_weight(r.weight)) reject("relation weight must be positive and finite");
    auto k = r.key();
    if ((relations_.contains(k) && !removed.contains(k)) || !added.insert(k).second) {
      reject("relation triple already exists");
    }
  }
  for (const auto& u : batch.weight_updates) {
    bool exists = (relations_.contains(u.key) && !removed.contains(u.key)) ||
                  added.contains(u.key);
    if (!exists) throw Error(ErrorKind::precondition, "weight update targets a missing relation");
    if (!valid_weight(u.weight)) reject("relation weight must be positive and finite");
  }
  for (NodeId id : batch.removed_nodes) {
    if (!find_node(id)) throw Error(ErrorKind::precondition, "removed node does not exist");
    for (const auto& k : out_relations(id)) {
      if (!removed.contains(k)) throw Error(ErrorKind::precondition, "removed node still has relations");
    }
    for (const auto& k : in_relations(id)) {
      if (!removed.contains(k)) throw Error(ErrorKind::precondition, "removed node still has relations");
    }
  }
  for (const auto& [absorbed, survivor] : batch.tombstones) {
    if (!removed_nodes.contains(absorbed) || removed_nodes.contains(survivor) ||
        !type_of(survivor)) {
      throw Error(ErrorKind::precondition, "tombstone must map a removed node to a live one");
    }
  }
}

void MemoryGraph::apply(const Batch& batch) {
  for (const auto& n : batch.created_nodes) {
    next_id_ = std::max(next_id_, n.id.value + 1);
    by_type_[n.type.index].insert(n.id);
    if (Schema::name_keyed(n.type)) name_index_.emplace(std::pair{n.type.index, n.name}, n.id);
    nodes_.emplace(n.id, n);
  }
  for (const auto& k : batch.removed_relations) {
    relations_.erase(k);
    erase_sorted(out_[k.src], k);
    erase_sorted(in_[k.dst], k);
  }
  for (const auto& r : batch.created_relations) {
    auto k = r.key();
    relations_.emplace(k, r.weight);
    insert_sorted(out_[k.src], k);
    insert_sorted(in_[k.dst], k);
  }
  for (const auto& u : batch.weight_updates) relations_[u.key] = u.weight;
  for (NodeId id : batch.removed_nodes) {
    auto it = nodes_.find(id);
    const Node& n = it->second;
    by_type_[n.type.index].erase(id);
    if (Schema::name_keyed(n.type)) name_index_.erase(std::pair{n.type.index, n.name});
    nodes_.erase(it);
    out_.erase(id);
    in_.erase(id);
  }
  for (const auto& [absorbed, survivor] : batch.tombstones) tombstones_[absorbed] = survivor;
  version_ = batch.version;
}

void MemoryGraph::commit(const Batch& batch) {
  validate(batch);
  if (sink_) sink_->append(batch);
  apply(batch);
  history_.push_back(batch);
}

MemoryGraph MemoryGraph::snapshot(Version t) const {
  if (t > version_) {
    throw Error(ErrorKind::out_of_range,
                "version " + std::to_string(t) + " is beyond current version " +
                    std::to_string(version_));
  }
  if (t == version_) return *this;
  return replay(schema_, std::span(history_).first(t));
}

MemoryGraph MemoryGraph::replay(std::shared_ptr<const Schema> schema,
                                std::span<const Batch> batches) {
  MemoryGraph g(std::move(schema));
  g.history_.reserve(batches.size());
  for (const auto& b : batches) g.commit(b);
  return g;
}

void MemoryGraph::apply_history_from(Version from) {
  for (Version v = from; v < history_.size(); ++v) {
    validate(history_[v]);
    apply(history_[v]);
  }
}

bool content_equal(const MemoryGraph& a, const MemoryGraph& b) {
  return a.version_ == b.version_ && a.nodes_ == b.nodes_ &&
         a.relations_ == b.relations_ && a.tombstones_ == b.tombstones_;
}

// ---------------------------------------------------------------------------
// Canonical serialization

std::string canonical_text(const MemoryGraph& graph) {
  const Schema& schema = graph.schema();
  std::ostringstream os;
  os << "version " << graph.version() << '\n';
  os << "next_id " << graph.next_node_id().value << '\n';
  for (const auto& [id, n] : graph.nodes()) {
    os << "node " << id.value << ' ' << schema.name(n.type) << ' ' << n.name << '\n';
  }
  for (const auto& [absorbed, survivor] : graph.tombstones()) {
    os << "tomb " << absorbed.value << ' ' << survivor.value << '\n';
  }
  for (const auto& r : graph.sorted_relations()) {
    os << "rel " << r.src.value << ' ' << r.dst.value << ' ' << schema.name(r.type) << ' '
       << format_number(r.weight) << '\n';
  }
  return os.str();
}

std::uint64_t content_digest(const MemoryGraph& graph) {
  return fnv1a(canonical_text(graph));
}

MemoryGraph restore_state(std::shared_ptr<const Schema> schema, std::string_view text,
                          std::vector<Batch> history) {
  MemoryGraph g(std::move(schema));
  const Schema& s = *g.schema_;
  auto bad = [](const std::string& why) -> void {
    throw Error(ErrorKind::corruption, "snapshot: " + why);
  };
  auto read_u64 = [&](std::string_view word) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), v);
    if (ec != std::errc{} || ptr != word.data() + word.size()) bad("bad integer");
    return v;
  };
  auto next_word = [](std::string_view& rest) {
    auto sp = rest.find(' ');
    auto w = rest.substr(0, sp);
    rest = sp == std::string_view::npos ? std::string_view{} : rest.substr(sp + 1);
    return w;
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view rest = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (rest.empty()) continue;
    auto tag = next_word(rest);
    if (tag == "version") {
      g.version_ = read_u64(rest);
    } else if (tag == "next_id") {
      g.next_id_ = read_u64(rest);
    } else if (tag == "node") {
      NodeId id{read_u64(next_word(rest))};
      NodeType type = s.node_type(next_word(rest));
      Node n{id, type, std::string(rest), std::nullopt};
      if (type == NodeType::Time) n.time = TimeValue::parse(rest);
      g.by_type_[type.index].insert(id);
      if (Schema::name_keyed(type)) g.name_index_.emplace(std::pair{type.index, n.name}, id);
      g.nodes_.emplace(id, std::move(n));
    } else if (tag == "tomb") {
      NodeId a{read_u64(next_word(rest))};
      NodeId b{read_u64(rest)};
      g.tombstones_[a] = b;
    } else if (tag == "rel") {
      NodeId src{read_u64(next_word(rest))};
      NodeId dst{read_u64(next_word(rest))};
      RelationType type = s.relation_type(next_word(rest));
      double w = 0;
      auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), w);
      if (ec != std::errc{}) bad("bad weight");
      RelationKey k{src, dst, type};
      g.relations_.emplace(k, w);
      insert_sorted(g.out_[src], k);
      insert_sorted(g.in_[dst], k);
    } else {
      bad("unknown line tag '" + std::string(tag) + "'");
    }
  }
  if (history.size() < g.version_) bad("history is shorter than the snapshot version");
  Version from = g.version_;
  g.history_ = std::move(history);
  g.apply_history_from(from);
  return g;
}

// ---------------------------------------------------------------------------
// BatchBuilder

BatchBuilder::BatchBuilder(const MemoryGraph& graph, BatchKind kind)
    : graph_(graph), next_id_(graph.next_node_id().value) {
  batch_.kind = kind;
  batch_.version = graph.version() + 1;
}

NodeId BatchBuilder::resolve_or_create(NodeType type, std::string_view name) {
  if (!Schema::name_keyed(type)) {
    throw Error(ErrorKind::precondition, "Concept nodes are not name-keyed");
  }
  if (type == NodeType::Time) return resolve_or_create_time(TimeValue::parse(name));
  auto key = canonical_name(name);
  if (auto id = graph_.find_by_name(type, key)) return *id;
  auto pk = std::pair{type.index, key};
  if (auto it = pending_names_.find(pk); it != pending_names_.end()) return it->second;
  NodeId id{next_id_++};
  pending_nodes_.emplace(id, batch_.created_nodes.size());
  batch_.created_nodes.push_back({id, type, key, std::nullopt});
  pending_names_.emplace(std::move(pk), id);
  return id;
}

NodeId BatchBuilder::resolve_or_create_element(std::string_view name) {
  return resolve_or_create(NodeType::Element, name);
}

NodeId BatchBuilder::resolve_or_create_time(const TimeValue& value) {
  auto key = value.canonical();
  if (auto id = graph_.find_by_name(NodeType::Time, key)) return *id;
  auto pk = std::pair{NodeType::Time.index, key};
  if (auto it = pending_names_.find(pk); it != pending_names_.end()) return it->second;
  NodeId id{next_id_++};
  pending_nodes_.emplace(id, batch_.created_nodes.size());
  batch_.created_nodes.push_back({id, NodeType::Time, key, value});
  pending_names_.emplace(std::move(pk), id);
  return id;
}

NodeId BatchBuilder::create_concept(std::string_view label) {
  NodeId id{next_id_++};
  pending_nodes_.emplace(id, batch_.created_nodes.size());
  batch_.created_nodes.push_back({id, NodeType::Concept, normalize_label(label), std::nullopt});
  return id;
}

const Node& BatchBuilder::node(NodeId id) const {
  if (auto it = pending_nodes_.find(id); it != pending_nodes_.end()) {
    return batch_.created_nodes[it->second];
  }
  return graph_.node(id);
}

bool BatchBuilder::has_relation(const RelationKey& key) const {
  if (pending_relations_.contains(key)) return true;
  return graph_.has_relation(key) && !removed_.contains(key);
}

bool BatchBuilder::add_relation(NodeId src, NodeId dst, RelationType type, double weight) {
  const Schema& s = graph_.schema();
  const Node& a = node(src);
  const Node& b = node(dst);
  if (!s.admissible(a.type, b.type, type)) {
    reject("inadmissible relation " + std::string(s.name(a.type)) + " -" +
           std::string(s.name(type)) + "-> " + std::string(s.name(b.type)));
  }
  RelationKey key{src, dst, type};
  if (has_relation(key)) return false;
  pending_relations_.insert(key);
  batch_.created_relations.push_back({src, dst, type, weight});
  return true;
}

void BatchBuilder::remove_relation(const RelationKey& key) {
  if (!graph_.has_relation(key) || !removed_.insert(key).second) {
    throw Error(ErrorKind::precondition, "cannot remove a relation that is not stored");
  }
  batch_.removed_relations.push_back(key);
}

void BatchBuilder::set_weight(const RelationKey& key, double weight) {
  for (auto& r : batch_.created_relations) {
    if (r.key() == key) {
      r.weight = weight;
      return;
    }
  }
  for (auto& u : batch_.weight_updates) {
    if (u.key == key) {
      u.weight = weight;
      return;
    }
  }
  batch_.weight_updates.push_back({key, weight});
}

void BatchBuilder::remove_node(NodeId id) { batch_.removed_nodes.push_back(id); }

void BatchBuilder::tombstone(NodeId absorbed, NodeId survivor) {
  batch_.tombstones.emplace_back(absorbed, survivor);
}

Batch BatchBuilder::finish() && { return std::move(batch_); }

}  // namespace dgmm
