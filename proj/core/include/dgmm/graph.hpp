#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dgmm/hash.hpp"
#include "dgmm/schema.hpp"
#include "dgmm/time_value.hpp"

namespace dgmm {

// Opaque node identity. Allocated in strictly increasing order and never
// reused, so id order is ingestion order.
struct NodeId {
  std::uint64_t value = 0;

  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

// Logical memory version t: one tick per committed batch.
using Version = std::uint64_t;

struct Node {
  NodeId id;
  NodeType type;
  std::string name;                // canonical key, or display label for Concepts
  std::optional<TimeValue> time;   // Time nodes only

  friend bool operator==(const Node&, const Node&) = default;
};

struct RelationKey {
  NodeId src;
  NodeId dst;
  RelationType type;

  friend constexpr auto operator<=>(const RelationKey&, const RelationKey&) = default;
};

struct Relation {
  NodeId src;
  NodeId dst;
  RelationType type;
  double weight = 1.0;

  RelationKey key() const noexcept { return {src, dst, type}; }
  friend bool operator==(const Relation&, const Relation&) = default;
};

struct WeightUpdate {
  RelationKey key;
  double weight = 1.0;

  friend bool operator==(const WeightUpdate&, const WeightUpdate&) = default;
};

enum class BatchKind { ingest, consolidate };

std::string_view to_string(BatchKind kind);

// Shortest round-trip decimal rendering; used by every text format.
std::string format_number(double value);

// One committed mutation: an ingestion (additions only) or one consolidation
// step. A batch is the unit of atomicity and one version tick; the log holds
// one record per batch. Application order: create nodes, remove relations, create
// relations, update weights, remove nodes, record tombstones.
struct Batch {
  BatchKind kind = BatchKind::ingest;
  Version version = 0;
  std::vector<Node> created_nodes;
  std::vector<RelationKey> removed_relations;
  std::vector<Relation> created_relations;
  std::vector<WeightUpdate> weight_updates;
  std::vector<NodeId> removed_nodes;
  std::vector<std::pair<NodeId, NodeId>> tombstones;  // absorbed -> survivor

  friend bool operator==(const Batch&, const Batch&) = default;
};

// Receives each batch before it is applied; a throwing sink aborts the commit
// with the graph unchanged. Used by the persistent store to write-ahead.
class BatchSink {
 public:
  virtual ~BatchSink() = default;
  virtual void append(const Batch& batch) = 0;
};

// Trims and collapses whitespace; keyed names are also ASCII case-folded.
// Throws Error(invalid_name) when nothing is left.
std::string canonical_name(std::string_view raw);
std::string normalize_label(std::string_view raw);

}  // namespace dgmm

template <>
struct std::hash<dgmm::NodeId> {
  std::size_t operator()(dgmm::NodeId id) const noexcept {
    return dgmm::mix64(id.value);
  }
};

template <>
struct std::hash<dgmm::RelationKey> {
  std::size_t operator()(const dgmm::RelationKey& k) const noexcept {
    return dgmm::hash_combine(dgmm::hash_combine(dgmm::mix64(k.src.value), k.dst.value),
                              k.type.index);
  }
};

namespace dgmm {

// The memory state M_t = (V_t, E_t, S) plus the batch history that produced
// it. Mutated only through commit(); everything else is read-only.
class MemoryGraph {
 public:
  explicit MemoryGraph(std::shared_ptr<const Schema> schema = Schema::default_schema());

  // Copies share nothing mutable and never inherit the sink.
  MemoryGraph(const MemoryGraph& other);
  MemoryGraph& operator=(const MemoryGraph& other);
  MemoryGraph(MemoryGraph&&) noexcept = default;
  MemoryGraph& operator=(MemoryGraph&&) noexcept = default;

  const Schema& schema() const noexcept { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const noexcept { return schema_; }

  Version version() const noexcept { return version_; }
  NodeId next_node_id() const noexcept { return NodeId{next_id_}; }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t relation_count() const noexcept { return relations_.size(); }

  const std::map<NodeId, Node>& nodes() const noexcept { return nodes_; }
  const Node* find_node(NodeId id) const;
  // Throws Error(out_of_range) for absent ids.
  const Node& node(NodeId id) const;

  // Ids of live nodes of one type, ascending.
  const std::set<NodeId>& nodes_of_type(NodeType type) const;

  std::optional<NodeId> find_by_name(NodeType type, std::string_view canonical) const;

  bool has_relation(const RelationKey& key) const { return relations_.contains(key); }
  std::optional<double> weight(const RelationKey& key) const;
  const std::unordered_map<RelationKey, double>& relations() const noexcept {
    return relations_;
  }
  // All relations ordered by (src, dst, type).
  std::vector<Relation> sorted_relations() const;

  // Relations leaving / entering a node, ordered by key.
  std::span<const RelationKey> out_relations(NodeId id) const;
  std::span<const RelationKey> in_relations(NodeId id) const;

  // Absorbed concept -> survivor, as recorded by consolidation.
  const std::map<NodeId, NodeId>& tombstones() const noexcept { return tombstones_; }
  // Follows tombstones until reaching a live id.
  NodeId resolve(NodeId id) const;

  // Validates the batch against the current state, hands it to the sink,
  // then applies it. Throws with the graph unchanged on any failure.
  void commit(const Batch& batch);

  const std::vector<Batch>& history() const noexcept { return history_; }

  // Read-only reconstruction of M_t from the batch history.
  // Throws Error(out_of_range) when t > version().
  MemoryGraph snapshot(Version t) const;

  static MemoryGraph replay(std::shared_ptr<const Schema> schema,
                            std::span<const Batch> batches);

  void attach_sink(BatchSink* sink) noexcept { sink_ = sink; }

  // Logical content equality. History and sink are ignored.
  friend bool content_equal(const MemoryGraph& a, const MemoryGraph& b);

 private:
  friend MemoryGraph restore_state(std::shared_ptr<const Schema>, std::string_view,
                                   std::vector<Batch>);

  void validate(const Batch& batch) const;
  void apply(const Batch& batch);
  void apply_history_from(Version from);

  std::shared_ptr<const Schema> schema_;
  Version version_ = 0;
  std::uint64_t next_id_ = 1;
  std::map<NodeId, Node> nodes_;
  std::vector<std::set<NodeId>> by_type_;
  std::map<std::pair<std::uint16_t, std::string>, NodeId, std::less<>> name_index_;
  std::unordered_map<RelationKey, double> relations_;
  std::unordered_map<NodeId, std::vector<RelationKey>> out_;
  std::unordered_map<NodeId, std::vector<RelationKey>> in_;
  std::map<NodeId, NodeId> tombstones_;
  std::vector<Batch> history_;
  BatchSink* sink_ = nullptr;
};

// Canonical line-oriented serialization of the logical content, sorted.
// Stable across runs and platforms.
std::string canonical_text(const MemoryGraph& graph);
std::uint64_t content_digest(const MemoryGraph& graph);

// Rebuilds a graph from canonical_text() output, then applies any history
// entries past the serialized version. `history` must cover at least that
// version.
MemoryGraph restore_state(std::shared_ptr<const Schema> schema, std::string_view text,
                          std::vector<Batch> history);

// Stages one batch against a graph. Name-keyed nodes resolve against both
// the graph and the pending batch. Nothing touches the graph until commit.
class BatchBuilder {
 public:
  BatchBuilder(const MemoryGraph& graph, BatchKind kind);

  // At most one node per canonical name per keyed type.
  NodeId resolve_or_create_element(std::string_view name);
  NodeId resolve_or_create_time(const TimeValue& value);
  NodeId resolve_or_create(NodeType type, std::string_view name);
  // Concept nodes are instance-specific: always a fresh id.
  NodeId create_concept(std::string_view label);

  // Idempotent for an identical triple already staged or stored. Throws
  // Error(schema_violation) when the triple is inadmissible.
  bool add_relation(NodeId src, NodeId dst, RelationType type, double weight = 1.0);
  void remove_relation(const RelationKey& key);
  void set_weight(const RelationKey& key, double weight);
  void remove_node(NodeId id);
  void tombstone(NodeId absorbed, NodeId survivor);

  // Node as staged or as stored.
  const Node& node(NodeId id) const;
  bool has_relation(const RelationKey& key) const;

  const Batch& staged() const noexcept { return batch_; }
  Batch finish() &&;

 private:
  const MemoryGraph& graph_;
  Batch batch_;
  std::uint64_t next_id_;
  std::map<NodeId, std::size_t> pending_nodes_;
  std::map<std::pair<std::uint16_t, std::string>, NodeId, std::less<>> pending_names_;
  std::set<RelationKey> pending_relations_;
  std::set<RelationKey> removed_;
};

}  // namespace dgmm
