#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace dgmm {

// Index into a schema's node-type vocabulary. The five core tags occupy fixed
// indices in every schema; extension dimensions follow in registration order.
struct NodeType {
  std::uint16_t index = 0;

  static const NodeType Concept;
  static const NodeType Element;
  static const NodeType Time;
  static const NodeType Interaction;
  static const NodeType Source;

  friend constexpr auto operator<=>(NodeType, NodeType) = default;
};

inline constexpr NodeType NodeType::Concept{0};
inline constexpr NodeType NodeType::Element{1};
inline constexpr NodeType NodeType::Time{2};
inline constexpr NodeType NodeType::Interaction{3};
inline constexpr NodeType NodeType::Source{4};

inline constexpr std::uint16_t kCoreNodeTypeCount = 5;

struct RelationType {
  std::uint16_t index = 0;

  static const RelationType HasSubject;
  static const RelationType HasAction;
  static const RelationType HasObject;
  static const RelationType ModifySubject;
  static const RelationType ModifyAction;
  static const RelationType ModifyObject;
  static const RelationType OccurredAt;
  static const RelationType AcquiredAt;
  static const RelationType PartOf;
  static const RelationType Recounts;

  friend constexpr auto operator<=>(RelationType, RelationType) = default;
};

inline constexpr RelationType RelationType::HasSubject{0};
inline constexpr RelationType RelationType::HasAction{1};
inline constexpr RelationType RelationType::HasObject{2};
inline constexpr RelationType RelationType::ModifySubject{3};
inline constexpr RelationType RelationType::ModifyAction{4};
inline constexpr RelationType RelationType::ModifyObject{5};
inline constexpr RelationType RelationType::OccurredAt{6};
inline constexpr RelationType RelationType::AcquiredAt{7};
inline constexpr RelationType RelationType::PartOf{8};
inline constexpr RelationType RelationType::Recounts{9};

inline constexpr std::uint16_t kCoreRelationTypeCount = 10;

struct AdmissibleTriple {
  NodeType src;
  RelationType rel;
  NodeType dst;

  friend auto operator<=>(const AdmissibleTriple&, const AdmissibleTriple&) = default;
};

// The fixed relational grammar: closed node-type and relation-type
// vocabularies and the map (src type, dst type) -> permitted relation types.
// Immutable; obtain one from SchemaBuilder::freeze() or Schema::parse().
class Schema {
 public:
  static std::shared_ptr<const Schema> default_schema();

  std::size_t node_type_count() const noexcept { return node_names_.size(); }
  std::size_t relation_type_count() const noexcept { return relation_names_.size(); }

  // Throw Error(schema_violation) for tags outside the vocabulary.
  std::string_view name(NodeType type) const;
  std::string_view name(RelationType rel) const;
  NodeType node_type(std::string_view name) const;
  RelationType relation_type(std::string_view name) const;

  bool contains(NodeType type) const noexcept { return type.index < node_names_.size(); }
  bool contains(RelationType rel) const noexcept {
    return rel.index < relation_names_.size();
  }

  // True iff rel is permitted between the ordered type pair. Throws
  // Error(schema_violation) naming any unknown tag.
  bool admissible(NodeType src, NodeType dst, RelationType rel) const;

  // Relations permitted from src to dst; empty for undeclared pairs.
  std::vector<RelationType> permitted(NodeType src, NodeType dst) const;

  // All cells of the admissibility map in (src, rel, dst) order.
  const std::vector<AdmissibleTriple>& triples() const noexcept { return triples_; }

  // Every admissibility cell that permits rel.
  std::vector<AdmissibleTriple> cells_for(RelationType rel) const;

  // Node types other than Concept carry a canonical name that is unique per
  // type within a store.
  static bool name_keyed(NodeType type) noexcept { return type != NodeType::Concept; }

  // Versioned text document, one declaration per line:
  //   SCHEMA 1
  //   NODE_TYPE <name>
  //   RELATION_TYPE <name>
  //   ADMIT <src_type> <rel> <dst_type>
  std::string serialize() const;
  static std::shared_ptr<const Schema> parse(std::string_view document);

  friend bool operator==(const Schema& a, const Schema& b) {
    return a.node_names_ == b.node_names_ && a.relation_names_ == b.relation_names_ &&
           a.triples_ == b.triples_;
  }

 private:
  friend class SchemaBuilder;
  Schema() = default;

  std::vector<std::string> node_names_;
  std::vector<std::string> relation_names_;
  std::vector<AdmissibleTriple> triples_;  // sorted
};

// Registers extension dimensions before a store is created. Once frozen the
// builder rejects every further call.
class SchemaBuilder {
 public:
  // Starts from the core vocabulary and the default admissibility map.
  SchemaBuilder();

  NodeType add_node_type(std::string_view name);
  RelationType add_relation_type(std::string_view name);
  SchemaBuilder& admit(NodeType src, RelationType rel, NodeType dst);

  // Throws Error(schema_violation) if some relation type has no admissible
  // cell, or if called twice.
  std::shared_ptr<const Schema> freeze();

  bool frozen() const noexcept { return frozen_; }

 private:
  friend class Schema;
  struct Bare {};
  explicit SchemaBuilder(Bare);
  void check_open() const;

  Schema draft_;
  bool frozen_ = false;
};

}  // namespace dgmm

template <>
struct std::hash<dgmm::NodeType> {
  std::size_t operator()(dgmm::NodeType t) const noexcept { return t.index; }
};

template <>
struct std::hash<dgmm::RelationType> {
  std::size_t operator()(dgmm::RelationType t) const noexcept { return t.index; }
};
