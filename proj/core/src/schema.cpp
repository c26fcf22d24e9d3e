#include "dgmm/schema.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "dgmm/error.hpp"

namespace dgmm {
namespace {

constexpr std::string_view kCoreNodeNames[] = {"Concept", "Element", "Time",
                                               "Interaction", "Source"};

constexpr std::string_view kCoreRelationNames[] = {
    "HAS_SUBJECT",   "HAS_ACTION",    "HAS_OBJECT",  "MODIFY_SUBJECT",
    "MODIFY_ACTION", "MODIFY_OBJECT", "OCCURRED_AT", "ACQUIRED_AT",
    "PART_OF",       "RECOUNTS"};

bool valid_tag(std::string_view name) {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-';
  });
}

[[noreturn]] void violation(const std::string& message) {
  throw Error(ErrorKind::schema_violation, message);
}

std::vector<std::string_view> split_words(std::string_view line) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) words.push_back(line.substr(i, j - i));
    i = j;
  }
  return words;
}

}  // namespace

std::shared_ptr<const Schema> Schema::default_schema() {
  static const std::shared_ptr<const Schema> instance = SchemaBuilder{}.freeze();
  return instance;
}

std::string_view Schema::name(NodeType type) const {
  if (!contains(type)) {
    violation("unknown node type tag #" + std::to_string(type.index));
  }
  return node_names_[type.index];
}

std::string_view Schema::name(RelationType rel) const {
  if (!contains(rel)) {
    violation("unknown relation type tag #" + std::to_string(rel.index));
  }
  return relation_names_[rel.index];
}

NodeType Schema::node_type(std::string_view name) const {
  auto it = std::find(node_names_.begin(), node_names_.end(), name);
  if (it == node_names_.end()) violation("unknown node type '" + std::string(name) + "'");
  return NodeType{static_cast<std::uint16_t>(it - node_names_.begin())};
}

RelationType Schema::relation_type(std::string_view name) const {
  auto it = std::find(relation_names_.begin(), relation_names_.end(), name);
  if (it == relation_names_.end()) {
    violation("unknown relation type '" + std::string(name) + "'");
  }
  return RelationType{static_cast<std::uint16_t>(it - relation_names_.begin())};
}

bool Schema::admissible(NodeType src, NodeType dst, RelationType rel) const {
  // name() validates each tag and throws for unknown ones.
  (void)name(src);
  (void)name(dst);
  (void)name(rel);
  return std::binary_search(triples_.begin(), triples_.end(),
                            AdmissibleTriple{src, rel, dst});
}

std::vector<RelationType> Schema::permitted(NodeType src, NodeType dst) const {
  std::vector<RelationType> out;
  for (const auto& t : triples_) {
    if (t.src == src && t.dst == dst) out.push_back(t.rel);
  }
  return out;
}

std::vector<AdmissibleTriple> Schema::cells_for(RelationType rel) const {
  std::vector<AdmissibleTriple> out;
  for (const auto& t : triples_) {
    if (t.rel == rel) out.push_back(t);
  }
  return out;
}

std::string Schema::serialize() const {
  std::ostringstream os;
  os << "SCHEMA 1\n";
  for (const auto& n : node_names_) os << "NODE_TYPE " << n << '\n';
  for (const auto& r : relation_names_) os << "RELATION_TYPE " << r << '\n';
  for (const auto& t : triples_) {
    os << "ADMIT " << node_names_[t.src.index] << ' '
       << relation_names_[t.rel.index] << ' ' << node_names_[t.dst.index] << '\n';
  }
  return os.str();
}

std::shared_ptr<const Schema> Schema::parse(std::string_view document) {
  SchemaBuilder builder{SchemaBuilder::Bare{}};
  bool saw_version = false;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= document.size()) {
    auto nl = document.find('\n', pos);
    if (nl == std::string_view::npos) nl = document.size();
    auto line = document.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    auto words = split_words(line);
    if (words.empty()) continue;
    auto fail = [&](const std::string& why) {
      violation("schema document line " + std::to_string(line_no) + ": " + why);
    };
    if (words[0] == "SCHEMA") {
      if (words.size() != 2 || words[1] != "1") fail("unsupported schema version");
      saw_version = true;
    } else if (words[0] == "NODE_TYPE" && words.size() == 2) {
      builder.add_node_type(words[1]);
    } else if (words[0] == "RELATION_TYPE" && words.size() == 2) {
      builder.add_relation_type(words[1]);
    } else if (words[0] == "ADMIT" && words.size() == 4) {
      const Schema& d = builder.draft_;
      builder.admit(d.node_type(words[1]), d.relation_type(words[2]),
                    d.node_type(words[3]));
    } else {
      fail("unrecognized declaration '" + std::string(line) + "'");
    }
  }
  if (!saw_version) violation("schema document lacks a SCHEMA header");
  const Schema& d = builder.draft_;
  for (std::uint16_t i = 0; i < kCoreNodeTypeCount; ++i) {
    if (d.node_names_.size() <= i || d.node_names_[i] != kCoreNodeNames[i]) {
      violation("schema document does not declare the core node types in order");
    }
  }
  for (std::uint16_t i = 0; i < kCoreRelationTypeCount; ++i) {
    if (d.relation_names_.size() <= i || d.relation_names_[i] != kCoreRelationNames[i]) {
      violation("schema document does not declare the core relation types in order");
    }
  }
  return builder.freeze();
}

SchemaBuilder::SchemaBuilder(Bare) {}

SchemaBuilder::SchemaBuilder() {
  for (auto n : kCoreNodeNames) draft_.node_names_.emplace_back(n);
  for (auto r : kCoreRelationNames) draft_.relation_names_.emplace_back(r);
  using R = RelationType;
  for (R rel : {R::HasSubject, R::HasAction, R::HasObject, R::ModifySubject,
                R::ModifyAction, R::ModifyObject}) {
    admit(NodeType::Concept, rel, NodeType::Element);
  }
  admit(NodeType::Concept, R::OccurredAt, NodeType::Time);
  admit(NodeType::Concept, R::AcquiredAt, NodeType::Time);
  admit(NodeType::Concept, R::PartOf, NodeType::Interaction);
  admit(NodeType::Source, R::Recounts, NodeType::Concept);
}

void SchemaBuilder::check_open() const {
  if (frozen_) violation("schema is frozen; vocabularies are closed after store creation");
}

NodeType SchemaBuilder::add_node_type(std::string_view name) {
  check_open();
  if (!valid_tag(name)) violation("invalid node type name '" + std::string(name) + "'");
  auto& names = draft_.node_names_;
  if (std::find(names.begin(), names.end(), name) != names.end()) {
    violation("node type '" + std::string(name) + "' already declared");
  }
  names.emplace_back(name);
  return NodeType{static_cast<std::uint16_t>(names.size() - 1)};
}

RelationType SchemaBuilder::add_relation_type(std::string_view name) {
  check_open();
  if (!valid_tag(name)) violation("invalid relation type name '" + std::string(name) + "'");
  auto& names = draft_.relation_names_;
  if (std::find(names.begin(), names.end(), name) != names.end()) {
    violation("relation type '" + std::string(name) + "' already declared");
  }
  names.emplace_back(name);
  return RelationType{static_cast<std::uint16_t>(names.size() - 1)};
}

SchemaBuilder& SchemaBuilder::admit(NodeType src, RelationType rel, NodeType dst) {
  check_open();
  (void)draft_.name(src);
  (void)draft_.name(dst);
  (void)draft_.name(rel);
  AdmissibleTriple t{src, rel, dst};
  auto& ts = draft_.triples_;
  auto it = std::lower_bound(ts.begin(), ts.end(), t);
  if (it == ts.end() || *it != t) ts.insert(it, t);
  return *this;
}

std::shared_ptr<const Schema> SchemaBuilder::freeze() {
  check_open();
  for (std::uint16_t i = 0; i < draft_.relation_names_.size(); ++i) {
    if (draft_.cells_for(RelationType{i}).empty()) {
      violation("relation type '" + draft_.relation_names_[i] +
                "' has no admissible node-type pair");
    }
  }
  frozen_ = true;
  return std::shared_ptr<const Schema>(new Schema(std::move(draft_)));
}

}  // namespace dgmm
