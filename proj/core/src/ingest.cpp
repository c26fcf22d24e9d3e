#include "dgmm/ingest.hpp"

#include <chrono>

#include "dgmm/error.hpp"

namespace dgmm {
namespace {

// The node type a gist element relation points at: Element or a registered
// extension dimension, never a context type.
NodeType element_target(const Schema& schema, RelationType rel) {
  std::optional<NodeType> target;
  for (const auto& cell : schema.cells_for(rel)) {
    if (cell.src != NodeType::Concept) continue;
    if (cell.dst == NodeType::Concept || cell.dst == NodeType::Time ||
        cell.dst == NodeType::Interaction || cell.dst == NodeType::Source) {
      continue;
    }
    if (target && *target != cell.dst) {
      throw Error(ErrorKind::schema_violation,
                  std::string(schema.name(rel)) + " targets more than one element dimension");
    }
    target = cell.dst;
  }
  if (!target) {
    throw Error(ErrorKind::schema_violation,
                std::string(schema.name(rel)) + " is not a Concept->Element relation");
  }
  return *target;
}

}  // namespace

std::int64_t wall_clock_seconds() {
  using namespace std::chrono;
  return duration_cast<seconds>(system_clock::now().time_since_epoch()).count();
}

Batch prepare_ingest(const MemoryGraph& graph, const Gist& gist, const IngestOptions& options) {
  const Schema& schema = graph.schema();
  if (gist.elements.empty()) {
    throw Error(ErrorKind::schema_violation, "gist has no elements");
  }
  // Validate everything that can fail before staging anything.
  std::vector<NodeType> targets;
  targets.reserve(gist.elements.size());
  for (const auto& e : gist.elements) {
    if (!schema.contains(e.rel)) {
      throw Error(ErrorKind::schema_violation,
                  "unknown relation type tag #" + std::to_string(e.rel.index));
    }
    targets.push_back(element_target(schema, e.rel));
  }
  if (canonical_name(gist.source_name).empty() || canonical_name(gist.interaction_id).empty()) {
    throw Error(ErrorKind::invalid_name, "gist source and interaction must be non-empty");
  }

  TimeValue acquired = gist.acquisition_time
                           ? *gist.acquisition_time
                           : TimeValue::instant(options.clock ? options.clock()
                                                              : wall_clock_seconds());

  BatchBuilder b(graph, BatchKind::ingest);
  NodeId concept_id = b.create_concept(gist.concept_label);
  for (std::size_t i = 0; i < gist.elements.size(); ++i) {
    NodeId e = b.resolve_or_create(targets[i], gist.elements[i].name);
    b.add_relation(concept_id, e, gist.elements[i].rel, 1.0);
  }
  if (gist.event_time) {
    b.add_relation(concept_id, b.resolve_or_create_time(*gist.event_time),
                   RelationType::OccurredAt);
  }
  b.add_relation(concept_id, b.resolve_or_create_time(acquired), RelationType::AcquiredAt);
  b.add_relation(concept_id, b.resolve_or_create(NodeType::Interaction, gist.interaction_id),
                 RelationType::PartOf);
  b.add_relation(b.resolve_or_create(NodeType::Source, gist.source_name), concept_id,
                 RelationType::Recounts);
  return std::move(b).finish();
}

InteractionReceipt receipt_for(const Batch& batch) {
  InteractionReceipt r;
  r.version = batch.version;
  for (const auto& n : batch.created_nodes) {
    r.created_node_ids.push_back(n.id);
    if (n.type == NodeType::Concept) r.concept_id = n.id;
  }
  r.created_relation_count = batch.created_relations.size();
  return r;
}

InteractionReceipt ingest(MemoryGraph& graph, const Gist& gist, const IngestOptions& options) {
  Batch batch = prepare_ingest(graph, gist, options);
  graph.commit(batch);
  return receipt_for(batch);
}

IngestStreamResult ingest_stream(MemoryGraph& graph, std::span<const Gist> gists,
                                 const IngestOptions& options) {
  IngestStreamResult out;
  for (std::size_t i = 0; i < gists.size(); ++i) {
    try {
      out.receipts.push_back(ingest(graph, gists[i], options));
    } catch (const Error& e) {
      out.diagnostics.push_back({i, std::string(to_string(e.kind())) + ": " + e.what()});
    }
  }
  return out;
}

}  // namespace dgmm
