#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dgmm/graph.hpp"

namespace dgmm {

struct GistElement {
  RelationType rel;   // a Concept -> Element (or extension dimension) relation
  std::string name;
};

// One pre-decomposed conceptual structure: role-typed elements plus their
// context.
struct Gist {
  std::string concept_label;
  std::vector<GistElement> elements;
  std::optional<TimeValue> event_time;
  std::optional<TimeValue> acquisition_time;  // defaults to the ingestion clock
  std::string source_name;
  std::string interaction_id;
};

struct InteractionReceipt {
  NodeId concept_id;
  std::vector<NodeId> created_node_ids;
  std::size_t created_relation_count = 0;
  Version version = 0;
};

struct IngestOptions {
  // Epoch seconds used when a gist has no acquisition_time.
  std::function<std::int64_t()> clock;
};

std::int64_t wall_clock_seconds();

// Stages the additive batch for one gist without touching the graph. Throws
// Error(schema_violation | invalid_name | invalid_time) for invalid gists.
Batch prepare_ingest(const MemoryGraph& graph, const Gist& gist,
                     const IngestOptions& options = {});

// Commits one gist atomically around a fresh Concept node. On error the
// graph is unchanged.
InteractionReceipt ingest(MemoryGraph& graph, const Gist& gist,
                          const IngestOptions& options = {});

InteractionReceipt receipt_for(const Batch& batch);

struct IngestDiagnostic {
  std::size_t index = 0;  // 0-based position in the stream
  std::string message;
};

struct IngestStreamResult {
  std::vector<InteractionReceipt> receipts;
  std::vector<IngestDiagnostic> diagnostics;
};

// Ingests in order; an invalid gist is skipped with a diagnostic.
IngestStreamResult ingest_stream(MemoryGraph& graph, std::span<const Gist> gists,
                                 const IngestOptions& options = {});

// --- Gist file format -------------------------------------------------------
//
// One JSON object per line:
//   {"concept": "...", "elements": [{"rel": "HAS_SUBJECT", "name": "jack"}, ...],
//    "event_time": "2000-01-01", "acquisition_time": "2025-11-15",
//    "source": "...", "interaction": "..."}
// Times are ISO-8601 instants or `start/end` intervals. Blank lines and lines
// starting with '#' are ignored.

Gist parse_gist(const Schema& schema, std::string_view line);
std::string format_gist(const Schema& schema, const Gist& gist);

struct GistLine {
  std::size_t line_number = 0;
  std::optional<Gist> gist;
  std::string error;  // set when gist is empty
};

std::vector<GistLine> read_gist_lines(const Schema& schema, std::istream& in);

}  // namespace dgmm
