#include "dgmm/concurrent.hpp"

namespace dgmm {

void SharedMemory::commit(const Batch& batch) {
  std::unique_lock lock(mutex_);
  graph_.commit(batch);
}

InteractionReceipt SharedMemory::ingest(const Gist& gist, const IngestOptions& options) {
  std::lock_guard slot(writer_);
  // Only the slot holder mutates, so the staged batch cannot go stale.
  Batch batch = read([&](const MemoryGraph& g) { return prepare_ingest(g, gist, options); });
  commit(batch);
  return receipt_for(batch);
}

ConsolidationReport SharedMemory::consolidate(const ConsolidationOptions& options) {
  std::lock_guard slot(writer_);
  ConsolidationReport report;
  report.version_before = version();
  for (;;) {
    auto pairs = read([&](const MemoryGraph& g) { return find_equivalent_pairs(g, options.mode); });
    if (pairs.empty()) break;
    for (const auto& [a, b] : pairs) {
      Batch batch = read([&](const MemoryGraph& g) {
        return prepare_consolidate_pair(g, a, b, options, report);
      });
      commit(batch);
    }
  }
  report.version_after = version();
  return report;
}

WorkingMemory SharedMemory::recall(const Cue& cue, std::optional<Version> at) const {
  return read([&](const MemoryGraph& g) { return dgmm::recall(g, cue, at); });
}

Version SharedMemory::version() const {
  return read([](const MemoryGraph& g) { return g.version(); });
}

}  // namespace dgmm
