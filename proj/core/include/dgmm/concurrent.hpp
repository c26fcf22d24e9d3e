#pragma once

#include <mutex>
#include <optional>
#include <shared_mutex>
#include <utility>

#include "dgmm/consolidate.hpp"
#include "dgmm/ingest.hpp"
#include "dgmm/recall.hpp"

namespace dgmm {

// Single-writer, multi-reader access to one graph. Writers serialize on a
// writer slot and stage their batch under a shared lock, so readers are only
// held off while a finished batch is applied. Readers always see a fully
// committed version.
class SharedMemory {
 public:
  explicit SharedMemory(MemoryGraph& graph) : graph_(graph) {}

  SharedMemory(const SharedMemory&) = delete;
  SharedMemory& operator=(const SharedMemory&) = delete;

  InteractionReceipt ingest(const Gist& gist, const IngestOptions& options = {});
  ConsolidationReport consolidate(const ConsolidationOptions& options = {});

  WorkingMemory recall(const Cue& cue, std::optional<Version> at = std::nullopt) const;
  Version version() const;

  // Runs f(const MemoryGraph&) under the shared lock.
  template <class F>
  decltype(auto) read(F&& f) const {
    std::shared_lock lock(mutex_);
    return std::forward<F>(f)(static_cast<const MemoryGraph&>(graph_));
  }

 private:
  void commit(const Batch& batch);

  MemoryGraph& graph_;
  std::mutex writer_;
  mutable std::shared_mutex mutex_;
};

}  // namespace dgmm
