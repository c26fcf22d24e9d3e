#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "dgmm/graph.hpp"
#include "dgmm/schema.hpp"

namespace dgmm {

// On-disk layout of a store directory:
//
//   dgmm.log      "DGMM1\n" | u32 len | u32 crc32 | header text
//                 then one record per committed batch:
//                 u32 len | u32 crc32 | "<ING|CSL> <version>\n<json body>"
//   snapshot.dgs  "DGMMSNAP1\n" | u32 len | u32 crc32 | canonical_text()
//   LOCK          "<purpose> <pid>\n" while a writer is active
//
// Integers are little-endian. The log is the source of truth; the snapshot
// only shortens recovery.

inline constexpr std::string_view kLogMagic = "DGMM1\n";
inline constexpr std::string_view kSnapshotMagic = "DGMMSNAP1\n";
inline constexpr std::string_view kLogFileName = "dgmm.log";
inline constexpr std::string_view kSnapshotFileName = "snapshot.dgs";
inline constexpr std::string_view kLockFileName = "LOCK";

std::uint32_t checksum(std::string_view bytes);

std::string encode_header(const Schema& schema,
                          const std::map<std::string, std::string>& metadata);
std::string encode_record(const Schema& schema, const Batch& batch);
// Record payload without framing, and its inverse.
std::string encode_payload(const Schema& schema, const Batch& batch);
Batch decode_payload(const Schema& schema, std::string_view payload);

struct PersistenceLog {
  std::shared_ptr<const Schema> schema;
  std::map<std::string, std::string> metadata;
  std::vector<Batch> batches;
  std::vector<std::uint64_t> offsets;  // byte offset of each record
  std::uint64_t valid_length = 0;      // bytes up to the last verified record
  std::vector<std::string> warnings;
};

// Verifies and decodes a whole log. A checksum mismatch throws
// CorruptionError naming the first bad record (1-based) and its offset; a
// truncated final record is dropped with a warning.
PersistenceLog parse_log(std::string_view bytes);
PersistenceLog read_log(const std::filesystem::path& file);

// Deterministic reconstruction of the graph that emitted the log.
MemoryGraph replay(const PersistenceLog& log);

std::string encode_snapshot(const MemoryGraph& graph);

enum class Access { read, write };

// A store directory opened for reading or for writing. Write access holds the
// directory lock for the lifetime of the object and appends every committed
// batch to the log before it is applied.
class Store {
 public:
  struct Options {
    // Write a snapshot file every N versions (0 disables).
    std::uint64_t snapshot_every = 256;
    // Lock purpose recorded in the LOCK file for write access.
    std::string purpose = "write";
  };

  // Creates `dir` (if needed) and an empty log. Fails if a log already exists.
  static void create(const std::filesystem::path& dir,
                     std::shared_ptr<const Schema> schema = Schema::default_schema(),
                     const std::map<std::string, std::string>& metadata = {});

  static Store open(const std::filesystem::path& dir, Access access);
  static Store open(const std::filesystem::path& dir, Access access, Options options);

  Store(Store&&) noexcept;
  Store& operator=(Store&&) noexcept;
  ~Store();

  const MemoryGraph& graph() const noexcept;
  // Write access only; throws Error(precondition) otherwise.
  MemoryGraph& mutable_graph();

  const std::filesystem::path& dir() const noexcept;
  const std::vector<std::string>& warnings() const noexcept;
  const std::map<std::string, std::string>& metadata() const noexcept;
  bool loaded_from_snapshot() const noexcept;

  void write_snapshot() const;

 private:
  struct Impl;
  explicit Store(std::unique_ptr<Impl> impl);

  std::unique_ptr<Impl> impl_;
};

// Throws Error(busy) when a live writer holds the store for consolidation.
void check_readable(const std::filesystem::path& dir);

}  // namespace dgmm
