#include "dgmm/log.hpp"

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>
#include <zlib.h>

#include <cerrno>
#include <cstring>
#include <nlohmann/json.hpp>
#include <sstream>

#include "dgmm/error.hpp"

namespace dgmm {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(std::string_view bytes, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
  }
  return v;
}

std::string frame(std::string_view payload) {
  std::string out;
  out.reserve(payload.size() + 8);
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  put_u32(out, checksum(payload));
  out.append(payload);
  return out;
}

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + file.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file_atomic(const fs::path& file, std::string_view bytes) {
  auto tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::io, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, file, ec);
  if (ec) throw Error(ErrorKind::io, "cannot rename snapshot: " + ec.message());
}

json key_json(const Schema& s, const RelationKey& k) {
  return json::array({k.src.value, k.dst.value, s.name(k.type)});
}

RelationKey key_from(const Schema& s, const json& j) {
  return {NodeId{j.at(0).get<std::uint64_t>()}, NodeId{j.at(1).get<std::uint64_t>()},
          s.relation_type(j.at(2).get<std::string>())};
}

bool pid_alive(long pid) {
  if (pid <= 0) return false;
  return ::kill(static_cast<pid_t>(pid), 0) == 0 || errno == EPERM;
}

struct LockInfo {
  std::string purpose;
  long pid = 0;
};

std::optional<LockInfo> read_lock(const fs::path& file) {
  std::ifstream in(file);
  if (!in) return std::nullopt;
  LockInfo info;
  in >> info.purpose >> info.pid;
  return info;
}

}  // namespace

std::uint32_t checksum(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()),
              static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

std::string encode_header(const Schema& schema,
                          const std::map<std::string, std::string>& metadata) {
  std::string text;
  for (const auto& [k, v] : metadata) text += "META " + k + " " + v + "\n";
  text += schema.serialize();
  std::string out(kLogMagic);
  out += frame(text);
  return out;
}

std::string encode_payload(const Schema& s, const Batch& b) {
  json body = json::object();
  if (!b.created_nodes.empty()) {
    json nodes = json::array();
    for (const auto& n : b.created_nodes) {
      nodes.push_back(json::array({n.id.value, s.name(n.type), n.name}));
    }
    body["nodes"] = std::move(nodes);
  }
  if (!b.removed_relations.empty()) {
    json rels = json::array();
    for (const auto& k : b.removed_relations) rels.push_back(key_json(s, k));
    body["removed_rels"] = std::move(rels);
  }
  if (!b.created_relations.empty()) {
    json rels = json::array();
    for (const auto& r : b.created_relations) {
      auto j = key_json(s, r.key());
      j.push_back(r.weight);
      rels.push_back(std::move(j));
    }
    body["rels"] = std::move(rels);
  }
  if (!b.weight_updates.empty()) {
    json ws = json::array();
    for (const auto& u : b.weight_updates) {
      auto j = key_json(s, u.key);
      j.push_back(u.weight);
      ws.push_back(std::move(j));
    }
    body["weights"] = std::move(ws);
  }
  if (!b.removed_nodes.empty()) {
    json ids = json::array();
    for (NodeId id : b.removed_nodes) ids.push_back(id.value);
    body["removed_nodes"] = std::move(ids);
  }
  if (!b.tombstones.empty()) {
    json ts = json::array();
    for (const auto& [a, v] : b.tombstones) ts.push_back(json::array({a.value, v.value}));
    body["tombstones"] = std::move(ts);
  }
  return std::string(to_string(b.kind)) + " " + std::to_string(b.version) + "\n" +
         body.dump();
}

Batch decode_payload(const Schema& s, std::string_view payload) {
  auto nl = payload.find('\n');
  if (nl == std::string_view::npos || nl < 5) {
    throw Error(ErrorKind::corruption, "record lacks a kind/version line");
  }
  Batch b;
  auto head = payload.substr(0, nl);
  if (head.substr(0, 4) == "ING ") {
    b.kind = BatchKind::ingest;
  } else if (head.substr(0, 4) == "CSL ") {
    b.kind = BatchKind::consolidate;
  } else {
    throw Error(ErrorKind::corruption, "unknown record kind");
  }
  b.version = std::stoull(std::string(head.substr(4)));
  json body = json::parse(payload.substr(nl + 1));
  if (auto it = body.find("nodes"); it != body.end()) {
    for (const auto& j : *it) {
      Node n{NodeId{j.at(0).get<std::uint64_t>()}, s.node_type(j.at(1).get<std::string>()),
             j.at(2).get<std::string>(), std::nullopt};
      if (n.type == NodeType::Time) n.time = TimeValue::parse(n.name);
      b.created_nodes.push_back(std::move(n));
    }
  }
  if (auto it = body.find("removed_rels"); it != body.end()) {
    for (const auto& j : *it) b.removed_relations.push_back(key_from(s, j));
  }
  if (auto it = body.find("rels"); it != body.end()) {
    for (const auto& j : *it) {
      auto k = key_from(s, j);
      b.created_relations.push_back({k.src, k.dst, k.type, j.at(3).get<double>()});
    }
  }
  if (auto it = body.find("weights"); it != body.end()) {
    for (const auto& j : *it) b.weight_updates.push_back({key_from(s, j), j.at(3).get<double>()});
  }
  if (auto it = body.find("removed_nodes"); it != body.end()) {
    for (const auto& j : *it) b.removed_nodes.push_back(NodeId{j.get<std::uint64_t>()});
  }
  if (auto it = body.find("tombstones"); it != body.end()) {
    for (const auto& j : *it) {
      b.tombstones.emplace_back(NodeId{j.at(0).get<std::uint64_t>()},
                                NodeId{j.at(1).get<std::uint64_t>()});
    }
  }
  return b;
}

std::string encode_record(const Schema& schema, const Batch& batch) {
  return frame(encode_payload(schema, batch));
}

PersistenceLog parse_log(std::string_view bytes) {
  if (bytes.size() < kLogMagic.size() + 8 || bytes.substr(0, kLogMagic.size()) != kLogMagic) {
    throw CorruptionError("log does not start with the DGMM1 header", 0, 0);
  }
  PersistenceLog log;
  std::size_t pos = kLogMagic.size();
  std::uint32_t hlen = get_u32(bytes, pos);
  std::uint32_t hcrc = get_u32(bytes, pos + 4);
  if (bytes.size() - pos - 8 < hlen) throw CorruptionError("log header is truncated", 0, pos);
  auto htext = bytes.substr(pos + 8, hlen);
  if (checksum(htext) != hcrc) throw CorruptionError("log header checksum mismatch", 0, pos);
  pos += 8 + hlen;

  std::string schema_doc;
  std::istringstream hs{std::string(htext)};
  for (std::string line; std::getline(hs, line);) {
    if (line.rfind("META ", 0) == 0) {
      auto rest = line.substr(5);
      auto sp = rest.find(' ');
      log.metadata[rest.substr(0, sp)] = sp == std::string::npos ? "" : rest.substr(sp + 1);
    } else {
      schema_doc += line + "\n";
    }
  }
  log.schema = Schema::parse(schema_doc);

  std::size_t index = 0;
  while (pos < bytes.size()) {
    ++index;
    std::size_t remaining = bytes.size() - pos;
    if (remaining < 8 || remaining - 8 < get_u32(bytes, pos)) {
      log.warnings.push_back("truncated final record " + std::to_string(index) + " at offset " +
                             std::to_string(pos) + "; recovered to last valid record");
      break;
    }
    std::uint32_t len = get_u32(bytes, pos);
    std::uint32_t crc = get_u32(bytes, pos + 4);
    auto payload = bytes.substr(pos + 8, len);
    if (checksum(payload) != crc) {
      throw CorruptionError("checksum mismatch in record " + std::to_string(index) +
                                " at offset " + std::to_string(pos),
                            index, pos);
    }
    Batch b;
    try {
      b = decode_payload(*log.schema, payload);
    } catch (const std::exception& e) {
      throw CorruptionError("undecodable record " + std::to_string(index) + " at offset " +
                                std::to_string(pos) + ": " + e.what(),
                            index, pos);
    }
    if (b.version != index) {
      throw CorruptionError("record " + std::to_string(index) + " carries version " +
                                std::to_string(b.version),
                            index, pos);
    }
    log.offsets.push_back(pos);
    log.batches.push_back(std::move(b));
    pos += 8 + len;
  }
  log.valid_length = pos;
  return log;
}

PersistenceLog read_log(const fs::path& file) { return parse_log(read_file(file)); }

MemoryGraph replay(const PersistenceLog& log) {
  MemoryGraph g(log.schema);
  for (std::size_t i = 0; i < log.batches.size(); ++i) {
    try {
      g.commit(log.batches[i]);
    } catch (const CorruptionError&) {
      throw;
    } catch (const Error& e) {
      throw CorruptionError("record " + std::to_string(i + 1) + " cannot be applied: " + e.what(),
                            i + 1, log.offsets.empty() ? 0 : log.offsets[i]);
    }
  }
  return g;
}

std::string encode_snapshot(const MemoryGraph& graph) {
  std::string out(kSnapshotMagic);
  out += frame(canonical_text(graph));
  return out;
}

// ---------------------------------------------------------------------------
// Store

class StoreLock {
 public:
  StoreLock(const fs::path& dir, const std::string& purpose) : file_(dir / kLockFileName) {
    for (int attempt = 0; attempt < 2; ++attempt) {
      int fd = ::open(file_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
      if (fd >= 0) {
        auto text = purpose + " " + std::to_string(::getpid()) + "\n";
        [[maybe_unused]] auto n = ::write(fd, text.data(), text.size());
        ::close(fd);
        return;
      }
      if (errno != EEXIST) {
        throw Error(ErrorKind::io, "cannot create lock file: " + std::string(std::strerror(errno)));
      }
      auto info = read_lock(file_);
      if (info && pid_alive(info->pid)) {
        throw Error(ErrorKind::busy, "store is locked by a writer (" + info->purpose +
                                         ", pid " + std::to_string(info->pid) + ")");
      }
      std::error_code ec;
      fs::remove(file_, ec);  // stale lock from a dead writer
    }
    throw Error(ErrorKind::busy, "store lock is contended");
  }

  ~StoreLock() {
    std::error_code ec;
    fs::remove(file_, ec);
  }

  StoreLock(const StoreLock&) = delete;
  StoreLock& operator=(const StoreLock&) = delete;

 private:
  fs::path file_;
};

class LogWriter : public BatchSink {
 public:
  LogWriter(const fs::path& file, const Schema& schema, const MemoryGraph& graph,
            std::uint64_t snapshot_every, const fs::path& snapshot_file)
      : schema_(schema),
        graph_(graph),
        snapshot_every_(snapshot_every),
        snapshot_file_(snapshot_file),
        last_snapshot_(graph.version()),
        out_(file, std::ios::binary | std::ios::app) {
    if (!out_) throw Error(ErrorKind::io, "cannot open " + file.string() + " for append");
  }

  void append(const Batch& batch) override {
    // The graph still holds the pre-batch state, which is exactly what the
    // log describes so far.
    if (snapshot_every_ != 0 && graph_.version() >= last_snapshot_ + snapshot_every_) {
      write_file_atomic(snapshot_file_, encode_snapshot(graph_));
      last_snapshot_ = graph_.version();
    }
    auto rec = encode_record(schema_, batch);
    out_.write(rec.data(), static_cast<std::streamsize>(rec.size()));
    out_.flush();
    if (!out_) throw Error(ErrorKind::io, "failed to append record to log");
  }

 private:
  const Schema& schema_;
  const MemoryGraph& graph_;
  std::uint64_t snapshot_every_;
  fs::path snapshot_file_;
  Version last_snapshot_;
  std::ofstream out_;
};

struct Store::Impl {
  fs::path dir;
  Access access = Access::read;
  Options options;
  MemoryGraph graph;
  std::map<std::string, std::string> metadata;
  std::vector<std::string> warnings;
  bool loaded_from_snapshot = false;
  std::unique_ptr<StoreLock> lock;
  std::unique_ptr<LogWriter> writer;
};

void Store::create(const fs::path& dir, std::shared_ptr<const Schema> schema,
                   const std::map<std::string, std::string>& metadata) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
  auto file = dir / kLogFileName;
  if (fs::exists(file)) throw Error(ErrorKind::precondition, "store already exists at " + dir.string());
  StoreLock lock(dir, "init");
  std::ofstream out(file, std::ios::binary);
  auto header = encode_header(*schema, metadata);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  if (!out) throw Error(ErrorKind::io, "cannot write " + file.string());
}

Store Store::open(const fs::path& dir, Access access) { return open(dir, access, Options{}); }

Store Store::open(const fs::path& dir, Access access, Options options) {
  auto impl = std::make_unique<Impl>();
  impl->dir = dir;
  impl->access = access;
  impl->options = options;
  auto file = dir / kLogFileName;
  if (!fs::exists(file)) throw Error(ErrorKind::io, "no store at " + dir.string());
  if (access == Access::write) {
    impl->lock = std::make_unique<StoreLock>(dir, options.purpose);
  } else {
    check_readable(dir);
  }

  auto log = read_log(file);
  impl->metadata = log.metadata;
  impl->warnings = log.warnings;

  auto snap_file = dir / kSnapshotFileName;
  bool restored = false;
  if (fs::exists(snap_file)) {
    try {
      auto bytes = read_file(snap_file);
      if (bytes.size() < kSnapshotMagic.size() + 8 ||
          bytes.compare(0, kSnapshotMagic.size(), kSnapshotMagic) != 0) {
        throw Error(ErrorKind::corruption, "bad snapshot magic");
      }
      std::string_view view(bytes);
      std::size_t pos = kSnapshotMagic.size();
      std::uint32_t len = get_u32(view, pos);
      std::uint32_t crc = get_u32(view, pos + 4);
      if (view.size() - pos - 8 < len) throw Error(ErrorKind::corruption, "snapshot truncated");
      auto text = view.substr(pos + 8, len);
      if (checksum(text) != crc) throw Error(ErrorKind::corruption, "snapshot checksum mismatch");
      impl->graph = restore_state(log.schema, text, log.batches);
      restored = true;
    } catch (const Error& e) {
      impl->warnings.push_back(std::string("ignoring snapshot: ") + e.what());
    }
  }
  if (!restored) impl->graph = replay(log);
  impl->loaded_from_snapshot = restored;

  if (access == Access::write) {
    if (!log.warnings.empty()) fs::resize_file(file, log.valid_length);
    impl->writer = std::make_unique<LogWriter>(file, *impl->graph.schema_ptr(), impl->graph,
                                               options.snapshot_every, snap_file);
    impl->graph.attach_sink(impl->writer.get());
  }
  return Store(std::move(impl));
}

Store::Store(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
Store::Store(Store&&) noexcept = default;
Store& Store::operator=(Store&&) noexcept = default;
Store::~Store() = default;

const MemoryGraph& Store::graph() const noexcept { return impl_->graph; }

MemoryGraph& Store::mutable_graph() {
  if (impl_->access != Access::write) {
    throw Error(ErrorKind::precondition, "store was opened read-only");
  }
  return impl_->graph;
}

const fs::path& Store::dir() const noexcept { return impl_->dir; }
const std::vector<std::string>& Store::warnings() const noexcept { return impl_->warnings; }
const std::map<std::string, std::string>& Store::metadata() const noexcept {
  return impl_->metadata;
}
bool Store::loaded_from_snapshot() const noexcept { return impl_->loaded_from_snapshot; }

void Store::write_snapshot() const {
  write_file_atomic(impl_->dir / kSnapshotFileName, encode_snapshot(impl_->graph));
}

void check_readable(const fs::path& dir) {
  auto info = read_lock(dir / kLockFileName);
  if (info && info->purpose == "consolidate" && pid_alive(info->pid)) {
    throw Error(ErrorKind::busy, "store is busy: consolidation pass in progress (pid " +
                                     std::to_string(info->pid) + "); retry later");
  }
}

}  // namespace dgmm
