#include <doctest.h>

#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "generators.hpp"

using namespace dgmm;
using namespace dgmm::test;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spill(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

}  // namespace

TEST_CASE("payloads round trip") {
  MemoryGraph g;
  ingest(g, jack_and_jill());
  ingest(g, jack_and_jill());
  consolidation_pass(g, {.generalize_times = true});
  for (const auto& b : g.history()) {
    auto payload = encode_payload(g.schema(), b);
    CHECK(decode_payload(g.schema(), payload) == b);
  }
}

TEST_CASE("empty log replays to an empty graph") {
  TempDir dir;
  Store::create(dir.path());
  auto log = read_log(dir / kLogFileName);
  CHECK(log.batches.empty());
  auto g = replay(log);
  CHECK(g.version() == 0);
  CHECK(g.node_count() == 0);
  CHECK(*log.schema == *Schema::default_schema());
}

TEST_CASE("store persists every batch and reopens identically") {
  TempDir dir;
  Store::create(dir.path());
  std::uint64_t digest = 0;
  {
    Store s = Store::open(dir.path(), Access::write);
    ingest(s.mutable_graph(), project_x_success());
    ingest(s.mutable_graph(), project_x_delay());
    ingest(s.mutable_graph(), project_x_delay());
    consolidation_pass(s.mutable_graph());
    digest = content_digest(s.graph());
  }
  Store r = Store::open(dir.path(), Access::read);
  CHECK(content_digest(r.graph()) == digest);
  CHECK(r.graph().version() == 4);
  CHECK_THROWS_AS(r.mutable_graph(), Error);

  auto a = replay(read_log(dir / kLogFileName));
  auto b = replay(read_log(dir / kLogFileName));
  CHECK(content_digest(a) == digest);
  CHECK(content_digest(a) == content_digest(b));
}

TEST_CASE("creating over an existing store fails") {
  TempDir dir;
  Store::create(dir.path());
  CHECK_THROWS_AS(Store::create(dir.path()), Error);
}

TEST_CASE("a flipped byte is reported at its record") {
  TempDir dir;
  Store::create(dir.path());
  {
    Store s = Store::open(dir.path(), Access::write);
    for (int i = 0; i < 3; ++i) ingest(s.mutable_graph(), jack_and_jill());
  }
  auto path = dir / kLogFileName;
  auto log = read_log(path);
  REQUIRE(log.offsets.size() == 3);
  auto bytes = slurp(path);
  bytes[log.offsets[1] + 12] ^= 0x20;  // inside record 2's payload
  spill(path, bytes);
  try {
    read_log(path);
    FAIL("expected corruption");
  } catch (const CorruptionError& e) {
    CHECK(e.record() == 2);
    CHECK(e.offset() == log.offsets[1]);
  }
  CHECK_THROWS_AS(Store::open(dir.path(), Access::read), Error);
}

TEST_CASE("a torn final record is recovered with a warning") {
  TempDir dir;
  Store::create(dir.path());
  {
    Store s = Store::open(dir.path(), Access::write, {.snapshot_every = 0});
    ingest(s.mutable_graph(), project_x_success());
    ingest(s.mutable_graph(), project_x_delay());
  }
  auto path = dir / kLogFileName;
  auto bytes = slurp(path);
  spill(path, bytes.substr(0, bytes.size() - 5));

  auto log = read_log(path);
  CHECK(log.batches.size() == 1);
  REQUIRE(log.warnings.size() == 1);
  CHECK(log.warnings[0].find("truncated") != std::string::npos);

  {
    Store w = Store::open(dir.path(), Access::write);
    CHECK(w.graph().version() == 1);
    ingest(w.mutable_graph(), project_x_delay());
  }
  auto healed = read_log(path);
  CHECK(healed.warnings.empty());
  CHECK(healed.batches.size() == 2);
}

TEST_CASE("snapshots shorten recovery and corrupt snapshots fall back") {
  TempDir dir;
  Store::create(dir.path());
  GistGenerator gen(7);
  std::uint64_t digest = 0;
  {
    Store s = Store::open(dir.path(), Access::write, {.snapshot_every = 4});
    for (int i = 0; i < 10; ++i) ingest(s.mutable_graph(), gen.next());
    digest = content_digest(s.graph());
  }
  REQUIRE(fs::exists(dir / kSnapshotFileName));
  {
    Store r = Store::open(dir.path(), Access::read);
    CHECK(r.loaded_from_snapshot());
    CHECK(content_digest(r.graph()) == digest);
  }
  auto snap = slurp(dir / kSnapshotFileName);
  snap[snap.size() / 2] ^= 1;
  spill(dir / kSnapshotFileName, snap);
  Store r = Store::open(dir.path(), Access::read);
  CHECK_FALSE(r.loaded_from_snapshot());
  CHECK_FALSE(r.warnings().empty());
  CHECK(content_digest(r.graph()) == digest);
}

TEST_CASE("one writer at a time") {
  TempDir dir;
  Store::create(dir.path());
  Store w = Store::open(dir.path(), Access::write);
  try {
    Store::open(dir.path(), Access::write);
    FAIL("expected busy");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::busy);
  }
  // Readers are not blocked by an ingest writer.
  check_readable(dir.path());
  Store r = Store::open(dir.path(), Access::read);
  CHECK(r.graph().version() == 0);
}

TEST_CASE("readers back off during consolidation") {
  TempDir dir;
  Store::create(dir.path());
  Store w = Store::open(dir.path(), Access::write, {.purpose = "consolidate"});
  try {
    check_readable(dir.path());
    FAIL("expected busy");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::busy);
  }
}

TEST_CASE("a lock left by a dead process is taken over") {
  TempDir dir;
  Store::create(dir.path());
  spill(dir / kLockFileName, "consolidate 999999999\n");
  check_readable(dir.path());
  Store w = Store::open(dir.path(), Access::write);
  ingest(w.mutable_graph(), jack_and_jill());
  CHECK(w.graph().version() == 1);
}

TEST_CASE("the header carries the schema and metadata") {
  TempDir dir;
  SchemaBuilder b;
  NodeType emotion = b.add_node_type("Emotion");
  RelationType has_emotion = b.add_relation_type("HAS_EMOTION");
  b.admit(NodeType::Concept, has_emotion, emotion);
  auto schema = b.freeze();
  Store::create(dir.path(), schema, {{"owner", "tests"}});
  Store s = Store::open(dir.path(), Access::read);
  CHECK(s.graph().schema() == *schema);
  CHECK(s.metadata().at("owner") == "tests");
}
