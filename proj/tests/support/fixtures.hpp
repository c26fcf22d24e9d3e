#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <string_view>
#include <unistd.h>

#include "dgmm/dgmm.hpp"

namespace dgmm::test {

inline GistElement el(RelationType rel, std::string name) { return {rel, std::move(name)}; }

inline TimeValue when(std::string_view text) { return TimeValue::parse(text); }

// Deterministic ingestion clock for gists without an acquisition time.
inline IngestOptions fixed_clock(std::int64_t seconds = 1'700'000'000) {
  IngestOptions o;
  o.clock = [seconds] { return seconds; };
  return o;
}

inline Gist jack_and_jill() {
  Gist g;
  g.concept_label = "fetch-water";
  g.elements = {el(RelationType::HasSubject, "jack"), el(RelationType::HasSubject, "jill"),
                el(RelationType::HasAction, "fetch"), el(RelationType::HasObject, "water"),
                el(RelationType::ModifyObject, "fresh")};
  g.event_time = when("2000-01-01");
  g.acquisition_time = when("2025-11-15");
  g.source_name = "jack-and-jill-book";
  g.interaction_id = "int-001";
  return g;
}

inline Gist project_x_success() {
  Gist g;
  g.concept_label = "project-x-success";
  g.elements = {el(RelationType::HasSubject, "project-x"), el(RelationType::HasAction, "achieve"),
                el(RelationType::HasObject, "success")};
  g.event_time = when("2025-01-10");
  g.acquisition_time = when("2025-01-12");
  g.source_name = "source-a";
  g.interaction_id = "int-a";
  return g;
}

inline Gist project_x_delay() {
  Gist g;
  g.concept_label = "project-x-delay";
  g.elements = {el(RelationType::HasSubject, "project-x"),
                el(RelationType::HasAction, "experience"), el(RelationType::HasObject, "delay")};
  g.event_time = when("2025-03-02");
  g.acquisition_time = when("2025-03-05");
  g.source_name = "source-b";
  g.interaction_id = "int-b";
  return g;
}

inline Cue broad_cue() {
  Cue c;
  c.elements = {"project-x"};
  return c;
}

inline Cue narrow_cue() {
  Cue c;
  c.elements = {"project-x", "delay"};
  c.min_element_overlap = 2;
  return c;
}

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("dgmm-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace dgmm::test
