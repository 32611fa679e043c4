#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace framealign {

using Json = nlohmann::ordered_json;

// Source list consumed by the clipper.
struct SourceRecord {
  std::string id;
  std::string audio;
  std::string label;
};

// One clean single-event segment.
struct EventRecord {
  std::string id;
  std::string audio;
  std::string label;
  std::string source_id;
  double onset_s = 0.0;
  double offset_s = 0.0;
  double duration_s = 0.0;
};

struct RejectionRecord {
  std::string source_id;
  std::string reason;
};

struct SceneEvent {
  std::string phrase;
  double onset_s = 0.0;
  double offset_s = 0.0;
  double snr_db = 0.0;
  // Optional phrase embedding, used when the phrase is absent from the
  // cluster database.
  std::vector<double> embedding;
};

struct PhraseSetEntry {
  std::string phrase;
  bool positive = false;
};

// Row of the dataset manifest; `phrase_set` is present once enriched.
struct SceneRecord {
  std::string id;
  std::string audio;
  std::string caption;
  double duration_s = 10.0;
  std::vector<SceneEvent> events;
  double rescale = 1.0;
  std::optional<std::vector<PhraseSetEntry>> phrase_set;
};

Json to_json(const SourceRecord& r);
Json to_json(const EventRecord& r);
Json to_json(const RejectionRecord& r);
Json to_json(const SceneRecord& r);

SourceRecord source_from_json(const Json& j);
EventRecord event_from_json(const Json& j);
SceneRecord scene_from_json(const Json& j);

/// Reads a JSONL file; blank lines are skipped. Parse errors name the line.
std::vector<Json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows);

template <typename Record>
void write_records(const std::filesystem::path& path, const std::vector<Record>& records) {
  std::vector<Json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(to_json(r));
  write_jsonl(path, rows);
}

std::vector<SourceRecord> read_sources(const std::filesystem::path& path);
std::vector<EventRecord> read_events(const std::filesystem::path& path);
std::vector<SceneRecord> read_scenes(const std::filesystem::path& path);

// Distinct event phrases of a scene, in first-occurrence order.
std::vector<std::string> distinct_phrases(const SceneRecord& scene);

}  // namespace framealign
