#include "framealign/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "framealign/error.hpp"

namespace framealign {

namespace {

template <typename T>
T field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(std::string("missing field \"") + key + "\"");
  try {
    return it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(std::string("field \"") + key + "\" has the wrong type");
  }
}

}  // namespace

Json to_json(const SourceRecord& r) {
  return Json{{"id", r.id}, {"audio", r.audio}, {"label", r.label}};
}

Json to_json(const EventRecord& r) {
  return Json{{"id", r.id},           {"audio", r.audio},       {"label", r.label},
              {"source_id", r.source_id}, {"onset_s", r.onset_s}, {"offset_s", r.offset_s},
              {"duration_s", r.duration_s}};
}

Json to_json(const RejectionRecord& r) {
  return Json{{"source_id", r.source_id}, {"reason", r.reason}};
}

Json to_json(const SceneRecord& r) {
  Json events = Json::array();
  for (const auto& e : r.events) {
    Json ev{{"phrase", e.phrase}, {"onset_s", e.onset_s}, {"offset_s", e.offset_s},
            {"snr_db", e.snr_db}};
    if (!e.embedding.empty()) ev["embedding"] = e.embedding;
    events.push_back(std::move(ev));
  }
  Json row{{"id", r.id},         {"audio", r.audio},   {"caption", r.caption},
           {"duration_s", r.duration_s}, {"events", std::move(events)}, {"rescale", r.rescale}};
  if (r.phrase_set) {
    Json set = Json::array();
    for (const auto& p : *r.phrase_set) set.push_back(Json{{"phrase", p.phrase}, {"positive", p.positive}});
    row["phrase_set"] = std::move(set);
  }
  return row;
}

SourceRecord source_from_json(const Json& j) {
  return {field<std::string>(j, "id"), field<std::string>(j, "audio"),
          field<std::string>(j, "label")};
}

EventRecord event_from_json(const Json& j) {
  EventRecord r;
  r.id = field<std::string>(j, "id");
  r.audio = field<std::string>(j, "audio");
  r.label = field<std::string>(j, "label");
  r.source_id = field<std::string>(j, "source_id");
  r.onset_s = field<double>(j, "onset_s");
  r.offset_s = field<double>(j, "offset_s");
  r.duration_s = field<double>(j, "duration_s");
  return r;
}

SceneRecord scene_from_json(const Json& j) {
  SceneRecord r;
  r.id = field<std::string>(j, "id");
  r.audio = field<std::string>(j, "audio");
  r.caption = field<std::string>(j, "caption");
  r.duration_s = field<double>(j, "duration_s");
  r.rescale = field<double>(j, "rescale");
  const auto events = field<Json>(j, "events");
  if (!events.is_array()) throw Error("field \"events\" must be an array");
  for (const auto& e : events) {
    SceneEvent ev;
    ev.phrase = field<std::string>(e, "phrase");
    ev.onset_s = field<double>(e, "onset_s");
    ev.offset_s = field<double>(e, "offset_s");
    ev.snr_db = field<double>(e, "snr_db");
    if (e.contains("embedding")) ev.embedding = field<std::vector<double>>(e, "embedding");
    r.events.push_back(std::move(ev));
  }
  if (j.contains("phrase_set")) {
    std::vector<PhraseSetEntry> set;
    for (const auto& p : field<Json>(j, "phrase_set")) {
      set.push_back({field<std::string>(p, "phrase"), field<bool>(p, "positive")});
    }
    r.phrase_set = std::move(set);
  }
  return r;
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<Json> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) {
      continue;
    }
    try {
      rows.push_back(Json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
  }
  return rows;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& row : rows) out << row.dump() << '\n';
  if (!out) throw Error("I/O failure writing " + path.string());
}

namespace {

template <typename Record, typename Parse>
std::vector<Record> read_rows(const std::filesystem::path& path, Parse parse) {
  std::vector<Record> out;
  std::size_t row = 0;
  for (const auto& j : read_jsonl(path)) {
    ++row;
    try {
      out.push_back(parse(j));
    } catch (const Error& e) {
      throw Error(path.string() + ": row " + std::to_string(row) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

std::vector<SourceRecord> read_sources(const std::filesystem::path& path) {
  return read_rows<SourceRecord>(path, source_from_json);
}

std::vector<EventRecord> read_events(const std::filesystem::path& path) {
  return read_rows<EventRecord>(path, event_from_json);
}

std::vector<SceneRecord> read_scenes(const std::filesystem::path& path) {
  return read_rows<SceneRecord>(path, scene_from_json);
}

std::vector<std::string> distinct_phrases(const SceneRecord& scene) {
  std::vector<std::string> out;
  for (const auto& e : scene.events) {
    if (std::find(out.begin(), out.end(), e.phrase) == out.end()) out.push_back(e.phrase);
  }
  return out;
}

}  // namespace framealign
