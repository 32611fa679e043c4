#include "framealign/validate.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include "framealign/audio.hpp"
#include "framealign/error.hpp"
#include "framealign/mixer.hpp"

namespace framealign {

namespace {

constexpr double kTol = 1e-6;

ManifestKind detect(const Json& row) {
  if (row.contains("phrase_set")) return ManifestKind::kEnriched;
  if (row.contains("events") && row.contains("caption")) return ManifestKind::kDataset;
  if (row.contains("source_id") && row.contains("onset_s")) return ManifestKind::kEvents;
  if (row.contains("source_id") && row.contains("reason")) return ManifestKind::kRejections;
  if (row.contains("id") && row.contains("audio") && row.contains("label")) {
    return ManifestKind::kSources;
  }
  throw Error("unrecognized manifest row schema");
}

std::string fmt_interval(double on, double off) {
  std::ostringstream s;
  s << "[" << on << ", " << off << "]";
  return s.str();
}

class Checker {
 public:
  Checker(const std::filesystem::path& path, const ValidationOptions& opt, ValidationReport& rep)
      : base_(path.parent_path()), opt_(opt), rep_(rep) {}

  void row(std::size_t n, const Json& j, ManifestKind kind) {
    row_ = n;
    id_ = j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>()
          : j.contains("source_id") && j["source_id"].is_string()
              ? j["source_id"].get<std::string>()
              : std::string{};
    try {
      switch (kind) {
        case ManifestKind::kSources: source(j); break;
        case ManifestKind::kEvents: event(j); break;
        case ManifestKind::kRejections: rejection(j); break;
        case ManifestKind::kDataset:
        case ManifestKind::kEnriched: scene(j, kind == ManifestKind::kEnriched); break;
        case ManifestKind::kEmpty: break;
      }
    } catch (const Error& e) {
      fail(e.what());
    }
  }

 private:
  void fail(const std::string& message) { rep_.errors.push_back({row_, id_, message}); }

  void unique_id(const std::string& id) {
    if (id.empty()) fail("empty id");
    if (!ids_.insert(id).second) fail("duplicate id \"" + id + "\"");
  }

  std::optional<AudioClip> audio(const std::string& rel) {
    if (!opt_.check_audio) return std::nullopt;
    const auto p = base_ / rel;
    if (!std::filesystem::exists(p)) {
      fail("audio file not found: " + rel);
      return std::nullopt;
    }
    try {
      return read_wav(p);
    } catch (const Error& e) {
      fail(e.what());
      return std::nullopt;
    }
  }

  void source(const Json& j) {
    const SourceRecord r = source_from_json(j);
    unique_id(r.id);
    if (r.label.empty()) fail("empty label");
    if (opt_.check_audio && !std::filesystem::exists(base_ / r.audio)) {
      fail("audio file not found: " + r.audio);
    }
  }

  void event(const Json& j) {
    const EventRecord r = event_from_json(j);
    unique_id(r.id);
    if (r.label.empty()) fail("empty label");
    if (!(r.onset_s >= 0.0 && r.onset_s < r.offset_s)) {
      fail("invalid interval " + fmt_interval(r.onset_s, r.offset_s));
    }
    if (std::abs(r.duration_s - (r.offset_s - r.onset_s)) > kTol) {
      fail("duration_s does not equal offset_s - onset_s");
    }
    if (r.duration_s < opt_.min_dur_s - kTol || r.duration_s > opt_.max_dur_s + kTol) {
      std::ostringstream s;
      s << "duration " << r.duration_s << " s outside [" << opt_.min_dur_s << ", "
        << opt_.max_dur_s << "]";
      fail(s.str());
    }
    if (auto clip = audio(r.audio)) {
      if (std::abs(clip->duration_s() - r.duration_s) > 1.0 / clip->sample_rate + kTol) {
        fail("audio length does not match duration_s");
      }
    }
  }

  void rejection(const Json& j) {
    if (!j["source_id"].is_string() || j["source_id"].get<std::string>().empty()) {
      fail("rejection without source_id");
    }
    if (!j["reason"].is_string() || j["reason"].get<std::string>().empty()) {
      fail("rejection without reason");
    }
  }

  void scene(const Json& j, bool enriched) {
    const SceneRecord r = scene_from_json(j);
    unique_id(r.id);
    if (!(r.duration_s > 0.0)) fail("duration_s must be positive");
    if (!(r.rescale > 0.0 && r.rescale <= 1.0)) fail("rescale must lie in (0, 1]");
    if (r.caption.empty()) fail("empty caption");
    if (r.events.empty()) fail("scene has no events");

    for (std::size_t k = 0; k < r.events.size(); ++k) {
      const auto& e = r.events[k];
      const std::string where = "event " + std::to_string(k) + " (" + e.phrase + ")";
      if (e.phrase.empty()) fail(where + ": empty phrase");
      if (!(e.onset_s >= 0.0 && e.onset_s < e.offset_s && e.offset_s <= r.duration_s + kTol)) {
        fail(where + ": invalid interval " + fmt_interval(e.onset_s, e.offset_s));
        continue;
      }
      if (!std::isfinite(e.snr_db)) fail(where + ": non-finite snr_db");
      const std::pair<double, double> span{e.onset_s, e.offset_s};
      const auto y = frame_labels_for(std::span(&span, 1), opt_.frames, r.duration_s);
      if (std::find(y.begin(), y.end(), std::uint8_t{1}) == y.end()) {
        fail(where + ": no positive frame");
      }
    }

    if (auto clip = audio(r.audio)) {
      if (std::abs(clip->duration_s() - r.duration_s) > 1.0 / clip->sample_rate + kTol) {
        fail("audio length does not match duration_s");
      }
    }

    if (enriched) phrase_set(r);
  }

  void phrase_set(const SceneRecord& r) {
    const auto& set = *r.phrase_set;
    const auto positives = distinct_phrases(r);
    std::size_t k = 0;
    while (k < set.size() && set[k].positive) ++k;
    for (std::size_t i = k; i < set.size(); ++i) {
      if (set[i].positive) fail("positive phrase after a negative in phrase_set");
    }
    if (k != positives.size()) {
      fail("phrase_set has " + std::to_string(k) + " positives, scene has " +
           std::to_string(positives.size()) + " distinct event phrases");
    } else {
      for (std::size_t i = 0; i < k; ++i) {
        if (set[i].phrase != positives[i]) fail("positive " + std::to_string(i) + " does not match events");
      }
    }
    // Without an explicit N, every row must match the first row's size.
    if (!first_set_size_) first_set_size_ = set.size();
    const std::size_t expected = opt_.phrase_count.value_or(*first_set_size_);
    if (set.size() != expected) {
      fail("phrase_set has " + std::to_string(set.size()) + " entries, expected " +
           std::to_string(expected));
    }
    std::set<std::string> seen;
    for (const auto& p : set) {
      if (!seen.insert(p.phrase).second && !opt_.allow_duplicate_negatives) {
        fail("duplicate phrase in phrase_set: \"" + p.phrase + "\"");
      }
    }

    if (opt_.space == nullptr) return;
    std::set<int> positive_clusters;
    for (std::size_t i = 0; i < std::min(k, set.size()); ++i) {
      std::vector<double> emb;
      for (const auto& e : r.events) {
        if (e.phrase == set[i].phrase && !e.embedding.empty()) emb = e.embedding;
      }
      positive_clusters.insert(resolve_cluster(*opt_.space, set[i].phrase, emb));
    }
    for (std::size_t i = k; i < set.size(); ++i) {
      const auto c = opt_.space->cluster_of(set[i].phrase);
      if (!c) {
        fail("negative \"" + set[i].phrase + "\" is not in the phrase database");
      } else if (positive_clusters.contains(*c)) {
        fail("negative \"" + set[i].phrase + "\" shares cluster " + std::to_string(*c) +
             " with a positive");
      }
    }
  }

  std::filesystem::path base_;
  const ValidationOptions& opt_;
  ValidationReport& rep_;
  std::size_t row_ = 0;
  std::string id_;
  std::unordered_set<std::string> ids_;
  std::optional<std::size_t> first_set_size_;
};

}  // namespace

std::string to_string(ManifestKind kind) {
  switch (kind) {
    case ManifestKind::kSources: return "sources";
    case ManifestKind::kEvents: return "events";
    case ManifestKind::kRejections: return "rejections";
    case ManifestKind::kDataset: return "dataset";
    case ManifestKind::kEnriched: return "enriched";
    case ManifestKind::kEmpty: return "empty";
  }
  return "?";
}

Json ValidationReport::to_json() const {
  Json errs = Json::array();
  for (const auto& d : errors) {
    errs.push_back(Json{{"row", d.row}, {"id", d.id}, {"message", d.message}});
  }
  return Json{{"ok", ok()}, {"kind", to_string(kind)}, {"rows", rows}, {"errors", errs}};
}

ValidationReport validate_manifest(const std::filesystem::path& path,
                                   const ValidationOptions& options) {
  ValidationReport report;
  std::vector<Json> rows;
  try {
    rows = read_jsonl(path);
  } catch (const Error& e) {
    report.errors.push_back({0, "", e.what()});
    return report;
  }
  report.rows = rows.size();
  if (rows.empty()) return report;

  try {
    report.kind = detect(rows.front());
  } catch (const Error& e) {
    report.errors.push_back({1, "", e.what()});
    return report;
  }
  Checker check(path, options, report);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_object()) {
      report.errors.push_back({i + 1, "", "row is not a JSON object"});
      continue;
    }
    check.row(i + 1, rows[i], report.kind);
  }
  return report;
}

}  // namespace framealign
