#include "framealign/mixer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "framealign/error.hpp"
#include "framealign/parallel.hpp"

namespace framealign {

namespace {

// Stream salts; each concern of a scene draws from its own stream.
constexpr std::uint64_t kPlanSalt = 1;
constexpr std::uint64_t kBackgroundSalt = 2;
constexpr std::uint64_t kCaptionSalt = 3;

constexpr int kMaxRepeatRedraws = 64;

std::size_t timeline_samples(double timeline_s, int sample_rate) {
  return static_cast<std::size_t>(std::llround(timeline_s * sample_rate));
}

std::string scene_name(std::uint64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%06llu", static_cast<unsigned long long>(index));
  return buf;
}

}  // namespace

void MixParams::validate() const {
  if (!(timeline_s > 0.0)) throw Error("mix: timeline_s must be positive");
  if (max_events < 1) throw Error("mix: max_events must be >= 1");
  if (repeat_max < 1) throw Error("mix: repeat_max must be >= 1");
  if (!(snr_min_db <= snr_max_db)) throw Error("mix: snr_min_db must be <= snr_max_db");
  if (!std::isfinite(snr_min_db) || !std::isfinite(snr_max_db)) {
    throw Error("mix: SNR bounds must be finite");
  }
  if (frames_per_clip < 1) throw Error("mix: frames_per_clip must be >= 1");
}

AudioLookup::AudioLookup(const std::vector<Background>& backgrounds,
                         const std::vector<BankEvent>& events) {
  for (const auto& b : backgrounds) {
    if (!backgrounds_.emplace(b.id, &b.audio).second) {
      throw Error("duplicate background id: " + b.id);
    }
  }
  for (const auto& e : events) {
    if (!events_.emplace(e.id, &e.audio).second) throw Error("duplicate event id: " + e.id);
  }
}

const AudioClip& AudioLookup::background(const std::string& id) const {
  auto it = backgrounds_.find(id);
  if (it == backgrounds_.end()) throw Error("missing background audio: " + id);
  return *it->second;
}

const AudioClip& AudioLookup::event(const std::string& id) const {
  auto it = events_.find(id);
  if (it == events_.end()) throw Error("missing event audio: " + id);
  return *it->second;
}

SceneRecipe plan_scene(const Background& background, const std::vector<BankEvent>& bank,
                       const MixParams& params, std::uint64_t scene_index) {
  params.validate();
  if (bank.empty()) throw Error("plan_scene: event bank is empty");
  validate_clip(background.audio);
  const int sr = background.audio.sample_rate;
  const std::size_t n_timeline = timeline_samples(params.timeline_s, sr);
  if (background.audio.size() < n_timeline) {
    throw Error("plan_scene: background " + background.id + " is shorter than the timeline");
  }
  const double bg_rms = rms(std::span(background.audio.samples).first(n_timeline));
  if (bg_rms <= 0.0) throw Error("plan_scene: background " + background.id + " has zero RMS");

  Rng rng = Rng::derive(params.seed, scene_index, kPlanSalt);
  SceneRecipe recipe;
  recipe.background_id = background.id;

  const auto wanted = static_cast<std::size_t>(rng.uniform_int(1, params.max_events));

  // Partial Fisher-Yates over bank entries, skipping phrases already chosen.
  std::vector<std::size_t> order(bank.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<const BankEvent*> chosen;
  for (std::size_t i = 0; i < order.size() && chosen.size() < wanted; ++i) {
    const std::size_t j = i + rng.index(order.size() - i);
    std::swap(order[i], order[j]);
    const BankEvent& ev = bank[order[i]];
    const bool dup = std::any_of(chosen.begin(), chosen.end(),
                                 [&](const BankEvent* c) { return c->phrase == ev.phrase; });
    if (!dup) chosen.push_back(&ev);
  }

  for (const BankEvent* ev : chosen) {
    if (ev->audio.sample_rate != sr) {
      throw Error("plan_scene: event " + ev->id + " sample rate " +
                  std::to_string(ev->audio.sample_rate) + " != background " + std::to_string(sr));
    }
    validate_clip(ev->audio);
    const double ev_rms = rms(ev->audio);
    if (ev_rms <= 0.0) throw Error("plan_scene: event " + ev->id + " has zero RMS");
    const std::size_t n_event = ev->audio.size();
    if (n_event > n_timeline) {
      throw Error("plan_scene: event " + ev->id + " is longer than the timeline");
    }

    int repeats = 1;
    if (ev->audio.duration_s() < params.repeat_threshold_s) {
      repeats = static_cast<int>(rng.uniform_int(1, params.repeat_max));
      int redraws = 0;
      while (static_cast<std::size_t>(repeats) * n_event > n_timeline) {
        if (++redraws > kMaxRepeatRedraws) {
          repeats = static_cast<int>(n_timeline / n_event);
          break;
        }
        repeats = static_cast<int>(rng.uniform_int(1, params.repeat_max));
      }
    }
    const std::size_t n_effective = static_cast<std::size_t>(repeats) * n_event;
    const std::size_t max_onset = n_timeline - n_effective;
    const double onset_draw = rng.uniform(0.0, static_cast<double>(max_onset) / sr);
    const auto onset = std::min<std::size_t>(
        max_onset, static_cast<std::size_t>(std::llround(onset_draw * sr)));
    const double snr_db = rng.uniform(params.snr_min_db, params.snr_max_db);

    Placement p;
    p.event_id = ev->id;
    p.phrase = ev->phrase;
    p.repeat_count = repeats;
    p.onset_s = static_cast<double>(onset) / sr;
    p.offset_s = static_cast<double>(onset + n_effective) / sr;
    p.snr_db = snr_db;
    p.gain = bg_rms / ev_rms * db_to_linear(Decibels{snr_db});
    recipe.placements.push_back(std::move(p));
  }
  return recipe;
}

AudioClip render_scene(SceneRecipe& recipe, const AudioLookup& lookup, const MixParams& params) {
  const AudioClip& bg = lookup.background(recipe.background_id);
  const int sr = bg.sample_rate;
  const std::size_t n = timeline_samples(params.timeline_s, sr);
  if (bg.size() < n) throw Error("render_scene: background shorter than the timeline");

  AudioClip mix;
  mix.sample_rate = sr;
  mix.samples.assign(bg.samples.begin(), bg.samples.begin() + static_cast<std::ptrdiff_t>(n));

  for (const auto& p : recipe.placements) {
    const AudioClip& ev = lookup.event(p.event_id);
    if (ev.sample_rate != sr) {
      throw Error("render_scene: sample-rate mismatch for event " + p.event_id);
    }
    const auto onset = static_cast<std::size_t>(std::llround(p.onset_s * sr));
    const std::size_t total = static_cast<std::size_t>(p.repeat_count) * ev.size();
    if (onset + total > n) {
      throw Error("render_scene: placement of " + p.event_id + " runs past the timeline");
    }
    for (int r = 0; r < p.repeat_count; ++r) {
      const std::size_t base = onset + static_cast<std::size_t>(r) * ev.size();
      for (std::size_t k = 0; k < ev.size(); ++k) mix.samples[base + k] += p.gain * ev.samples[k];
    }
  }

  double peak = 0.0;
  for (double v : mix.samples) peak = std::max(peak, std::abs(v));
  recipe.rescale = 1.0;
  if (peak > 1.0) {
    for (double& v : mix.samples) v /= peak;
    recipe.rescale = 1.0 / peak;
  }
  return mix;
}

std::vector<std::uint8_t> frame_labels_for(std::span<const std::pair<double, double>> intervals,
                                           int frames, double timeline_s) {
  if (frames < 1) throw Error("frame labels: frame count must be >= 1");
  std::vector<std::uint8_t> y(static_cast<std::size_t>(frames), 0);
  const double width = timeline_s / frames;
  for (const auto& [on, off] : intervals) {
    for (int l = 0; l < frames; ++l) {
      const double lo = std::max(on, l * width);
      const double hi = std::min(off, (l + 1) * width);
      if (hi > lo) y[static_cast<std::size_t>(l)] = 1;
    }
  }
  return y;
}

namespace {

template <typename Item, typename PhraseOf, typename IntervalOf>
std::vector<FrameAnnotation> labels_by_phrase(const std::vector<Item>& items, PhraseOf phrase_of,
                                              IntervalOf interval_of, int frames,
                                              double timeline_s) {
  std::vector<FrameAnnotation> out;
  std::vector<std::vector<std::pair<double, double>>> spans;
  for (const auto& item : items) {
    const std::string& phrase = phrase_of(item);
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const FrameAnnotation& a) { return a.phrase == phrase; });
    std::size_t k;
    if (it == out.end()) {
      out.push_back({phrase, {}});
      spans.emplace_back();
      k = out.size() - 1;
    } else {
      k = static_cast<std::size_t>(it - out.begin());
    }
    spans[k].push_back(interval_of(item));
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].labels = frame_labels_for(spans[k], frames, timeline_s);
  }
  return out;
}

}  // namespace

std::vector<FrameAnnotation> render_frame_labels(const SceneRecipe& recipe, int frames,
                                                 double timeline_s) {
  return labels_by_phrase(
      recipe.placements, [](const Placement& p) -> const std::string& { return p.phrase; },
      [](const Placement& p) { return std::pair{p.onset_s, p.offset_s}; }, frames, timeline_s);
}

std::vector<FrameAnnotation> render_frame_labels(const SceneRecord& scene, int frames) {
  return labels_by_phrase(
      scene.events, [](const SceneEvent& e) -> const std::string& { return e.phrase; },
      [](const SceneEvent& e) { return std::pair{e.onset_s, e.offset_s}; }, frames,
      scene.duration_s);
}

std::string join_phrases(const std::vector<std::string>& phrases) {
  if (phrases.empty()) throw Error("caption: phrase list is empty");
  std::string out = phrases.front();
  for (std::size_t i = 1; i < phrases.size(); ++i) {
    out += (i + 1 == phrases.size()) ? " and " : ", ";
    out += phrases[i];
  }
  return out;
}

namespace {

void check_template(const std::string& t) {
  const auto first = t.find("{}");
  if (first == std::string::npos) throw Error("caption template has no \"{}\" slot: " + t);
  if (t.find("{}", first + 2) != std::string::npos) {
    throw Error("caption template has more than one \"{}\" slot: " + t);
  }
}

}  // namespace

std::string generate_caption(const std::vector<std::string>& phrases,
                             const std::vector<std::string>& templates, Rng& rng) {
  if (templates.empty()) throw Error("caption: no templates");
  const std::string joined = join_phrases(phrases);
  std::string t = templates[rng.index(templates.size())];
  check_template(t);
  return t.replace(t.find("{}"), 2, joined);
}

std::vector<std::string> read_templates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open template file " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    check_template(line);
    out.push_back(line);
  }
  if (out.empty()) throw Error("template file " + path.string() + " is empty");
  return out;
}

namespace {

SyntheticScene synthesize_with(const std::vector<Background>& backgrounds,
                               const std::vector<BankEvent>& bank, const AudioLookup& lookup,
                               const std::vector<std::string>& templates,
                               const MixParams& params, std::uint64_t scene_index) {
  if (backgrounds.empty()) throw Error("no background clips");
  Rng bg_rng = Rng::derive(params.seed, scene_index, kBackgroundSalt);
  const Background& bg = backgrounds[bg_rng.index(backgrounds.size())];

  SyntheticScene scene;
  scene.recipe = plan_scene(bg, bank, params, scene_index);
  scene.audio = render_scene(scene.recipe, lookup, params);
  scene.annotations = render_frame_labels(scene.recipe, params.frames_per_clip, params.timeline_s);

  std::vector<std::string> phrases;
  for (const auto& a : scene.annotations) phrases.push_back(a.phrase);
  Rng caption_rng = Rng::derive(params.seed, scene_index, kCaptionSalt);
  scene.caption = generate_caption(phrases, templates, caption_rng);
  return scene;
}

}  // namespace

SyntheticScene synthesize_scene(const std::vector<Background>& backgrounds,
                                const std::vector<BankEvent>& bank,
                                const std::vector<std::string>& templates,
                                const MixParams& params, std::uint64_t scene_index) {
  const AudioLookup lookup(backgrounds, bank);
  return synthesize_with(backgrounds, bank, lookup, templates, params, scene_index);
}

SceneRecord to_scene_record(const SyntheticScene& scene, std::string id, std::string audio,
                            double timeline_s) {
  SceneRecord rec;
  rec.id = std::move(id);
  rec.audio = std::move(audio);
  rec.caption = scene.caption;
  rec.duration_s = timeline_s;
  rec.rescale = scene.recipe.rescale;
  for (const auto& p : scene.recipe.placements) {
    rec.events.push_back({p.phrase, p.onset_s, p.offset_s, p.snr_db, {}});
  }
  return rec;
}

namespace {

void write_label_sidecar(const std::filesystem::path& path, const SyntheticScene& scene,
                         int frames) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (std::size_t k = 0; k < scene.annotations.size(); ++k) {
    out << (k ? "," : "") << '"' << scene.annotations[k].phrase << '"';
  }
  out << '\n';
  for (int l = 0; l < frames; ++l) {
    for (std::size_t k = 0; k < scene.annotations.size(); ++k) {
      out << (k ? "," : "") << int{scene.annotations[k].labels[static_cast<std::size_t>(l)]};
    }
    out << '\n';
  }
}

}  // namespace

std::vector<SceneRecord> build_dataset(const std::vector<Background>& backgrounds,
                                       const std::vector<BankEvent>& bank,
                                       const std::vector<std::string>& templates,
                                       const MixParams& params,
                                       const std::filesystem::path& output_dir,
                                       const DatasetOptions& options) {
  params.validate();
  if (options.count < 1) throw Error("mix: count must be >= 1");
  if (backgrounds.empty()) throw Error("mix: no background clips");
  if (bank.empty()) throw Error("mix: event bank is empty");
  for (const auto& t : templates) check_template(t);

  std::filesystem::create_directories(output_dir / "scenes");
  std::vector<SceneRecord> records(static_cast<std::size_t>(options.count));
  const AudioLookup lookup(backgrounds, bank);

  parallel_for(records.size(), options.workers, [&](std::size_t i) {
    try {
      const SyntheticScene scene = synthesize_with(backgrounds, bank, lookup, templates, params, i);
      const std::string name = scene_name(i);
      const std::string rel = "scenes/" + name + ".wav";
      write_wav(scene.audio, output_dir / rel, WavWriteOptions{options.encoding, false});
      if (options.write_label_sidecar) {
        write_label_sidecar(output_dir / "scenes" / (name + ".labels.csv"), scene,
                            params.frames_per_clip);
      }
      records[i] = to_scene_record(scene, name, rel, params.timeline_s);
    } catch (const Error& e) {
      throw Error("scene " + std::to_string(i) + ": " + e.what());
    }
  });

  write_records(output_dir / "dataset.jsonl", records);
  return records;
}

std::vector<BankEvent> load_event_bank(const std::filesystem::path& event_manifest,
                                       int sample_rate) {
  const auto base = event_manifest.parent_path();
  std::vector<BankEvent> bank;
  for (const auto& rec : read_events(event_manifest)) {
    BankEvent ev{rec.id, rec.label, read_wav(base / rec.audio)};
    if (ev.audio.sample_rate != sample_rate) {
      throw Error("event " + rec.id + ": sample rate " + std::to_string(ev.audio.sample_rate) +
                  " Hz, expected " + std::to_string(sample_rate));
    }
    bank.push_back(std::move(ev));
  }
  if (bank.empty()) throw Error("event bank " + event_manifest.string() + " is empty");
  return bank;
}

std::vector<Background> load_backgrounds(const std::filesystem::path& path, int sample_rate) {
  std::vector<Background> out;
  auto add = [&](std::string id, const std::filesystem::path& wav) {
    Background bg{std::move(id), read_wav(wav)};
    if (bg.audio.sample_rate != sample_rate) {
      throw Error("background " + bg.id + ": sample rate " +
                  std::to_string(bg.audio.sample_rate) + " Hz, expected " +
                  std::to_string(sample_rate));
    }
    out.push_back(std::move(bg));
  };
  if (std::filesystem::is_directory(path)) {
    std::vector<std::filesystem::path> wavs;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".wav") {
        wavs.push_back(entry.path());
      }
    }
    std::sort(wavs.begin(), wavs.end());
    for (const auto& w : wavs) add(w.stem().string(), w);
  } else {
    const auto base = path.parent_path();
    std::size_t row = 0;
    for (const auto& j : read_jsonl(path)) {
      ++row;
      if (!j.contains("id") || !j.contains("audio")) {
        throw Error(path.string() + ": row " + std::to_string(row) +
                    ": background rows need \"id\" and \"audio\"");
      }
      add(j["id"].get<std::string>(), base / j["audio"].get<std::string>());
    }
  }
  if (out.empty()) throw Error("no background clips found in " + path.string());
  return out;
}

}  // namespace framealign
