#include "framealign/clipper.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

#include "framealign/error.hpp"
#include "framealign/parallel.hpp"

namespace framealign {

namespace {

constexpr double kTimeEps = 1e-9;

std::size_t seconds_to_samples(double seconds, int sample_rate) {
  return static_cast<std::size_t>(std::llround(seconds * sample_rate));
}

struct ActiveRun {
  std::size_t begin = 0;  // samples
  std::size_t end = 0;
};

// First run of active windows, bridging inactive stretches of at most
// merge_gap_s. Onset/offset start on window boundaries.
std::optional<ActiveRun> first_active_run(const EnergyEnvelope& env, std::size_t n_samples,
                                          const ClipperParams& p) {
  const auto& db = env.window_db;
  std::size_t first = db.size();
  for (std::size_t i = 0; i < db.size(); ++i) {
    if (db[i] >= p.threshold_db) {
      first = i;
      break;
    }
  }
  if (first == db.size()) return std::nullopt;

  std::size_t last = first;
  for (std::size_t i = first + 1; i < db.size(); ++i) {
    if (db[i] < p.threshold_db) continue;
    const double gap_s = static_cast<double>(i - last - 1) * env.hop_s;
    if (gap_s > p.merge_gap_s + kTimeEps) break;
    last = i;
  }
  ActiveRun run;
  run.begin = first * env.hop_samples;
  run.end = std::min(n_samples, last * env.hop_samples + env.window_samples);
  return run;
}

double block_db(const AudioClip& clip, std::size_t begin, std::size_t end) {
  double acc = 0.0;
  for (std::size_t k = begin; k < end; ++k) acc += clip.samples[k] * clip.samples[k];
  return power_to_db(acc / static_cast<double>(end - begin));
}

// A window turns active as soon as enough of it is loud, so its start can
// lead the true onset by almost a full window. Tighten each edge to the
// outermost hop-sized block of the edge window that is itself above
// threshold; this bounds the boundary error by one hop.
void refine_edges(const AudioClip& clip, const EnergyEnvelope& env, const ClipperParams& p,
                  ActiveRun& run) {
  const std::size_t h = env.hop_samples;
  const std::size_t win_end = std::min(run.end, run.begin + env.window_samples);
  for (std::size_t b = run.begin; b + h <= win_end; b += h) {
    if (block_db(clip, b, b + h) >= p.threshold_db) {
      run.begin = b;
      break;
    }
  }
  const std::size_t win_begin =
      run.end >= run.begin + env.window_samples ? run.end - env.window_samples : run.begin;
  for (std::size_t e = run.end; e >= win_begin + h && e - h >= run.begin; e -= h) {
    if (block_db(clip, e - h, e) >= p.threshold_db) {
      run.end = e;
      break;
    }
  }
}

std::string sanitize_id(std::string id) {
  for (char& c : id) {
    if (c == '/' || c == '\\' || c == ':') c = '_';
  }
  return id;
}

}  // namespace

void ClipperParams::validate() const {
  if (!(hop_s > 0.0)) throw Error("clipper: hop_s must be positive");
  if (!(window_s >= hop_s)) throw Error("clipper: window_s must be >= hop_s");
  if (!(merge_gap_s >= 0.0)) throw Error("clipper: merge_gap_s must be non-negative");
  if (!(min_dur_s > 0.0 && min_dur_s <= max_dur_s)) {
    throw Error("clipper: need 0 < min_dur_s <= max_dur_s");
  }
  if (!std::isfinite(threshold_db)) throw Error("clipper: threshold_db must be finite");
  if (sample_rate <= 0) throw Error("clipper: sample_rate must be positive");
}

EnergyEnvelope energy_envelope(const AudioClip& clip, double window_s, double hop_s) {
  validate_clip(clip);
  if (!(hop_s > 0.0) || !(window_s >= hop_s)) {
    throw Error("energy_envelope: need window_s >= hop_s > 0");
  }
  EnergyEnvelope env;
  env.window_s = window_s;
  env.hop_s = hop_s;
  env.window_samples = seconds_to_samples(window_s, clip.sample_rate);
  env.hop_samples = seconds_to_samples(hop_s, clip.sample_rate);
  if (env.window_samples == 0 || env.hop_samples == 0) {
    throw Error("energy_envelope: window or hop shorter than one sample");
  }
  const std::size_t n = clip.size();
  if (n < env.window_samples) {
    std::ostringstream msg;
    msg << "energy_envelope: clip (" << clip.duration_s() << " s) shorter than one window ("
        << window_s << " s)";
    throw Error(msg.str());
  }
  const std::size_t count = (n - env.window_samples) / env.hop_samples + 1;
  env.window_db.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t start = i * env.hop_samples;
    double acc = 0.0;
    for (std::size_t k = start; k < start + env.window_samples; ++k) {
      acc += clip.samples[k] * clip.samples[k];
    }
    env.window_db[i] = power_to_db(acc / static_cast<double>(env.window_samples));
  }
  return env;
}

std::optional<EventSegment> extract_event_segment(const AudioClip& clip,
                                                  const ClipperParams& params) {
  params.validate();
  const EnergyEnvelope env = energy_envelope(clip, params.window_s, params.hop_s);
  auto run = first_active_run(env, clip.size(), params);
  if (!run) return std::nullopt;
  refine_edges(clip, env, params, *run);

  EventSegment seg;
  seg.onset_s = static_cast<double>(run->begin) / clip.sample_rate;
  seg.offset_s = static_cast<double>(run->end) / clip.sample_rate;
  const double dur = seg.duration_s();
  if (dur < params.min_dur_s - kTimeEps || dur > params.max_dur_s + kTimeEps) {
    return std::nullopt;
  }
  seg.audio.sample_rate = clip.sample_rate;
  seg.audio.samples.assign(clip.samples.begin() + static_cast<std::ptrdiff_t>(run->begin),
                           clip.samples.begin() + static_cast<std::ptrdiff_t>(run->end));
  return seg;
}

ClipBankResult clip_event_bank(const std::filesystem::path& input_manifest,
                               const std::filesystem::path& output_dir,
                               const ClipperParams& params, int workers) {
  params.validate();
  const auto sources = read_sources(input_manifest);
  if (sources.empty()) throw Error("no inputs: " + input_manifest.string() + " lists no sources");

  const auto base = input_manifest.parent_path();
  const auto event_dir = output_dir / "events";
  std::filesystem::create_directories(event_dir);

  struct Outcome {
    bool readable = false;
    std::optional<EventRecord> event;
    std::optional<RejectionRecord> rejection;
  };
  std::vector<Outcome> outcomes(sources.size());

  parallel_for(sources.size(), workers, [&](std::size_t i) {
    const auto& src = sources[i];
    Outcome& out = outcomes[i];
    auto reject = [&](std::string reason) {
      out.rejection = RejectionRecord{src.id, std::move(reason)};
    };

    AudioClip clip;
    try {
      clip = read_wav(base / src.audio);
    } catch (const Error& e) {
      std::cerr << "WARNING: skipping " << src.id << ": " << e.what() << '\n';
      reject(std::string("unreadable: ") + e.what());
      return;
    }
    out.readable = true;
    if (clip.sample_rate != params.sample_rate) {
      reject("sample rate mismatch: " + std::to_string(clip.sample_rate) + " Hz, expected " +
             std::to_string(params.sample_rate));
      return;
    }
    if (clip.duration_s() < params.window_s) {
      reject("shorter than one analysis window");
      return;
    }

    const EnergyEnvelope env = energy_envelope(clip, params.window_s, params.hop_s);
    const auto run = first_active_run(env, clip.size(), params);
    if (!run) {
      reject("no window above threshold");
      return;
    }
    const double onset = static_cast<double>(run->begin) / clip.sample_rate;
    const double offset = static_cast<double>(run->end) / clip.sample_rate;
    const double dur = offset - onset;
    if (dur < params.min_dur_s - kTimeEps) {
      std::ostringstream msg;
      msg << "segment too short (" << dur << " s < " << params.min_dur_s << " s)";
      reject(msg.str());
      return;
    }
    if (dur > params.max_dur_s + kTimeEps) {
      std::ostringstream msg;
      msg << "segment too long (" << dur << " s > " << params.max_dur_s << " s)";
      reject(msg.str());
      return;
    }

    AudioClip cut;
    cut.sample_rate = clip.sample_rate;
    cut.samples.assign(clip.samples.begin() + static_cast<std::ptrdiff_t>(run->begin),
                       clip.samples.begin() + static_cast<std::ptrdiff_t>(run->end));
    const std::string rel = "events/" + sanitize_id(src.id) + ".wav";
    write_wav(cut, output_dir / rel, WavWriteOptions{params.encoding, false});

    EventRecord rec;
    rec.id = src.id;
    rec.audio = rel;
    rec.label = src.label;
    rec.source_id = src.id;
    rec.onset_s = onset;
    rec.offset_s = offset;
    rec.duration_s = dur;
    out.event = std::move(rec);
  });

  ClipBankResult result;
  bool any_readable = false;
  for (auto& o : outcomes) {
    any_readable = any_readable || o.readable;
    if (o.event) result.events.push_back(std::move(*o.event));
    if (o.rejection) result.rejections.push_back(std::move(*o.rejection));
  }
  if (!any_readable) throw Error("no inputs readable from " + input_manifest.string());

  write_records(output_dir / "events.jsonl", result.events);
  write_records(output_dir / "rejections.jsonl", result.rejections);
  return result;
}

}  // namespace framealign
