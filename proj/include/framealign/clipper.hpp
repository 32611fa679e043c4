#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "framealign/audio.hpp"
#include "framealign/manifest.hpp"

namespace framealign {

/// Mean energy per sliding window, in dBFS.
struct EnergyEnvelope {
  std::vector<double> window_db;
  double window_s = 0.0;
  double hop_s = 0.0;
  // Window geometry in samples, the authoritative values used for cutting.
  std::size_t window_samples = 0;
  std::size_t hop_samples = 0;
};

struct EventSegment {
  std::string source_id;
  double onset_s = 0.0;
  double offset_s = 0.0;
  AudioClip audio;
  std::string label;

  double duration_s() const { return offset_s - onset_s; }
};

struct ClipperParams {
  double threshold_db = -20.0;
  double window_s = 0.10;
  double hop_s = 0.05;
  double merge_gap_s = 0.20;
  double min_dur_s = 1.0;
  double max_dur_s = 7.5;
  int sample_rate = 16000;
  WavEncoding encoding = WavEncoding::kPcm16;

  void validate() const;
};

EnergyEnvelope energy_envelope(const AudioClip& clip, double window_s, double hop_s);

/// First continuous run of windows at or above the threshold, merged across
/// short inactive gaps. Returns nullopt if nothing is active or the run's
/// duration falls outside [min_dur_s, max_dur_s].
std::optional<EventSegment> extract_event_segment(const AudioClip& clip,
                                                  const ClipperParams& params);

struct ClipBankResult {
  std::vector<EventRecord> events;
  std::vector<RejectionRecord> rejections;
};

/// Batch clipping over a source manifest (JSONL rows {"id", "audio", "label"},
/// audio paths relative to the manifest). Writes WAVs under
/// `output_dir/events/` plus `events.jsonl` and `rejections.jsonl`.
ClipBankResult clip_event_bank(const std::filesystem::path& input_manifest,
                               const std::filesystem::path& output_dir,
                               const ClipperParams& params, int workers = 1);

}  // namespace framealign
