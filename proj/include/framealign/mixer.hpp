#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "framealign/audio.hpp"
#include "framealign/manifest.hpp"
#include "framealign/rng.hpp"

namespace framealign {

struct MixParams {
  double timeline_s = 10.0;
  int max_events = 5;
  int repeat_max = 3;
  double repeat_threshold_s = 3.0;
  double snr_min_db = 12.0;
  double snr_max_db = 20.0;
  int frames_per_clip = 64;
  std::uint64_t seed = 0;

  void validate() const;
};

struct BankEvent {
  std::string id;
  std::string phrase;
  AudioClip audio;
};

struct Background {
  std::string id;
  AudioClip audio;
};

struct Placement {
  std::string event_id;
  std::string phrase;
  int repeat_count = 1;
  double onset_s = 0.0;
  double offset_s = 0.0;
  double snr_db = 0.0;
  double gain = 1.0;
};

struct SceneRecipe {
  std::string background_id;
  std::vector<Placement> placements;
  // Whole-mixture scale applied by render_scene when the peak exceeds 1.
  double rescale = 1.0;
};

/// Per-phrase frame-level annotation.
struct FrameAnnotation {
  std::string phrase;
  std::vector<std::uint8_t> labels;
};

struct SyntheticScene {
  AudioClip audio;
  std::string caption;
  std::vector<FrameAnnotation> annotations;
  SceneRecipe recipe;
};

// Resolves ids used in a recipe to audio.
// Referenced vectors must outlive the lookup.
class AudioLookup {
 public:
  AudioLookup(const std::vector<Background>& backgrounds, const std::vector<BankEvent>& events);

  const AudioClip& background(const std::string& id) const;
  const AudioClip& event(const std::string& id) const;

 private:
  std::unordered_map<std::string, const AudioClip*> backgrounds_;
  std::unordered_map<std::string, const AudioClip*> events_;
};

/// Draws event count, events, repeats, onsets and SNRs for one scene. The
/// random stream is derived from (params.seed, scene_index) only.
SceneRecipe plan_scene(const Background& background, const std::vector<BankEvent>& bank,
                       const MixParams& params, std::uint64_t scene_index);

/// Mixes background and scaled, placed events. May set recipe.rescale.
AudioClip render_scene(SceneRecipe& recipe, const AudioLookup& lookup, const MixParams& params);

/// Any-overlap frame labels: frame l covers [l*T/L, (l+1)*T/L).
std::vector<FrameAnnotation> render_frame_labels(const SceneRecipe& recipe, int frames,
                                                 double timeline_s);

// Same rule over a manifest row's events.
std::vector<FrameAnnotation> render_frame_labels(const SceneRecord& scene, int frames);

std::vector<std::uint8_t> frame_labels_for(std::span<const std::pair<double, double>> intervals,
                                           int frames, double timeline_s);

/// "a", "a and b", "a, b and c", substituted into a uniformly drawn template.
std::string generate_caption(const std::vector<std::string>& phrases,
                             const std::vector<std::string>& templates, Rng& rng);

std::string join_phrases(const std::vector<std::string>& phrases);

inline const std::vector<std::string>& default_caption_templates() {
  static const std::vector<std::string> templates{"This audio contains the sounds of {}."};
  return templates;
}

/// One template per line; blank lines ignored; each must hold exactly one "{}".
std::vector<std::string> read_templates(const std::filesystem::path& path);

SyntheticScene synthesize_scene(const std::vector<Background>& backgrounds,
                                const std::vector<BankEvent>& bank,
                                const std::vector<std::string>& templates,
                                const MixParams& params, std::uint64_t scene_index);

struct DatasetOptions {
  int count = 0;
  int workers = 1;
  WavEncoding encoding = WavEncoding::kPcm16;
  bool write_label_sidecar = false;
};

/// Writes `count` scenes as `scenes/scene_XXXXXX.wav` plus `dataset.jsonl`
/// under output_dir. Output is independent of the worker count.
std::vector<SceneRecord> build_dataset(const std::vector<Background>& backgrounds,
                                       const std::vector<BankEvent>& bank,
                                       const std::vector<std::string>& templates,
                                       const MixParams& params,
                                       const std::filesystem::path& output_dir,
                                       const DatasetOptions& options);

// Loaders for the CLI: the event bank comes from a clipper manifest, the
// backgrounds from a JSONL list of {"id", "audio"} (or a directory of WAVs).
std::vector<BankEvent> load_event_bank(const std::filesystem::path& event_manifest,
                                       int sample_rate);
std::vector<Background> load_backgrounds(const std::filesystem::path& path, int sample_rate);

SceneRecord to_scene_record(const SyntheticScene& scene, std::string id, std::string audio,
                            double timeline_s);

}  // namespace framealign
