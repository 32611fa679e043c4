#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "framealign/objectives.hpp"

namespace framealign {

/// Detection (carries a score) or ground-truth (no score) interval.
struct LabeledEvent {
  std::string clip_id;
  std::string label;
  double onset_s = 0.0;
  double offset_s = 0.0;
  std::optional<double> score;
};

struct PsdsConfig {
  double dtc = 0.7;
  double gtc = 0.7;
  double alpha_st = 1.0;
  double alpha_ct = 0.0;
  double e_max = 100.0;  // false positives per hour
  std::vector<double> thresholds = default_thresholds();

  static std::vector<double> default_thresholds(int count = 50);
  void validate() const;
};

/// Per-class runs of frames with score >= tau, as events on frame
/// boundaries. `scores` is L x C; column c belongs to class_names[c].
std::vector<LabeledEvent> binarize_scores(const Matrix& scores, const std::string& clip_id,
                                          const std::vector<std::string>& class_names,
                                          double clip_duration_s, double tau,
                                          double min_event_s = 0.0, double merge_gap_s = 0.0);

struct ClassTally {
  int tp = 0;         // recalled ground truths
  int fp = 0;         // detections failing the DTC criterion
  int gt_count = 0;
};

struct MatchResult {
  int tp = 0;
  int fp = 0;
  std::map<std::string, ClassTally> per_class;
};

/// Intersection-criteria matching within each (clip, class) group.
MatchResult match_events(const std::vector<LabeledEvent>& detections,
                         const std::vector<LabeledEvent>& ground_truth, double dtc, double gtc);

struct OperatingPoint {
  double tau = 0.0;
  double efpr = 0.0;
  double eff_tpr = 0.0;
};

struct PsdsResult {
  double psds = 0.0;
  std::vector<OperatingPoint> points;
};

/// Detections are kept at threshold tau when score >= tau.
PsdsResult psds(const std::vector<LabeledEvent>& detections,
                const std::vector<LabeledEvent>& ground_truth, double duration_hours,
                const PsdsConfig& config);

/// Normalized area under the upper staircase of (efpr, eff_tpr) on [0, e_max].
double staircase_area(std::vector<OperatingPoint> points, double e_max);

/// Percentage of rows whose diagonal entry ranks within the top k; ties go to
/// the lower column index.
double recall_at_k(const Matrix& similarity, int k);

/// Percentage of clips whose nearest class embedding (cosine) is the label.
double zero_shot_accuracy(const Matrix& audio, const Matrix& class_text,
                          const std::vector<int>& labels);

// TSV with header naming clip_id, onset_s, offset_s, label and optional score.
std::vector<LabeledEvent> read_events_tsv(const std::filesystem::path& path);
void write_events_tsv(const std::filesystem::path& path, const std::vector<LabeledEvent>& events);

}  // namespace framealign
