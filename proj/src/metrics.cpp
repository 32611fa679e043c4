#include "framealign/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "framealign/error.hpp"

namespace framealign {

std::vector<double> PsdsConfig::default_thresholds(int count) {
  std::vector<double> out;
  for (int i = 1; i <= count; ++i) out.push_back(static_cast<double>(i) / (count + 1));
  return out;
}

void PsdsConfig::validate() const {
  if (!(dtc > 0.0 && dtc <= 1.0)) throw Error("psds: dtc must lie in (0, 1]");
  if (!(gtc > 0.0 && gtc <= 1.0)) throw Error("psds: gtc must lie in (0, 1]");
  if (!(e_max > 0.0)) throw Error("psds: e_max must be positive");
  if (alpha_ct != 0.0) throw Error("psds: cross-trigger penalty (alpha_ct != 0) is not supported");
  if (alpha_st < 0.0) throw Error("psds: alpha_st must be non-negative");
  if (thresholds.empty()) throw Error("psds: threshold list is empty");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > 0.0 && thresholds[i] < 1.0)) {
      throw Error("psds: thresholds must lie in (0, 1)");
    }
    if (i > 0 && !(thresholds[i] > thresholds[i - 1])) {
      throw Error("psds: thresholds must be sorted and unique");
    }
  }
}

std::vector<LabeledEvent> binarize_scores(const Matrix& scores, const std::string& clip_id,
                                          const std::vector<std::string>& class_names,
                                          double clip_duration_s, double tau, double min_event_s,
                                          double merge_gap_s) {
  const Eigen::Index frames = scores.rows();
  if (static_cast<std::size_t>(scores.cols()) != class_names.size()) {
    throw Error("binarize_scores: score columns do not match class names");
  }
  if (frames == 0 || !(clip_duration_s > 0.0)) {
    throw Error("binarize_scores: need at least one frame and a positive duration");
  }
  const double width = clip_duration_s / static_cast<double>(frames);
  std::vector<LabeledEvent> out;
  for (Eigen::Index c = 0; c < scores.cols(); ++c) {
    struct Run {
      Eigen::Index begin, end;
      double peak;
    };
    std::vector<Run> runs;
    for (Eigen::Index l = 0; l < frames;) {
      if (scores(l, c) < tau) {
        ++l;
        continue;
      }
      Run r{l, l, scores(l, c)};
      while (l < frames && scores(l, c) >= tau) {
        r.peak = std::max(r.peak, scores(l, c));
        ++l;
      }
      r.end = l;
      if (!runs.empty() &&
          static_cast<double>(r.begin - runs.back().end) * width <= merge_gap_s + 1e-12) {
        runs.back().end = r.end;
        runs.back().peak = std::max(runs.back().peak, r.peak);
      } else {
        runs.push_back(r);
      }
    }
    for (const auto& r : runs) {
      const double on = static_cast<double>(r.begin) * width;
      const double off = static_cast<double>(r.end) * width;
      if (off - on < min_event_s - 1e-12) continue;
      out.push_back({clip_id, class_names[static_cast<std::size_t>(c)], on, off, r.peak});
    }
  }
  return out;
}

namespace {

double overlap(const LabeledEvent& a, const LabeledEvent& b) {
  return std::max(0.0, std::min(a.offset_s, b.offset_s) - std::max(a.onset_s, b.onset_s));
}

void check_interval(const LabeledEvent& e, const char* kind) {
  if (!std::isfinite(e.onset_s) || !std::isfinite(e.offset_s) || !(e.onset_s < e.offset_s)) {
    std::ostringstream msg;
    msg << "malformed " << kind << " interval in clip " << e.clip_id << " (" << e.label
        << "): [" << e.onset_s << ", " << e.offset_s << "]";
    throw Error(msg.str());
  }
}

using GroupKey = std::pair<std::string, std::string>;  // (clip, label)

}  // namespace

MatchResult match_events(const std::vector<LabeledEvent>& detections,
                         const std::vector<LabeledEvent>& ground_truth, double dtc, double gtc) {
  std::map<GroupKey, std::vector<const LabeledEvent*>> det_groups, gt_groups;
  for (const auto& d : detections) {
    check_interval(d, "detection");
    det_groups[{d.clip_id, d.label}].push_back(&d);
  }
  for (const auto& g : ground_truth) {
    check_interval(g, "ground-truth");
    gt_groups[{g.clip_id, g.label}].push_back(&g);
  }

  MatchResult result;
  for (const auto& [key, gts] : gt_groups) result.per_class[key.second].gt_count += static_cast<int>(gts.size());

  std::map<GroupKey, std::vector<const LabeledEvent*>> valid;
  for (const auto& [key, dets] : det_groups) {
    auto gt_it = gt_groups.find(key);
    for (const LabeledEvent* d : dets) {
      double inter = 0.0;
      if (gt_it != gt_groups.end()) {
        for (const LabeledEvent* g : gt_it->second) inter += overlap(*d, *g);
      }
      const double ratio = inter / (d->offset_s - d->onset_s);
      if (ratio >= dtc) {
        valid[key].push_back(d);
      } else {
        ++result.fp;
        ++result.per_class[key.second].fp;
      }
    }
  }

  for (const auto& [key, gts] : gt_groups) {
    auto v = valid.find(key);
    if (v == valid.end()) continue;
    for (const LabeledEvent* g : gts) {
      double inter = 0.0;
      for (const LabeledEvent* d : v->second) inter += overlap(*d, *g);
      if (inter / (g->offset_s - g->onset_s) >= gtc) {
        ++result.tp;
        ++result.per_class[key.second].tp;
      }
    }
  }
  return result;
}

double staircase_area(std::vector<OperatingPoint> points, double e_max) {
  std::sort(points.begin(), points.end(), [](const OperatingPoint& a, const OperatingPoint& b) {
    return std::tie(a.efpr, a.eff_tpr) < std::tie(b.efpr, b.eff_tpr);
  });
  double area = 0.0;
  double best = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].efpr >= e_max) break;
    best = std::max(best, points[i].eff_tpr);
    const double next = i + 1 < points.size() ? std::min(points[i + 1].efpr, e_max) : e_max;
    area += best * (next - points[i].efpr);
  }
  return area / e_max;
}

PsdsResult psds(const std::vector<LabeledEvent>& detections,
                const std::vector<LabeledEvent>& ground_truth, double duration_hours,
                const PsdsConfig& config) {
  config.validate();
  if (ground_truth.empty()) throw Error("psds: no ground-truth events");
  if (!(duration_hours > 0.0)) throw Error("psds: dataset duration must be positive");
  for (const auto& d : detections) {
    if (!d.score) throw Error("psds: detection in clip " + d.clip_id + " has no score");
  }

  std::set<std::string> classes;
  for (const auto& g : ground_truth) classes.insert(g.label);

  PsdsResult result;
  for (double tau : config.thresholds) {
    std::vector<LabeledEvent> kept;
    for (const auto& d : detections) {
      if (*d.score >= tau) kept.push_back(d);
    }
    const MatchResult m = match_events(kept, ground_truth, config.dtc, config.gtc);

    std::vector<double> tpr;
    for (const auto& c : classes) {
      const ClassTally& tally = m.per_class.at(c);
      tpr.push_back(static_cast<double>(tally.tp) / tally.gt_count);
    }
    const double mean = std::accumulate(tpr.begin(), tpr.end(), 0.0) / tpr.size();
    double var = 0.0;
    for (double v : tpr) var += (v - mean) * (v - mean);
    const double stddev = std::sqrt(var / tpr.size());

    OperatingPoint p;
    p.tau = tau;
    p.efpr = m.fp / duration_hours;
    p.eff_tpr = std::max(0.0, mean - config.alpha_st * stddev);
    result.points.push_back(p);
  }
  result.psds = staircase_area(result.points, config.e_max);
  return result;
}

double recall_at_k(const Matrix& similarity, int k) {
  const Eigen::Index m = similarity.rows();
  if (m == 0 || similarity.cols() != m) throw Error("recall_at_k: similarity must be square");
  if (k < 1 || k > m) throw Error("recall_at_k: k must lie in [1, m]");
  int hits = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double target = similarity(i, i);
    Eigen::Index rank = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j == i) continue;
      if (similarity(i, j) > target || (similarity(i, j) == target && j < i)) ++rank;
    }
    if (rank < k) ++hits;
  }
  return 100.0 * hits / static_cast<double>(m);
}

double zero_shot_accuracy(const Matrix& audio, const Matrix& class_text,
                          const std::vector<int>& labels) {
  if (static_cast<std::size_t>(audio.rows()) != labels.size()) {
    throw Error("zero_shot_accuracy: one label per audio row required");
  }
  if (audio.rows() == 0 || class_text.rows() == 0) throw Error("zero_shot_accuracy: empty input");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= class_text.rows()) {
      throw Error("zero_shot_accuracy: label index " + std::to_string(labels[i]) + " at row " +
                  std::to_string(i) + " out of range");
    }
  }
  const Matrix sim = cosine_matrix(audio, class_text);
  int correct = 0;
  for (Eigen::Index i = 0; i < sim.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < sim.cols(); ++c) {
      if (sim(i, c) > sim(i, best)) best = c;
    }
    if (best == labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return 100.0 * correct / static_cast<double>(sim.rows());
}

std::vector<LabeledEvent> read_events_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(path.string() + ": missing header");

  auto split = [](const std::string& s) {
    std::vector<std::string> cols;
    std::stringstream ss(s);
    std::string c;
    while (std::getline(ss, c, '\t')) {
      if (!c.empty() && c.back() == '\r') c.pop_back();
      cols.push_back(c);
    }
    return cols;
  };
  const auto header = split(line);
  auto col = [&](const std::string& name, bool required) -> int {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      if (required) throw Error(path.string() + ": header lacks column " + name);
      return -1;
    }
    return static_cast<int>(it - header.begin());
  };
  const int c_clip = col("clip_id", true), c_on = col("onset_s", true),
            c_off = col("offset_s", true), c_label = col("label", true),
            c_score = col("score", false);

  std::vector<LabeledEvent> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cols = split(line);
    const int need = std::max({c_clip, c_on, c_off, c_label, c_score});
    if (static_cast<int>(cols.size()) <= need) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": too few columns");
    }
    LabeledEvent e;
    try {
      e.clip_id = cols[static_cast<std::size_t>(c_clip)];
      e.label = cols[static_cast<std::size_t>(c_label)];
      e.onset_s = std::stod(cols[static_cast<std::size_t>(c_on)]);
      e.offset_s = std::stod(cols[static_cast<std::size_t>(c_off)]);
      if (c_score >= 0) e.score = std::stod(cols[static_cast<std::size_t>(c_score)]);
    } catch (const std::logic_error&) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": malformed number");
    }
    out.push_back(std::move(e));
  }
  return out;
}

void write_events_tsv(const std::filesystem::path& path, const std::vector<LabeledEvent>& events) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  const bool scored = std::any_of(events.begin(), events.end(),
                                  [](const LabeledEvent& e) { return e.score.has_value(); });
  out << "clip_id\tonset_s\toffset_s\tlabel" << (scored ? "\tscore" : "") << '\n';
  out.precision(17);
  for (const auto& e : events) {
    out << e.clip_id << '\t' << e.onset_s << '\t' << e.offset_s << '\t' << e.label;
    if (scored) out << '\t' << e.score.value_or(0.0);
    out << '\n';
  }
}

}  // namespace framealign
