// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <boost/math/distributions/chi_squared.hpp>

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "framealign/cli.hpp"
#include "framealign/clipper.hpp"
#include "framealign/cluster.hpp"
#include "framealign/metrics.hpp"
#include "framealign/mixer.hpp"
#include "framealign/objectives.hpp"
#include "framealign/validate.hpp"
#include "oracles.hpp"

using namespace framealign;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail.str("");
      detail << what;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double round_sig(double v, int digits) {
  if (v == 0.0) return 0.0;
  const double e = std::floor(std::log10(std::abs(v))) - (digits - 1);
  return std::round(v / std::pow(10.0, e)) * std::pow(10.0, e);
}

// Compare at min(6, digits the reference states) significant figures.
bool agrees(double value, double reference, int stated_digits) {
  const int n = std::min(6, stated_digits);
  return std::abs(round_sig(value, n) - round_sig(reference, n)) <= 1e-12 * std::abs(reference);
}

Json cli(const std::vector<std::string>& args, int& code) {
  std::ostringstream out, err;
  code = run_cli(args, out, err);
  return out.str().empty() ? Json{} : Json::parse(out.str());
}

// ---------------------------------------------------------------- criteria

void gradient_fidelity(Outcome& o) {
  const auto t0 = Clock::now();
  Rng rng(20240601);
  double worst = 0.0;
  std::string where;
  for (int trial = 0; trial < 100; ++trial) {
    const auto batch = oracle::random_batch(rng);
    const LossParams p{rng.uniform(1.0, 15.0), rng.uniform(-12.0, 0.0), rng.uniform(1.0, 15.0),
                       rng.uniform(-12.0, 0.0)};
    for (auto kind : {LossKind::kClip, LossKind::kFrame, LossKind::kTotal, LossKind::kInfoNce}) {
      const auto rep = gradient_check(kind, batch, p);
      if (rep.max_rel_error > worst) {
        worst = rep.max_rel_error;
        where = to_string(kind) + " batch " + std::to_string(trial) + " " + rep.worst_coordinate;
      }
    }
  }
  const double elapsed = seconds_since(t0);
  o.detail << "max rel error " << worst << " (" << where << "), " << elapsed << " s";
  o.require(worst < 1e-6, "max rel error " + std::to_string(worst) + " at " + where);
  o.require(elapsed < 30.0, "took " + std::to_string(elapsed) + " s");
}

void oracle_equivalence(Outcome& o) {
  Rng rng(77);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto b = oracle::random_batch(rng);
    const double t = rng.uniform(0.5, 15.0), bias = rng.uniform(-12.0, 2.0);
    worst = std::max(worst, std::abs(clip_sigmoid_loss(b.clip, t, bias).value -
                                     oracle::clip_loss(b.clip.audio, b.clip.text, b.clip.match, t, bias)));
    worst = std::max(worst, std::abs(frame_sigmoid_loss(b.frame, t, bias).value -
                                     oracle::frame_loss(b.frame.frames, b.frame.phrases, b.frame.labels, t, bias)));
  }
  o.require(worst <= 1e-12, "oracle mismatch " + std::to_string(worst));

  struct Fixture {
    const char* name;
    const char* kind;
    double expected;
    int digits;
  };
  const Fixture fixtures[] = {{"b1_s1", "clip", 2.0612e-9, 5},
                              {"b1_s0", "clip", 4.5399e-5, 5},
                              {"b2_orthonormal", "clip", 10.0000454, 9},
                              {"frame_l2", "frame", 10.0000000015, 12}};
  for (const auto& f : fixtures) {
    int code = 0;
    const Json r = cli({"loss", "--kind", f.kind, "--fixture", f.name}, code);
    const double v = code == 0 ? r["value"].get<double>() : std::nan("");
    o.require(code == 0 && agrees(v, f.expected, f.digits),
              std::string(f.name) + " gave " + std::to_string(v));
  }
  o.detail << "50 batches, max |loss - oracle| " << worst << "; 4 fixtures agree";
}

void infonce_degeneracies(Outcome& o) {
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const Matrix g = oracle::random_matrix(rng, 1, 8), t = oracle::random_matrix(rng, 1, 8);
    const double v = infonce_loss(g, t, rng.uniform(0.1, 50.0)).value;
    o.require(v == 0.0, "B=1 gave " + std::to_string(v));
  }
  Matrix same(2, 3);
  same << 0.3, -0.1, 0.7, 0.3, -0.1, 0.7;
  const double u = infonce_loss(same, same, 10.0).value;
  o.require(std::abs(u - std::log(2.0)) <= 1e-12, "uniform B=2 gave " + std::to_string(u));
  o.detail << "B=1 -> 0 exactly (20 draws); uniform B=2 -> " << std::setprecision(17) << u;
}

void sampler_conformance(Outcome& o) {
  const ClusterSpace space = fixtures::make_space();
  Rng rng(314);
  std::size_t checked = 0;
  for (int i = 0; i < 1000; ++i) {
    SceneRecord scene;
    scene.id = "scene_" + std::to_string(i);
    const auto k = rng.uniform_int(1, 5);
    std::set<std::string> used;
    while (static_cast<std::int64_t>(used.size()) < k) {
      const auto c = static_cast<int>(rng.uniform_int(0, fixtures::kClusters - 1));
      const auto j = static_cast<int>(rng.uniform_int(0, fixtures::kPerCluster - 1));
      const std::string p = fixtures::phrase_name(c, j);
      if (!used.insert(p).second) continue;
      const double on = rng.uniform(0.0, 8.0);
      scene.events.push_back({p, on, on + rng.uniform(0.2, 2.0), 15.0, {}});
    }
    const auto ann = enrich_scene(scene, space, {20, false}, 64, 2024);
    const auto expected_pos = render_frame_labels(scene, 64);

    o.require(ann.phrases.size() == 20 && ann.labels.size() == 20, scene.id + ": size != 20");
    o.require(ann.positive_count == expected_pos.size(), scene.id + ": positive count");
    std::set<int> pos_clusters;
    for (std::size_t q = 0; q < expected_pos.size(); ++q) {
      o.require(ann.phrases[q] == expected_pos[q].phrase && ann.labels[q] == expected_pos[q].labels,
                scene.id + ": positive " + std::to_string(q) + " altered");
      pos_clusters.insert(fixtures::cluster_of_name(expected_pos[q].phrase));
    }
    // Brute-force pool: every database phrase whose (name-derived) cluster
    // is not a positive cluster.
    std::set<std::string> pool;
    for (int c = 0; c < fixtures::kClusters; ++c) {
      if (pos_clusters.contains(c)) continue;
      for (int j = 0; j < fixtures::kPerCluster; ++j) pool.insert(fixtures::phrase_name(c, j));
    }
    std::set<std::string> seen;
    for (std::size_t q = expected_pos.size(); q < ann.phrases.size(); ++q) {
      const auto& p = ann.phrases[q];
      o.require(pool.contains(p), scene.id + ": ineligible negative " + p);
      o.require(!pos_clusters.contains(fixtures::cluster_of_name(p)), scene.id + ": shared cluster " + p);
      o.require(seen.insert(p).second, scene.id + ": repeated negative " + p);
      o.require(std::all_of(ann.labels[q].begin(), ann.labels[q].end(), [](auto v) { return v == 0; }),
                scene.id + ": nonzero negative labels");
      ++checked;
    }
  }
  o.detail << "1000 scenes, " << checked << " negatives checked against enumerated pools";
}

void mixer_snr(Outcome& o) {
  const auto bank = fixtures::memory_bank(12);
  const auto bgs = fixtures::memory_backgrounds(3);
  MixParams p;
  p.seed = 99;
  double worst = 0.0;
  std::size_t placements = 0;
  for (std::uint64_t i = 0; i < 500; ++i) {
    const SyntheticScene s = synthesize_scene(bgs, bank, default_caption_templates(), p, i);
    const auto& pl = s.recipe.placements;
    o.require(!pl.empty() && pl.size() <= 5, "event count out of range");
    const AudioClip* bg = nullptr;
    for (const auto& b : bgs) {
      if (b.id == s.recipe.background_id) bg = &b.audio;
    }
    const double bg_rms = rms(std::span(bg->samples).first(160000));
    for (std::size_t q = 0; q < pl.size(); ++q) {
      o.require(pl[q].snr_db >= 12.0 && pl[q].snr_db <= 20.0, "SNR outside [12, 20]");
      // Isolate this placement from the rendered mixture (undo the peak
      // rescale, remove background and the other placements).
      std::vector<double> fg(s.audio.samples);
      for (std::size_t k = 0; k < fg.size(); ++k) fg[k] = fg[k] / s.recipe.rescale - bg->samples[k];
      for (std::size_t r = 0; r < pl.size(); ++r) {
        if (r == q) continue;
        const auto& ev = bank[std::stoul(pl[r].event_id.substr(2))].audio;
        const auto on = static_cast<std::size_t>(std::llround(pl[r].onset_s * 16000));
        for (int rep = 0; rep < pl[r].repeat_count; ++rep) {
          for (std::size_t k = 0; k < ev.size(); ++k) fg[on + rep * ev.size() + k] -= pl[r].gain * ev.samples[k];
        }
      }
      const auto on = static_cast<std::size_t>(std::llround(pl[q].onset_s * 16000));
      const auto off = static_cast<std::size_t>(std::llround(pl[q].offset_s * 16000));
      const double measured = 20.0 * std::log10(rms(std::span(fg).subspan(on, off - on)) / bg_rms);
      worst = std::max(worst, std::abs(measured - pl[q].snr_db));
      ++placements;
    }
  }
  o.require(worst <= 0.1, "SNR error " + std::to_string(worst) + " dB");

  // Distribution checks on 10,000 plans.
  const int draws = 10000, snr_bins = 8;
  std::vector<double> m_count(5, 0.0), snr_count(snr_bins, 0.0);
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(draws); ++i) {
    const SceneRecipe r = plan_scene(bgs[0], bank, p, 100000 + i);
    m_count[r.placements.size() - 1] += 1.0;
    const double x = (r.placements[0].snr_db - 12.0) / 8.0;
    snr_count[std::min(snr_bins - 1, static_cast<int>(x * snr_bins))] += 1.0;
  }
  auto p_value = [&](const std::vector<double>& counts) {
    const double e = static_cast<double>(draws) / counts.size();
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - e) * (c - e) / e;
    boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, chi2));
  };
  const double pm = p_value(m_count), ps = p_value(snr_count);
  o.require(pm > 0.01, "event count chi-square p = " + std::to_string(pm));
  o.require(ps > 0.01, "SNR chi-square p = " + std::to_string(ps));
  o.detail << placements << " placements, max |measured - drawn| " << worst << " dB; chi-square p(M) = "
           << pm << ", p(SNR) = " << ps;
}

void determinism(Outcome& o, const fs::path& events, const fs::path& backgrounds, const fs::path& work) {
  for (const char* w : {"1", "8"}) {
    int code = 0;
    cli({"mix", "--events", events.string(), "--backgrounds", backgrounds.string(), "--output-dir",
         (work / (std::string("mix_w") + w)).string(), "--count", "100", "--seed", "7", "--workers", w},
        code);
    o.require(code == 0, std::string("mix failed with workers ") + w);
  }
  const auto a = work / "mix_w1", b = work / "mix_w8";
  o.require(fixtures::slurp(a / "dataset.jsonl") == fixtures::slurp(b / "dataset.jsonl"), "manifests differ");
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a / "scenes")) {
    const auto other = b / "scenes" / entry.path().filename();
    o.require(fs::exists(other) && fixtures::slurp(entry.path()) == fixtures::slurp(other),
              "audio differs: " + entry.path().filename().string());
    ++files;
  }
  o.require(files == 100, "expected 100 scene files, found " + std::to_string(files));
  o.detail << "dataset.jsonl and " << files << " WAVs byte-identical for workers 1 vs 8";
}

void clipper_conformance(Outcome& o) {
  const ClipperParams p;
  struct Case {
    AudioClip clip;
    std::optional<std::pair<double, double>> truth;
  };
  std::vector<Case> cases;
  cases.push_back({fixtures::tone_fixture(), std::pair{2.0, 5.0}});
  for (int i = 0; i < 12; ++i) {
    const double on = 0.3 + 0.41 * i, len = 1.1 + 0.5 * i;
    AudioClip c = fixtures::silence(12.0);
    fixtures::add_tone(c, on, on + len, fixtures::dbfs_amplitude(-15.0 + i) * std::sqrt(2.0), 200.0 + 60 * i);
    cases.push_back({c, len <= 7.5 ? std::optional(std::pair{on, on + len}) : std::nullopt});
  }
  {
    AudioClip c = fixtures::silence(8.0);
    const double a = fixtures::dbfs_amplitude(-6.0) * std::sqrt(2.0);
    fixtures::add_tone(c, 1.0, 2.5, a);
    fixtures::add_tone(c, 2.65, 4.0, a);  // gap 0.15 s, bridged
    cases.push_back({c, std::pair{1.0, 4.0}});
  }
  {
    AudioClip c = fixtures::noise(8.0, 0.01, 3);  // -43 dBFS floor
    fixtures::add_tone(c, 3.0, 6.5, 0.5);
    cases.push_back({c, std::pair{3.0, 6.5}});
  }
  cases.push_back({fixtures::silence(8.0), std::nullopt});
  cases.push_back({fixtures::noise(8.0, 0.01, 4), std::nullopt});
  cases.push_back({fixtures::tone_fixture(3.0, 3.4), std::nullopt});
  cases.push_back({fixtures::tone_fixture(1.0, 1.8), std::nullopt});
  cases.push_back({fixtures::tone_fixture(0.5, 9.0, 10.0), std::nullopt});

  double worst = 0.0;
  int accepted = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto seg = extract_event_segment(cases[i].clip, p);
    const std::string tag = "case " + std::to_string(i);
    if (!cases[i].truth) {
      o.require(!seg, tag + ": expected no segment");
      continue;
    }
    o.require(seg.has_value(), tag + ": expected a segment");
    if (!seg) continue;
    ++accepted;
    const double err = std::max(std::abs(seg->onset_s - cases[i].truth->first),
                                std::abs(seg->offset_s - cases[i].truth->second));
    worst = std::max(worst, err);
    o.require(err <= p.hop_s + 1e-9, tag + ": boundary error " + std::to_string(err));
    o.require(seg->duration_s() >= 1.0 && seg->duration_s() <= 7.5, tag + ": duration out of range");
  }
  o.detail << cases.size() << " fixtures, " << accepted << " accepted, max boundary error " << worst
           << " s (hop " << p.hop_s << " s)";
}

void frame_labels(Outcome& o) {
  SceneRecipe r{"bg", {{"e", "c0_p0", 1, 1.0, 2.0, 15.0, 1.0}}, 1.0};
  const auto ann = render_frame_labels(r, 64, 10.0);
  const auto scan = oracle::frame_scan(1.0, 2.0, 64, 10.0);
  o.require(ann.size() == 1 && ann[0].labels == scan, "labels differ from brute-force scan");
  for (int l = 0; l < 64; ++l) {
    o.require(ann[0].labels[static_cast<std::size_t>(l)] == (l >= 6 && l <= 12 ? 1 : 0),
              "frame " + std::to_string(l));
  }
  SceneRecord scene;
  scene.id = "fixture";
  scene.events = {{"c0_p0", 1.0, 2.0, 15.0, {}}};
  const auto enriched = enrich_scene(scene, fixtures::make_space(), {20, false}, 64, 1);
  o.require(enriched.labels[0] == scan, "positive labels changed by enrichment");
  for (std::size_t k = 1; k < enriched.labels.size(); ++k) {
    o.require(std::all_of(enriched.labels[k].begin(), enriched.labels[k].end(), [](auto v) { return v == 0; }),
              "negative phrase has a positive frame");
  }
  o.detail << "positives exactly on frames 6..12, 19 negatives all-zero";
}

void psds_cases(Outcome& o) {
  const PsdsConfig cfg;
  auto gt = [](std::string c, double a, double b) { return LabeledEvent{std::move(c), "x", a, b, std::nullopt}; };
  auto det = [](std::string c, double a, double b, double s) { return LabeledEvent{std::move(c), "x", a, b, s}; };
  const std::vector<LabeledEvent> gts{gt("c1", 1, 3), gt("c2", 2, 6)};
  const double perfect = psds({det("c1", 1, 3, 1.0), det("c2", 2, 6, 1.0)}, gts, 1.0, cfg).psds;
  const double none = psds({}, gts, 1.0, cfg).psds;
  const double half = psds({det("c1", 1, 3, 1.0)}, gts, 1.0, cfg).psds;
  o.require(std::abs(perfect - 1.0) <= 1e-9, "perfect gave " + std::to_string(perfect));
  o.require(none == 0.0, "empty gave " + std::to_string(none));
  o.require(std::abs(half - 0.5) <= 1e-9, "half-recall gave " + std::to_string(half));

  const auto tp = match_events({det("c", 0, 10, 1)}, {gt("c", 0, 7)}, 0.7, 0.7);
  const auto fp = match_events({det("c", 0, 10, 1)}, {gt("c", 0, 6)}, 0.7, 0.7);
  o.require(tp.tp == 1 && tp.fp == 0, "7/10 overlap not a TP");
  o.require(fp.tp == 0 && fp.fp == 1, "6/10 overlap not an FP");

  Rng rng(11);
  double min_gain = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<LabeledEvent> g, d;
    const std::vector<std::string> labels{"a", "b", "c"};
    for (int i = 0; i < 6; ++i) {
      const double a = rng.uniform(0, 8);
      g.push_back({"clip" + std::to_string(i % 3), labels[i % 3], a, a + rng.uniform(0.5, 2), std::nullopt});
    }
    for (int i = 0; i < 10; ++i) {
      const double a = rng.uniform(0, 8);
      d.push_back({"clip" + std::to_string(rng.uniform_int(0, 2)), labels[rng.uniform_int(0, 2)], a,
                   a + rng.uniform(0.3, 2.5), rng.uniform()});
    }
    PsdsConfig coarse;
    coarse.alpha_st = rng.uniform(0, 1);
    coarse.e_max = rng.uniform(50, 500);
    coarse.thresholds = {0.2, 0.5, 0.8};
    PsdsConfig fine = coarse;
    for (int i = 0; i < 5; ++i) fine.thresholds.push_back(rng.uniform(0.01, 0.99));
    std::sort(fine.thresholds.begin(), fine.thresholds.end());
    fine.thresholds.erase(std::unique(fine.thresholds.begin(), fine.thresholds.end()), fine.thresholds.end());
    const double hours = rng.uniform(0.01, 0.1);
    const double gain = psds(d, g, hours, fine).psds - psds(d, g, hours, coarse).psds;
    min_gain = std::min(min_gain, gain);
    o.require(gain >= -1e-12, "refinement lowered PSDS in trial " + std::to_string(trial));
  }
  o.detail << "perfect " << perfect << ", empty " << none << ", half " << half
           << "; 7/10 TP, 6/10 FP; 100 refinements, min change " << min_gain;
}

void retrieval(Outcome& o) {
  o.require(recall_at_k(Matrix::Identity(6, 6), 1) == 100.0, "identity R@1");
  Matrix rev = Matrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) rev(i, 3 - i) = 1.0;
  o.require(recall_at_k(rev, 1) == 0.0, "reversed R@1");
  o.require(recall_at_k(rev, 4) == 100.0, "reversed R@4");
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = static_cast<Eigen::Index>(rng.uniform_int(2, 20));
    const Matrix s = oracle::random_matrix(rng, m, m);
    const Matrix a = s.unaryExpr([](double v) { return std::exp(2.0 * v); });
    const Matrix b = s.unaryExpr([](double v) { return 3.0 * v * v * v + 5.0; });
    for (int k = 1; k <= m; ++k) {
      const double r = recall_at_k(s, k);
      o.require(r == recall_at_k(a, k) && r == recall_at_k(b, k), "transform changed R@" + std::to_string(k));
    }
  }
  o.detail << "identity 100, reversed R@1 0 / R@4 100, 100 matrices invariant";
}

void end_to_end(Outcome& o, const fs::path& work) {
  const auto t0 = Clock::now();
  const auto bank = fixtures::write_source_bank(work / "sources", 20);
  fixtures::write_backgrounds(work / "backgrounds", 4);
  fixtures::write_cluster_files(work / "centroids.jsonl", work / "phrases.jsonl");

  int code = 0;
  Json r = cli({"clip", "--input", bank.manifest.string(), "--output-dir", (work / "bank").string()}, code);
  o.require(code == 0, "clip failed: " + r.dump());
  o.require(r["result"]["events"] == 20, "clip accepted " + r["result"]["events"].dump() + " of 20");
  r = cli({"mix", "--events", (work / "bank" / "events.jsonl").string(), "--backgrounds",
           (work / "backgrounds").string(), "--output-dir", (work / "mix").string(), "--count", "100",
           "--seed", "7", "--workers", "4"},
          code);
  o.require(code == 0, "mix failed: " + r.dump());
  r = cli({"enrich", "--input", (work / "mix" / "dataset.jsonl").string(), "--centroids",
           (work / "centroids.jsonl").string(), "--phrases", (work / "phrases.jsonl").string(), "--output",
           (work / "mix" / "enriched.jsonl").string(), "--n", "20", "--seed", "3"},
          code);
  o.require(code == 0, "enrich failed: " + r.dump());

  std::size_t rows = 0, errors = 0;
  for (const auto& m : {work / "sources" / "sources.jsonl", work / "bank" / "events.jsonl",
                        work / "bank" / "rejections.jsonl", work / "mix" / "dataset.jsonl"}) {
    r = cli({"validate", m.string()}, code);
    rows += r.value("rows", std::size_t{0});
    errors += r["errors"].size();
    o.require(code == 0, "validate " + m.filename().string() + ": " + r["errors"].dump());
  }
  r = cli({"validate", (work / "mix" / "enriched.jsonl").string(), "--centroids",
           (work / "centroids.jsonl").string(), "--phrases", (work / "phrases.jsonl").string(), "--n", "20"},
          code);
  rows += r.value("rows", std::size_t{0});
  errors += r["errors"].size();
  o.require(code == 0 && r["rows"] == 100, "validate enriched: " + r["errors"].dump());
  const double elapsed = seconds_since(t0);
  o.require(elapsed < 60.0, "took " + std::to_string(elapsed) + " s");
  o.detail << rows << " rows validated, " << errors << " violations, " << elapsed << " s";
}

}  // namespace

int main() {
  fixtures::TempDir work("fa_acceptance");
  // Shared bank for the determinism check.
  const auto src = fixtures::write_source_bank(work / "det_sources", 20);
  fixtures::write_backgrounds(work / "det_bg", 4);
  {
    int code = 0;
    cli({"clip", "--input", src.manifest.string(), "--output-dir", (work / "det_bank").string()}, code);
  }

  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"AC1 gradient fidelity", gradient_fidelity},
      {"AC2 loss oracle equivalence", oracle_equivalence},
      {"AC3 InfoNCE degeneracies", infonce_degeneracies},
      {"AC4 negative sampler conformance", sampler_conformance},
      {"AC5 mixer SNR accuracy", mixer_snr},
      {"AC6 determinism", [&](Outcome& o) {
         determinism(o, work / "det_bank" / "events.jsonl", work / "det_bg", work.path());
       }},
      {"AC7 clipper conformance", clipper_conformance},
      {"AC8 frame labels", frame_labels},
      {"AC9 PSDS oracle cases", psds_cases},
      {"AC10 retrieval metrics", retrieval},
      {"AC11 end-to-end smoke", [&](Outcome& o) { end_to_end(o, work / "e2e"); }},
  };

  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail.str("");
      o.detail << "exception: " << e.what();
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail.str() << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
