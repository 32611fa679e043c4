#include "framealign/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "framealign/clipper.hpp"
#include "framealign/cluster.hpp"
#include "framealign/error.hpp"
#include "framealign/manifest.hpp"
#include "framealign/metrics.hpp"
#include "framealign/mixer.hpp"
#include "framealign/objectives.hpp"
#include "framealign/tensor_io.hpp"
#include "framealign/validate.hpp"

namespace framealign {

EmbeddingBatch named_loss_fixture(const std::string& name);

namespace {

WavEncoding parse_encoding(const std::string& s) {
  if (s == "pcm16") return WavEncoding::kPcm16;
  if (s == "float32") return WavEncoding::kFloat32;
  if (s == "float64") return WavEncoding::kFloat64;
  throw Error("unknown wav format \"" + s + "\" (expected pcm16|float32|float64)");
}

BiasConvention parse_convention(const std::string& s) {
  if (s == "printed") return BiasConvention::kPrinted;
  if (s == "siglip") return BiasConvention::kSiglip;
  throw Error("unknown bias convention \"" + s + "\" (expected printed|siglip)");
}

struct ClipArgs {
  std::string input, output_dir;
  ClipperParams params;
  std::string wav_format = "pcm16";
  int workers = 1;
};

struct MixArgs {
  std::string events, backgrounds, templates, output_dir;
  MixParams params;
  int count = 0;
  int workers = 1;
  int sample_rate = 16000;
  std::string wav_format = "pcm16";
  bool label_sidecar = false;
};

struct EnrichArgs {
  std::string input, centroids, phrases, output;
  std::size_t n = 20;
  std::uint64_t seed = 0;
  int frames = 64;
  bool allow_replacement = false;
  int workers = 1;
};

struct LossArgs {
  std::string kind = "total";
  std::string fixture;
  std::string g, t, f, p, y, match;
  LossParams params;
  std::string convention = "printed";
  bool grad_check = false;
  double epsilon = 1e-5;
  std::string output;
};

struct PsdsArgs {
  std::string detections, ground_truth, output;
  double duration_hours = 0.0;
  double clip_duration_s = 0.0;
  PsdsConfig config;
  int threshold_count = 50;
};

struct RetrievalArgs {
  std::string similarity, audio, text, output;
  std::vector<int> ks{1, 5, 10};
};

struct AccuracyArgs {
  std::string audio, classes, labels, output;
};

struct ValidateArgs {
  std::string manifest;
  ValidationOptions options;
  std::string centroids, phrases;
  std::size_t n = 0;
  bool no_audio = false;
};

void emit(std::ostream& out, const Json& report, const std::string& output_path) {
  out << report.dump(2) << '\n';
  if (!output_path.empty()) {
    std::ofstream f(output_path, std::ios::trunc);
    if (!f) throw Error("cannot write " + output_path);
    f << report.dump(2) << '\n';
  }
}

Json error_report(const std::string& type, const std::string& message) {
  return Json{{"ok", false}, {"error", {{"type", type}, {"message", message}}}};
}

double grad_norm(const std::vector<Matrix>& ms) {
  double acc = 0.0;
  for (const auto& m : ms) acc += m.squaredNorm();
  return std::sqrt(acc);
}

EmbeddingBatch load_loss_inputs(const LossArgs& a) {
  if (!a.fixture.empty()) return named_loss_fixture(a.fixture);
  EmbeddingBatch batch;
  if (!a.g.empty() || !a.t.empty()) {
    if (a.g.empty() || a.t.empty()) throw Error("loss: --G and --T must be given together");
    batch.clip.audio = to_matrix(read_tensor(a.g));
    batch.clip.text = to_matrix(read_tensor(a.t));
    if (!a.match.empty()) batch.clip.match = to_matrix(read_tensor(a.match));
  }
  if (!a.f.empty() || !a.p.empty() || !a.y.empty()) {
    if (a.f.empty() || a.p.empty() || a.y.empty()) {
      throw Error("loss: --F, --P and --Y must be given together");
    }
    batch.frame.frames = to_matrices(read_tensor(a.f));
    batch.frame.phrases = to_matrices(read_tensor(a.p));
    batch.frame.labels = to_matrices(read_tensor(a.y));
    if (batch.frame.phrases.size() != batch.frame.labels.size()) {
      throw Error("loss: --P and --Y disagree on the batch size");
    }
    // Rank-3 files need a common N; all-zero phrase rows mark padding.
    for (std::size_t i = 0; i < batch.frame.phrases.size(); ++i) {
      Matrix& ph = batch.frame.phrases[i];
      Matrix& lab = batch.frame.labels[i];
      if (lab.rows() != ph.rows()) continue;  // shape error reported by the loss
      std::vector<Eigen::Index> keep;
      for (Eigen::Index r = 0; r < ph.rows(); ++r) {
        if (ph.row(r).squaredNorm() > 0.0) keep.push_back(r);
      }
      if (keep.size() == static_cast<std::size_t>(ph.rows())) continue;
      Matrix kept_ph(static_cast<Eigen::Index>(keep.size()), ph.cols());
      Matrix kept_lab(static_cast<Eigen::Index>(keep.size()), lab.cols());
      for (std::size_t k = 0; k < keep.size(); ++k) {
        kept_ph.row(static_cast<Eigen::Index>(k)) = ph.row(keep[k]);
        kept_lab.row(static_cast<Eigen::Index>(k)) = lab.row(keep[k]);
      }
      ph = std::move(kept_ph);
      lab = std::move(kept_lab);
    }
  }
  return batch;
}

}  // namespace

EmbeddingBatch named_loss_fixture(const std::string& name) {
  auto rows = [](std::initializer_list<std::initializer_list<double>> r) {
    Matrix m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& row : r) {
      Eigen::Index j = 0;
      for (double v : row) m(i, j++) = v;
      ++i;
    }
    return m;
  };
  EmbeddingBatch b;
  if (name == "b1_s1") {
    b.clip.audio = rows({{1, 0}});
    b.clip.text = rows({{1, 0}});
  } else if (name == "b1_s0") {
    b.clip.audio = rows({{1, 0}});
    b.clip.text = rows({{0, 1}});
  } else if (name == "b2_orthonormal") {
    b.clip.audio = rows({{1, 0}, {0, 1}});
    b.clip.text = rows({{1, 0}, {0, 1}});
  } else if (name == "b2_uniform") {
    b.clip.audio = rows({{1, 0}, {1, 0}});
    b.clip.text = rows({{1, 0}, {1, 0}});
  } else if (name == "frame_l2") {
    b.frame.frames = {rows({{1, 0}, {1, 0}})};
    b.frame.phrases = {rows({{1, 0}})};
    b.frame.labels = {rows({{1, 0}})};
  } else if (name == "frame_all_pos") {
    b.frame.frames = {rows({{1, 0}, {1, 0}})};
    b.frame.phrases = {rows({{1, 0}})};
    b.frame.labels = {rows({{1, 1}})};
  } else {
    throw Error("unknown fixture \"" + name +
                "\" (b1_s1|b1_s0|b2_orthonormal|b2_uniform|frame_l2|frame_all_pos)");
  }
  return b;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"framealign: strong-label scene synthesis, phrase sampling, alignment "
               "objectives and SED metrics",
               "framealign"};
  app.set_config("--config", "", "INI/TOML config file; command-line flags override it");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  // ---- clip
  ClipArgs clip;
  auto* c = app.add_subcommand("clip", "Cut single-event segments from source recordings");
  c->add_option("--input", clip.input, "Source manifest (JSONL {id, audio, label})")
      ->required()
      ->envname("FRAMEALIGN_CLIP_INPUT");
  c->add_option("--output-dir", clip.output_dir, "Output directory")
      ->required()
      ->envname("FRAMEALIGN_CLIP_OUTPUT_DIR");
  c->add_option("--threshold-db", clip.params.threshold_db, "Energy threshold (dBFS)")
      ->capture_default_str();
  c->add_option("--window-s", clip.params.window_s)->capture_default_str();
  c->add_option("--hop-s", clip.params.hop_s)->capture_default_str();
  c->add_option("--merge-gap-s", clip.params.merge_gap_s)->capture_default_str();
  c->add_option("--min-dur-s", clip.params.min_dur_s)->capture_default_str();
  c->add_option("--max-dur-s", clip.params.max_dur_s)->capture_default_str();
  c->add_option("--sample-rate", clip.params.sample_rate)->capture_default_str();
  c->add_option("--wav-format", clip.wav_format, "pcm16|float32|float64")->capture_default_str();
  c->add_option("--workers", clip.workers)->capture_default_str();

  // ---- mix
  MixArgs mix;
  auto* m = app.add_subcommand("mix", "Synthesize scenes with frame labels and captions");
  m->add_option("--events", mix.events, "Event manifest from `clip`")
      ->required()
      ->envname("FRAMEALIGN_MIX_EVENTS");
  m->add_option("--backgrounds", mix.backgrounds, "Directory of WAVs or JSONL {id, audio}")
      ->required()
      ->envname("FRAMEALIGN_MIX_BACKGROUNDS");
  m->add_option("--templates", mix.templates, "Caption templates, one per line with {}")
      ->envname("FRAMEALIGN_MIX_TEMPLATES");
  m->add_option("--output-dir", mix.output_dir)->required()->envname("FRAMEALIGN_MIX_OUTPUT_DIR");
  m->add_option("--count", mix.count, "Number of scenes")->required();
  m->add_option("--seed", mix.params.seed)->required();
  m->add_option("--workers", mix.workers)->capture_default_str();
  m->add_option("--timeline-s", mix.params.timeline_s)->capture_default_str();
  m->add_option("--max-events", mix.params.max_events)->capture_default_str();
  m->add_option("--repeat-max", mix.params.repeat_max)->capture_default_str();
  m->add_option("--repeat-threshold-s", mix.params.repeat_threshold_s)->capture_default_str();
  m->add_option("--snr-min-db", mix.params.snr_min_db)->capture_default_str();
  m->add_option("--snr-max-db", mix.params.snr_max_db)->capture_default_str();
  m->add_option("--frames", mix.params.frames_per_clip, "Frames per clip (L)")
      ->capture_default_str();
  m->add_option("--sample-rate", mix.sample_rate)->capture_default_str();
  m->add_option("--wav-format", mix.wav_format)->capture_default_str();
  m->add_flag("--label-sidecar", mix.label_sidecar, "Also write L x K label CSVs");

  // ---- enrich
  EnrichArgs enr;
  auto* e = app.add_subcommand("enrich", "Pad each scene's phrases to N with cluster-disjoint negatives");
  e->add_option("--input", enr.input, "Dataset manifest")->required()->envname("FRAMEALIGN_ENRICH_INPUT");
  e->add_option("--centroids", enr.centroids)->required()->envname("FRAMEALIGN_CENTROIDS");
  e->add_option("--phrases", enr.phrases, "Phrase database")->required()->envname("FRAMEALIGN_PHRASES");
  e->add_option("--output", enr.output)->required()->envname("FRAMEALIGN_ENRICH_OUTPUT");
  e->add_option("--n", enr.n, "Phrase set size N")->capture_default_str();
  e->add_option("--seed", enr.seed)->required();
  e->add_option("--frames", enr.frames)->capture_default_str();
  e->add_flag("--allow-replacement", enr.allow_replacement,
              "Sample with replacement when the negative pool is too small");
  e->add_option("--workers", enr.workers)->capture_default_str();

  // ---- loss
  LossArgs loss;
  auto* l = app.add_subcommand("loss", "Evaluate an objective (and optionally check its gradients)");
  l->add_option("--kind", loss.kind, "clip|frame|total|infonce")->capture_default_str();
  l->add_option("--fixture", loss.fixture, "Built-in input fixture");
  l->add_option("--G", loss.g, "Global audio embeddings, B x d");
  l->add_option("--T", loss.t, "Caption embeddings, B x d");
  l->add_option("--match", loss.match, "B x B match matrix (default identity)");
  l->add_option("--F", loss.f, "Frame embeddings, B x L x d");
  l->add_option("--P", loss.p, "Phrase embeddings, B x N x d");
  l->add_option("--Y", loss.y, "Frame labels, B x N x L");
  l->add_option("--t", loss.params.t)->capture_default_str();
  l->add_option("--b", loss.params.b)->capture_default_str();
  l->add_option("--t-frame", loss.params.t_frame)->capture_default_str();
  l->add_option("--b-frame", loss.params.b_frame)->capture_default_str();
  l->add_option("--convention", loss.convention, "printed|siglip")->capture_default_str();
  l->add_flag("--grad-check", loss.grad_check, "Compare against central finite differences");
  l->add_option("--epsilon", loss.epsilon)->capture_default_str();
  l->add_option("--output", loss.output, "Also write the report here");

  // ---- eval
  auto* ev = app.add_subcommand("eval", "Evaluation metrics");
  ev->require_subcommand(1);
  PsdsArgs ps;
  auto* eps = ev->add_subcommand("psds", "PSDS from scored detections");
  eps->add_option("--detections", ps.detections, "TSV with score column")->required();
  eps->add_option("--ground-truth", ps.ground_truth, "TSV")->required();
  eps->add_option("--duration-hours", ps.duration_hours, "Total evaluated audio in hours");
  eps->add_option("--clip-duration-s", ps.clip_duration_s,
                  "Alternative: per-clip duration; total = distinct clips x this");
  eps->add_option("--dtc", ps.config.dtc)->capture_default_str();
  eps->add_option("--gtc", ps.config.gtc)->capture_default_str();
  eps->add_option("--alpha-st", ps.config.alpha_st)->capture_default_str();
  eps->add_option("--e-max", ps.config.e_max)->capture_default_str();
  eps->add_option("--thresholds", ps.threshold_count, "Number of evenly spaced thresholds")
      ->capture_default_str();
  eps->add_option("--output", ps.output);

  RetrievalArgs rt;
  auto* ert = ev->add_subcommand("retrieval", "Recall@k");
  ert->add_option("--similarity", rt.similarity, "m x m similarity (row i matches column i)");
  ert->add_option("--audio", rt.audio, "Audio embeddings (with --text)");
  ert->add_option("--text", rt.text, "Text embeddings (with --audio)");
  ert->add_option("--k", rt.ks, "Cutoffs")->delimiter(',')->capture_default_str();
  ert->add_option("--output", rt.output);

  AccuracyArgs acc;
  auto* eac = ev->add_subcommand("accuracy", "Zero-shot classification accuracy");
  eac->add_option("--audio", acc.audio, "m x d audio embeddings")->required();
  eac->add_option("--classes", acc.classes, "C x d class text embeddings")->required();
  eac->add_option("--labels", acc.labels, "One class index per line")->required();
  eac->add_option("--output", acc.output);

  // ---- validate
  ValidateArgs va;
  auto* v = app.add_subcommand("validate", "Schema and invariant checks on any manifest");
  v->add_option("manifest", va.manifest)->required();
  v->add_option("--frames", va.options.frames)->capture_default_str();
  v->add_option("--min-dur-s", va.options.min_dur_s)->capture_default_str();
  v->add_option("--max-dur-s", va.options.max_dur_s)->capture_default_str();
  v->add_option("--n", va.n, "Required phrase-set size for enriched manifests");
  v->add_option("--centroids", va.centroids)->envname("FRAMEALIGN_CENTROIDS");
  v->add_option("--phrases", va.phrases)->envname("FRAMEALIGN_PHRASES");
  v->add_flag("--no-audio", va.no_audio, "Skip reading referenced audio files");
  v->add_flag("--allow-duplicates", va.options.allow_duplicate_negatives);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    err << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    err << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& pe) {
    out << error_report("usage", pe.what()).dump(2) << '\n';
    return 2;
  }

  try {
    if (c->parsed()) {
      clip.params.encoding = parse_encoding(clip.wav_format);
      const auto res = clip_event_bank(clip.input, clip.output_dir, clip.params, clip.workers);
      Json cfg{{"input", clip.input},
               {"output_dir", clip.output_dir},
               {"threshold_db", clip.params.threshold_db},
               {"window_s", clip.params.window_s},
               {"hop_s", clip.params.hop_s},
               {"merge_gap_s", clip.params.merge_gap_s},
               {"min_dur_s", clip.params.min_dur_s},
               {"max_dur_s", clip.params.max_dur_s},
               {"sample_rate", clip.params.sample_rate},
               {"wav_format", clip.wav_format},
               {"workers", clip.workers}};
      Json result{{"events", res.events.size()},
                  {"rejections", res.rejections.size()},
                  {"manifest", (std::filesystem::path(clip.output_dir) / "events.jsonl").string()}};
      emit(out, Json{{"ok", true}, {"command", "clip"}, {"config", cfg}, {"result", result}}, "");
      return 0;
    }

    if (m->parsed()) {
      const auto bank = load_event_bank(mix.events, mix.sample_rate);
      const auto backgrounds = load_backgrounds(mix.backgrounds, mix.sample_rate);
      const auto templates =
          mix.templates.empty() ? default_caption_templates() : read_templates(mix.templates);
      DatasetOptions opts;
      opts.count = mix.count;
      opts.workers = mix.workers;
      opts.encoding = parse_encoding(mix.wav_format);
      opts.write_label_sidecar = mix.label_sidecar;
      const auto rows =
          build_dataset(backgrounds, bank, templates, mix.params, mix.output_dir, opts);
      Json cfg{{"events", mix.events},
               {"backgrounds", mix.backgrounds},
               {"templates", mix.templates},
               {"output_dir", mix.output_dir},
               {"count", mix.count},
               {"seed", mix.params.seed},
               {"timeline_s", mix.params.timeline_s},
               {"max_events", mix.params.max_events},
               {"repeat_max", mix.params.repeat_max},
               {"repeat_threshold_s", mix.params.repeat_threshold_s},
               {"snr_min_db", mix.params.snr_min_db},
               {"snr_max_db", mix.params.snr_max_db},
               {"frames", mix.params.frames_per_clip},
               {"sample_rate", mix.sample_rate},
               {"wav_format", mix.wav_format},
               {"workers", mix.workers}};
      Json result{{"scenes", rows.size()},
                  {"manifest", (std::filesystem::path(mix.output_dir) / "dataset.jsonl").string()}};
      emit(out, Json{{"ok", true}, {"command", "mix"}, {"config", cfg}, {"result", result}}, "");
      return 0;
    }

    if (e->parsed()) {
      const auto space = ClusterSpace::load(enr.centroids, enr.phrases);
      const auto scenes = read_scenes(enr.input);
      SamplerOptions opts{enr.n, enr.allow_replacement};
      auto rows = enrich_manifest(scenes, space, opts, enr.frames, enr.seed, enr.workers);
      namespace fs = std::filesystem;
      const fs::path in_dir = fs::absolute(enr.input).parent_path();
      const fs::path out_dir = fs::absolute(enr.output).parent_path();
      if (fs::weakly_canonical(enr.input) == fs::weakly_canonical(enr.output)) {
        throw Error("enrich: --output must differ from --input");
      }
      // Audio paths are relative to the manifest, so rebase them when the
      // enriched file lands in another directory.
      if (in_dir.lexically_normal() != out_dir.lexically_normal()) {
        for (auto& r : rows) {
          if (fs::path(r.audio).is_relative()) {
            r.audio = (in_dir / r.audio).lexically_normal().lexically_relative(out_dir).generic_string();
          }
        }
      }
      write_records(enr.output, rows);
      Json cfg{{"input", enr.input},     {"centroids", enr.centroids}, {"phrases", enr.phrases},
               {"output", enr.output},   {"n", enr.n},                 {"seed", enr.seed},
               {"frames", enr.frames},   {"allow_replacement", enr.allow_replacement},
               {"workers", enr.workers}};
      Json result{{"scenes", rows.size()}, {"clusters", space.centroids().size()},
                  {"database_phrases", space.phrases().size()}};
      emit(out, Json{{"ok", true}, {"command", "enrich"}, {"config", cfg}, {"result", result}}, "");
      return 0;
    }

    if (l->parsed()) {
      const LossKind kind = parse_loss_kind(loss.kind);
      loss.params.convention = parse_convention(loss.convention);
      const EmbeddingBatch batch = load_loss_inputs(loss);
      const LossOutput res = evaluate_loss(kind, batch, loss.params);
      Json norms{{"G", res.grad_audio.norm()},
                 {"T", res.grad_text.norm()},
                 {"F", grad_norm(res.grad_frames)},
                 {"P", grad_norm(res.grad_phrases)},
                 {"t", std::abs(res.grad_t)},
                 {"b", std::abs(res.grad_b)},
                 {"t_frame", std::abs(res.grad_t_frame)},
                 {"b_frame", std::abs(res.grad_b_frame)}};
      Json params{{"t", loss.params.t},
                  {"b", loss.params.b},
                  {"t_frame", loss.params.t_frame},
                  {"b_frame", loss.params.b_frame},
                  {"convention", loss.convention}};
      Json report{{"ok", true},
                  {"command", "loss"},
                  {"config",
                   {{"kind", loss.kind},        {"fixture", loss.fixture},   {"G", loss.g},
                    {"T", loss.t},              {"match", loss.match},       {"F", loss.f},
                    {"P", loss.p},              {"Y", loss.y},               {"t", loss.params.t},
                    {"b", loss.params.b},       {"t_frame", loss.params.t_frame},
                    {"b_frame", loss.params.b_frame}, {"convention", loss.convention},
                    {"grad_check", loss.grad_check},  {"epsilon", loss.epsilon},
                    {"output", loss.output}}},
                  {"value", res.value},
                  {"grad_norms", norms},
                  {"params", params}};
      if (loss.grad_check) {
        const auto gc = gradient_check(kind, batch, loss.params, loss.epsilon);
        report["gradient_check"] = {{"max_rel_error", gc.max_rel_error},
                                    {"worst_coordinate", gc.worst_coordinate},
                                    {"coordinates", gc.coordinates},
                                    {"epsilon", loss.epsilon}};
      }
      emit(out, report, loss.output);
      return 0;
    }

    if (eps->parsed()) {
      ps.config.thresholds = PsdsConfig::default_thresholds(ps.threshold_count);
      const auto dets = read_events_tsv(ps.detections);
      const auto gts = read_events_tsv(ps.ground_truth);
      double hours = ps.duration_hours;
      if (hours <= 0.0 && ps.clip_duration_s > 0.0) {
        std::set<std::string> clips;
        for (const auto& g : gts) clips.insert(g.clip_id);
        for (const auto& d : dets) clips.insert(d.clip_id);
        hours = static_cast<double>(clips.size()) * ps.clip_duration_s / 3600.0;
      }
      if (hours <= 0.0) throw Error("psds: give --duration-hours or --clip-duration-s");
      const auto res = psds(dets, gts, hours, ps.config);
      Json points = Json::array();
      for (const auto& p : res.points) {
        points.push_back({{"tau", p.tau}, {"efpr", p.efpr}, {"eff_tpr", p.eff_tpr}});
      }
      Json cfg{{"dtc", ps.config.dtc},         {"gtc", ps.config.gtc},
               {"alpha_st", ps.config.alpha_st}, {"alpha_ct", ps.config.alpha_ct},
               {"e_max", ps.config.e_max},     {"thresholds", ps.threshold_count},
               {"duration_hours", hours}};
      emit(out,
           Json{{"ok", true}, {"command", "eval psds"}, {"psds", res.psds},
                {"per_threshold", points}, {"config", cfg}},
           ps.output);
      return 0;
    }

    if (ert->parsed()) {
      Matrix sim;
      if (!rt.similarity.empty()) {
        sim = to_matrix(read_tensor(rt.similarity));
      } else if (!rt.audio.empty() && !rt.text.empty()) {
        sim = cosine_matrix(to_matrix(read_tensor(rt.audio)), to_matrix(read_tensor(rt.text)));
      } else {
        throw Error("retrieval: give --similarity or both --audio and --text");
      }
      Json a2t, t2a;
      const Matrix simt = sim.transpose();
      for (int k : rt.ks) {
        a2t["R@" + std::to_string(k)] = recall_at_k(sim, k);
        t2a["R@" + std::to_string(k)] = recall_at_k(simt, k);
      }
      emit(out,
           Json{{"ok", true}, {"command", "eval retrieval"},
                {"config", {{"k", rt.ks}, {"m", sim.rows()}}},
                {"audio_to_text", a2t}, {"text_to_audio", t2a}},
           rt.output);
      return 0;
    }

    if (eac->parsed()) {
      std::ifstream in(acc.labels);
      if (!in) throw Error("cannot open " + acc.labels);
      std::vector<int> labels;
      for (int x; in >> x;) labels.push_back(x);
      if (!in.eof()) throw Error(acc.labels + ": labels must be integers");
      const double a = zero_shot_accuracy(to_matrix(read_tensor(acc.audio)),
                                          to_matrix(read_tensor(acc.classes)), labels);
      emit(out,
           Json{{"ok", true}, {"command", "eval accuracy"},
                {"config", {{"audio", acc.audio}, {"classes", acc.classes}, {"labels", acc.labels}}},
                {"accuracy", a}},
           acc.output);
      return 0;
    }

    if (v->parsed()) {
      std::optional<ClusterSpace> space;
      if (!va.centroids.empty() || !va.phrases.empty()) {
        if (va.centroids.empty() || va.phrases.empty()) {
          throw Error("validate: --centroids and --phrases must be given together");
        }
        space = ClusterSpace::load(va.centroids, va.phrases);
        va.options.space = &*space;
      }
      if (va.n > 0) va.options.phrase_count = va.n;
      va.options.check_audio = !va.no_audio;
      const ValidationReport rep = validate_manifest(va.manifest, va.options);
      Json report = rep.to_json();
      report["command"] = "validate";
      report["config"] = {{"manifest", va.manifest},
                          {"frames", va.options.frames},
                          {"min_dur_s", va.options.min_dur_s},
                          {"max_dur_s", va.options.max_dur_s},
                          {"n", va.n},
                          {"check_audio", va.options.check_audio}};
      emit(out, report, "");
      return rep.ok() ? 0 : 1;
    }
  } catch (const Error& ex) {
    out << error_report("error", ex.what()).dump(2) << '\n';
    return 1;
  } catch (const std::exception& ex) {
    out << error_report("internal", ex.what()).dump(2) << '\n';
    return 1;
  }
  out << error_report("usage", "no subcommand").dump(2) << '\n';
  return 2;
}

}  // namespace framealign
