#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "framealign/audio.hpp"
#include "framealign/cli.hpp"
#include "framealign/clipper.hpp"
#include "framealign/error.hpp"
#include "framealign/metrics.hpp"
#include "framealign/mixer.hpp"
#include "framealign/objectives.hpp"
#include "framealign/validate.hpp"

namespace py = pybind11;
using namespace framealign;

namespace {

BiasConvention parse_convention(const std::string& name) {
  if (name == "printed") return BiasConvention::kPrinted;
  if (name == "siglip") return BiasConvention::kSiglip;
  throw Error("unknown bias convention '" + name + "' (expected printed or siglip)");
}

py::dict loss_to_dict(const LossOutput& o) {
  py::dict d;
  d["value"] = o.value;
  d["grad_audio"] = o.grad_audio;
  d["grad_text"] = o.grad_text;
  d["grad_frames"] = o.grad_frames;
  d["grad_phrases"] = o.grad_phrases;
  d["grad_t"] = o.grad_t;
  d["grad_b"] = o.grad_b;
  d["grad_t_frame"] = o.grad_t_frame;
  d["grad_b_frame"] = o.grad_b_frame;
  return d;
}

AudioClip to_clip(const std::vector<double>& samples, int sample_rate) {
  AudioClip c;
  c.samples = samples;
  c.sample_rate = sample_rate;
  return c;
}

EmbeddingBatch make_batch(const Matrix& audio, const Matrix& text, const Matrix& match,
                          const std::vector<Matrix>& frames, const std::vector<Matrix>& phrases,
                          const std::vector<Matrix>& labels) {
  EmbeddingBatch b;
  b.clip = {audio, text, match};
  b.frame = {frames, phrases, labels};
  return b;
}

std::vector<LabeledEvent> to_events(const std::vector<py::tuple>& rows) {
  std::vector<LabeledEvent> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    if (r.size() != 4 && r.size() != 5) {
      throw Error("events are (clip_id, label, onset_s, offset_s[, score]) tuples");
    }
    LabeledEvent e;
    e.clip_id = r[0].cast<std::string>();
    e.label = r[1].cast<std::string>();
    e.onset_s = r[2].cast<double>();
    e.offset_s = r[3].cast<double>();
    if (r.size() == 5) e.score = r[4].cast<double>();
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core: contrastive objectives, event clipping, scene labels and metrics.";
  py::register_exception<Error>(m, "FramealignError", PyExc_ValueError);

  m.def("cosine_matrix", &cosine_matrix, py::arg("x"), py::arg("w"));
  m.def("softplus", &softplus);

  m.def(
      "clip_loss",
      [](const Matrix& audio, const Matrix& text, double t, double b, const Matrix& match,
         const std::string& convention) {
        return loss_to_dict(clip_sigmoid_loss({audio, text, match}, t, b, parse_convention(convention)));
      },
      py::arg("audio"), py::arg("text"), py::arg("t") = 10.0, py::arg("b") = -10.0,
      py::arg("match") = Matrix(), py::arg("convention") = "printed");

  m.def(
      "frame_loss",
      [](const std::vector<Matrix>& frames, const std::vector<Matrix>& phrases,
         const std::vector<Matrix>& labels, double t, double b, const std::string& convention) {
        return loss_to_dict(frame_sigmoid_loss({frames, phrases, labels}, t, b, parse_convention(convention)));
      },
      py::arg("frames"), py::arg("phrases"), py::arg("labels"), py::arg("t") = 10.0,
      py::arg("b") = -10.0, py::arg("convention") = "printed");

  m.def(
      "infonce_loss",
      [](const Matrix& audio, const Matrix& text, double t) {
        return loss_to_dict(infonce_loss(audio, text, t));
      },
      py::arg("audio"), py::arg("text"), py::arg("t") = 10.0);

  m.def(
      "gradient_check",
      [](const std::string& kind, const Matrix& audio, const Matrix& text,
         const std::vector<Matrix>& frames, const std::vector<Matrix>& phrases,
         const std::vector<Matrix>& labels, const Matrix& match, double t, double b, double t_frame,
         double b_frame, const std::string& convention, double epsilon) {
        const LossParams p{t, b, t_frame, b_frame, parse_convention(convention)};
        const auto rep = gradient_check(parse_loss_kind(kind),
                                        make_batch(audio, text, match, frames, phrases, labels), p, epsilon);
        py::dict d;
        d["max_rel_error"] = rep.max_rel_error;
        d["worst_coordinate"] = rep.worst_coordinate;
        d["coordinates"] = rep.coordinates;
        return d;
      },
      py::arg("kind"), py::arg("audio"), py::arg("text"), py::arg("frames") = std::vector<Matrix>{},
      py::arg("phrases") = std::vector<Matrix>{}, py::arg("labels") = std::vector<Matrix>{},
      py::arg("match") = Matrix(), py::arg("t") = 10.0, py::arg("b") = -10.0, py::arg("t_frame") = 10.0,
      py::arg("b_frame") = -10.0, py::arg("convention") = "printed", py::arg("epsilon") = 1e-5);

  m.def(
      "energy_envelope",
      [](const std::vector<double>& samples, int sample_rate, double window_s, double hop_s) {
        return energy_envelope(to_clip(samples, sample_rate), window_s, hop_s).window_db;
      },
      py::arg("samples"), py::arg("sample_rate") = 16000, py::arg("window_s") = 0.10,
      py::arg("hop_s") = 0.05);

  m.def(
      "extract_event_segment",
      [](const std::vector<double>& samples, int sample_rate, double threshold_db, double window_s,
         double hop_s, double merge_gap_s, double min_dur_s, double max_dur_s) -> py::object {
        ClipperParams p;
        p.threshold_db = threshold_db;
        p.window_s = window_s;
        p.hop_s = hop_s;
        p.merge_gap_s = merge_gap_s;
        p.min_dur_s = min_dur_s;
        p.max_dur_s = max_dur_s;
        p.sample_rate = sample_rate;
        const auto seg = extract_event_segment(to_clip(samples, sample_rate), p);
        if (!seg) return py::none();
        return py::make_tuple(seg->onset_s, seg->offset_s);
      },
      py::arg("samples"), py::arg("sample_rate") = 16000, py::arg("threshold_db") = -20.0,
      py::arg("window_s") = 0.10, py::arg("hop_s") = 0.05, py::arg("merge_gap_s") = 0.20,
      py::arg("min_dur_s") = 1.0, py::arg("max_dur_s") = 7.5);

  m.def(
      "frame_labels",
      [](const std::vector<std::pair<double, double>>& intervals, int frames, double timeline_s) {
        return frame_labels_for(intervals, frames, timeline_s);
      },
      py::arg("intervals"), py::arg("frames") = 64, py::arg("timeline_s") = 10.0);

  m.def("recall_at_k", &recall_at_k, py::arg("similarity"), py::arg("k"));
  m.def("zero_shot_accuracy", &zero_shot_accuracy, py::arg("audio"), py::arg("class_text"),
        py::arg("labels"));

  m.def(
      "psds",
      [](const std::vector<py::tuple>& detections, const std::vector<py::tuple>& ground_truth,
         double duration_hours, double dtc, double gtc, double alpha_st, double e_max) {
        PsdsConfig cfg;
        cfg.dtc = dtc;
        cfg.gtc = gtc;
        cfg.alpha_st = alpha_st;
        cfg.e_max = e_max;
        const auto res = psds(to_events(detections), to_events(ground_truth), duration_hours, cfg);
        py::list points;
        for (const auto& op : res.points) points.append(py::make_tuple(op.tau, op.efpr, op.eff_tpr));
        py::dict d;
        d["psds"] = res.psds;
        d["per_threshold"] = points;
        return d;
      },
      py::arg("detections"), py::arg("ground_truth"), py::arg("duration_hours"), py::arg("dtc") = 0.7,
      py::arg("gtc") = 0.7, py::arg("alpha_st") = 1.0, py::arg("e_max") = 100.0);

  // Pipeline stages (clip, mix, enrich, validate, eval) share the command-line
  // front end so both surfaces resolve configuration identically.
  m.def(
      "run",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
