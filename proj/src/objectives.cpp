#include "framealign/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>

#include "framealign/error.hpp"

namespace framealign {

double softplus(double u) {
  if (u > 0.0) return u + std::log1p(std::exp(-u));
  return std::log1p(std::exp(u));
}

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

namespace {

Eigen::VectorXd row_norms(const Matrix& m, const char* name) {
  Eigen::VectorXd n(m.rows());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    n[r] = m.row(r).norm();
    if (!(n[r] > 0.0) || !std::isfinite(n[r])) {
      std::ostringstream msg;
      msg << name << " row " << r << " has zero or non-finite norm";
      throw Error(msg.str());
    }
  }
  return n;
}

Matrix normalized(const Matrix& m, const Eigen::VectorXd& norms) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.row(r) = m.row(r) / norms[r];
  return out;
}

// Cosine similarities with the pieces needed to backpropagate through them.
struct CosineCache {
  Eigen::VectorXd x_norm, w_norm;
  Matrix x_unit, w_unit;
  Matrix sim;
};

CosineCache cosine_cache(const Matrix& x, const Matrix& w, const char* x_name,
                         const char* w_name) {
  if (x.cols() != w.cols()) {
    std::ostringstream msg;
    msg << "embedding dimension mismatch: " << x_name << " has " << x.cols() << ", " << w_name
        << " has " << w.cols();
    throw Error(msg.str());
  }
  CosineCache c;
  c.x_norm = row_norms(x, x_name);
  c.w_norm = row_norms(w, w_name);
  c.x_unit = normalized(x, c.x_norm);
  c.w_unit = normalized(w, c.w_norm);
  c.sim.resize(x.rows(), w.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.rows(); ++j) {
      c.sim(i, j) = std::clamp(c.x_unit.row(i).dot(c.w_unit.row(j)), -1.0, 1.0);
    }
  }
  return c;
}

// Adds ds (dL/ds for every pair) into gx, gw through the cosine.
void backprop_cosine(const CosineCache& c, const Matrix& ds, Matrix& gx, Matrix& gw) {
  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    for (Eigen::Index j = 0; j < ds.cols(); ++j) {
      const double g = ds(i, j);
      if (g == 0.0) continue;
      const double s = c.sim(i, j);
      gx.row(i) += (g / c.x_norm[i]) * (c.w_unit.row(j) - s * c.x_unit.row(i));
      gw.row(j) += (g / c.w_norm[j]) * (c.x_unit.row(i) - s * c.w_unit.row(j));
    }
  }
}

struct BlockSums {
  double value = 0.0;  // unnormalized sum of pair terms
  double dt = 0.0;
  double db = 0.0;
};

// Pairwise sigmoid terms over a block of similarities. `scale` is the
// loss normalizer applied to the gradients; values are returned unscaled.
BlockSums sigmoid_block(const CosineCache& c, const std::function<double(Eigen::Index, Eigen::Index)>& z_of,
                        double t, double b, BiasConvention convention, double scale, Matrix& gx,
                        Matrix& gw, const char* what) {
  BlockSums sums;
  const double bias_sign = convention == BiasConvention::kPrinted ? 1.0 : -1.0;
  Matrix ds(c.sim.rows(), c.sim.cols());
  for (Eigen::Index i = 0; i < c.sim.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.sim.cols(); ++j) {
      const double z = z_of(i, j);
      const double s = c.sim(i, j);
      const double u = convention == BiasConvention::kPrinted ? z * (-t * s + b)
                                                              : -z * (t * s + b);
      const double term = softplus(u);
      if (!std::isfinite(term)) {
        std::ostringstream msg;
        msg << what << ": non-finite term at pair (" << i << ", " << j << ")";
        throw Error(msg.str());
      }
      sums.value += term;
      const double g = scale * sigmoid(u);
      ds(i, j) = g * (-z * t);
      sums.dt += g * (-z * s);
      sums.db += g * (bias_sign * z);
    }
  }
  backprop_cosine(c, ds, gx, gw);
  return sums;
}

void check_binary(const Matrix& m, const char* name, std::size_t clip) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (m(r, c) != 0.0 && m(r, c) != 1.0) {
        std::ostringstream msg;
        msg << name << " of clip " << clip << " has a non-binary entry at (" << r << ", " << c
            << ")";
        throw Error(msg.str());
      }
    }
  }
}

void warn_nonpositive_temperature(double t, const char* name) {
  if (!(t > 0.0)) std::cerr << "WARNING: temperature " << name << " = " << t << " is not positive\n";
}

}  // namespace

Matrix cosine_matrix(const Matrix& x, const Matrix& w) {
  return cosine_cache(x, w, "X", "W").sim;
}

LossOutput clip_sigmoid_loss(const ClipBatch& batch, double t, double b,
                             BiasConvention convention) {
  const Eigen::Index n = batch.audio.rows();
  if (n == 0) throw Error("clip_sigmoid_loss: empty batch");
  if (batch.text.rows() != n) throw Error("clip_sigmoid_loss: audio and text batch sizes differ");
  const bool identity = batch.match.size() == 0;
  if (!identity) {
    if (batch.match.rows() != n || batch.match.cols() != n) {
      throw Error("clip_sigmoid_loss: match matrix must be B x B");
    }
    check_binary(batch.match, "match matrix", 0);
  }
  if (!std::isfinite(t) || !std::isfinite(b)) throw Error("clip_sigmoid_loss: non-finite t or b");
  warn_nonpositive_temperature(t, "t");

  const CosineCache c = cosine_cache(batch.audio, batch.text, "G", "T");
  LossOutput out;
  out.grad_audio = Matrix::Zero(batch.audio.rows(), batch.audio.cols());
  out.grad_text = Matrix::Zero(batch.text.rows(), batch.text.cols());
  const double scale = 1.0 / static_cast<double>(n);
  auto z_of = [&](Eigen::Index i, Eigen::Index j) {
    const bool matched = identity ? i == j : batch.match(i, j) == 1.0;
    return matched ? 1.0 : -1.0;
  };
  const BlockSums sums = sigmoid_block(c, z_of, t, b, convention, scale, out.grad_audio,
                                       out.grad_text, "clip_sigmoid_loss");
  out.value = sums.value / static_cast<double>(n);
  out.grad_t = sums.dt;
  out.grad_b = sums.db;
  return out;
}

LossOutput frame_sigmoid_loss(const FrameBatch& batch, double t, double b,
                              BiasConvention convention) {
  const std::size_t clips = batch.frames.size();
  if (batch.phrases.size() != clips || batch.labels.size() != clips) {
    throw Error("frame_sigmoid_loss: frames, phrases and labels must list the same clips");
  }
  if (!std::isfinite(t) || !std::isfinite(b)) throw Error("frame_sigmoid_loss: non-finite t' or b'");
  warn_nonpositive_temperature(t, "t'");

  Eigen::Index frames_per_clip = -1;
  double pair_count = 0.0;
  for (std::size_t i = 0; i < clips; ++i) {
    const auto& f = batch.frames[i];
    const auto& p = batch.phrases[i];
    const auto& y = batch.labels[i];
    if (frames_per_clip < 0) frames_per_clip = f.rows();
    if (f.rows() != frames_per_clip || f.rows() == 0) {
      throw Error("frame_sigmoid_loss: clips must share one non-zero frame count L");
    }
    if (y.rows() != p.rows() || (p.rows() > 0 && y.cols() != f.rows())) {
      std::ostringstream msg;
      msg << "frame_sigmoid_loss: labels of clip " << i << " must be N_i x L";
      throw Error(msg.str());
    }
    if (p.rows() > 0 && p.cols() != f.cols()) {
      std::ostringstream msg;
      msg << "frame_sigmoid_loss: phrase/frame dimension mismatch in clip " << i;
      throw Error(msg.str());
    }
    check_binary(y, "labels", i);
    pair_count += static_cast<double>(p.rows() * f.rows());
  }

  LossOutput out;
  out.grad_frames.reserve(clips);
  out.grad_phrases.reserve(clips);
  for (std::size_t i = 0; i < clips; ++i) {
    out.grad_frames.push_back(Matrix::Zero(batch.frames[i].rows(), batch.frames[i].cols()));
    out.grad_phrases.push_back(Matrix::Zero(batch.phrases[i].rows(), batch.phrases[i].cols()));
  }
  if (pair_count == 0.0) return out;  // no phrases anywhere: L_local := 0

  const double scale = 1.0 / pair_count;
  double total = 0.0;
  for (std::size_t i = 0; i < clips; ++i) {
    if (batch.phrases[i].rows() == 0) continue;
    const CosineCache c = cosine_cache(batch.phrases[i], batch.frames[i], "P", "F");
    const Matrix& y = batch.labels[i];
    auto z_of = [&](Eigen::Index k, Eigen::Index l) { return y(k, l) == 1.0 ? 1.0 : -1.0; };
    const BlockSums sums = sigmoid_block(c, z_of, t, b, convention, scale, out.grad_phrases[i],
                                         out.grad_frames[i], "frame_sigmoid_loss");
    total += sums.value;
    out.grad_t_frame += sums.dt;
    out.grad_b_frame += sums.db;
  }
  out.value = total / pair_count;
  return out;
}

LossOutput total_loss(const EmbeddingBatch& batch, const LossParams& params) {
  LossOutput global = clip_sigmoid_loss(batch.clip, params.t, params.b, params.convention);
  const LossOutput local =
      frame_sigmoid_loss(batch.frame, params.t_frame, params.b_frame, params.convention);
  global.value += local.value;
  global.grad_frames = local.grad_frames;
  global.grad_phrases = local.grad_phrases;
  global.grad_t_frame = local.grad_t_frame;
  global.grad_b_frame = local.grad_b_frame;
  return global;
}

LossOutput infonce_loss(const Matrix& audio, const Matrix& text, double t) {
  const Eigen::Index n = audio.rows();
  if (n == 0) throw Error("infonce_loss: empty batch");
  if (text.rows() != n) throw Error("infonce_loss: audio and text batch sizes differ");
  if (!std::isfinite(t)) throw Error("infonce_loss: non-finite t");

  const CosineCache c = cosine_cache(audio, text, "G", "T");
  const Matrix logits = t * c.sim;

  // Row-wise (audio -> text) and column-wise (text -> audio) softmax.
  Matrix p_row(n, n), p_col(n, n);
  Eigen::VectorXd lse_row(n), lse_col(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = logits.row(i).maxCoeff();
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) acc += std::exp(logits(i, j) - m);
    lse_row[i] = m + std::log(acc);
    for (Eigen::Index j = 0; j < n; ++j) p_row(i, j) = std::exp(logits(i, j) - lse_row[i]);
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    const double m = logits.col(j).maxCoeff();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) acc += std::exp(logits(i, j) - m);
    lse_col[j] = m + std::log(acc);
    for (Eigen::Index i = 0; i < n; ++i) p_col(i, j) = std::exp(logits(i, j) - lse_col[j]);
  }

  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    sum += (lse_row[i] - logits(i, i)) + (lse_col[i] - logits(i, i));
  }
  if (!std::isfinite(sum)) throw Error("infonce_loss: non-finite value");

  LossOutput out;
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  out.value = sum * scale;

  Matrix d_logits = scale * (p_row + p_col);
  for (Eigen::Index i = 0; i < n; ++i) d_logits(i, i) -= 2.0 * scale;
  const Matrix ds = t * d_logits;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) out.grad_t += d_logits(i, j) * c.sim(i, j);
  }
  out.grad_audio = Matrix::Zero(audio.rows(), audio.cols());
  out.grad_text = Matrix::Zero(text.rows(), text.cols());
  backprop_cosine(c, ds, out.grad_audio, out.grad_text);
  return out;
}

LossKind parse_loss_kind(const std::string& name) {
  if (name == "clip") return LossKind::kClip;
  if (name == "frame") return LossKind::kFrame;
  if (name == "total") return LossKind::kTotal;
  if (name == "infonce") return LossKind::kInfoNce;
  throw Error("unknown loss kind \"" + name + "\" (expected clip|frame|total|infonce)");
}

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kClip: return "clip";
    case LossKind::kFrame: return "frame";
    case LossKind::kTotal: return "total";
    case LossKind::kInfoNce: return "infonce";
  }
  return "?";
}

LossOutput evaluate_loss(LossKind kind, const EmbeddingBatch& batch, const LossParams& params) {
  switch (kind) {
    case LossKind::kClip:
      return clip_sigmoid_loss(batch.clip, params.t, params.b, params.convention);
    case LossKind::kFrame:
      return frame_sigmoid_loss(batch.frame, params.t_frame, params.b_frame, params.convention);
    case LossKind::kTotal:
      return total_loss(batch, params);
    case LossKind::kInfoNce:
      return infonce_loss(batch.clip.audio, batch.clip.text, params.t);
  }
  throw Error("unknown loss kind");
}

namespace {

double rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({1.0, std::abs(analytic), std::abs(numeric)});
}

}  // namespace

GradientCheckReport gradient_check(LossKind kind, const EmbeddingBatch& batch,
                                   const LossParams& params, double epsilon) {
  const LossOutput analytic = evaluate_loss(kind, batch, params);
  GradientCheckReport report;

  EmbeddingBatch work = batch;
  LossParams p = params;
  auto value = [&] { return evaluate_loss(kind, work, p).value; };
  auto record = [&](double a, double numeric, const std::string& where) {
    const double e = rel_error(a, numeric);
    ++report.coordinates;
    if (e > report.max_rel_error || report.worst_coordinate.empty()) {
      report.max_rel_error = e;
      report.worst_coordinate = where;
    }
  };
  auto probe = [&](double& slot, double a, const std::string& where) {
    const double saved = slot;
    slot = saved + epsilon;
    const double plus = value();
    slot = saved - epsilon;
    const double minus = value();
    slot = saved;
    record(a, (plus - minus) / (2.0 * epsilon), where);
  };
  auto probe_matrix = [&](Matrix& m, const Matrix& grad, const std::string& name) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        probe(m(r, c), grad(r, c),
              name + "[" + std::to_string(r) + "," + std::to_string(c) + "]");
      }
    }
  };

  const bool uses_clip = kind != LossKind::kFrame;
  const bool uses_frame = kind == LossKind::kFrame || kind == LossKind::kTotal;
  if (uses_clip) {
    probe_matrix(work.clip.audio, analytic.grad_audio, "G");
    probe_matrix(work.clip.text, analytic.grad_text, "T");
    probe(p.t, analytic.grad_t, "t");
    if (kind != LossKind::kInfoNce) probe(p.b, analytic.grad_b, "b");
  }
  if (uses_frame) {
    for (std::size_t i = 0; i < work.frame.size(); ++i) {
      probe_matrix(work.frame.frames[i], analytic.grad_frames[i], "F" + std::to_string(i));
      probe_matrix(work.frame.phrases[i], analytic.grad_phrases[i], "P" + std::to_string(i));
    }
    probe(p.t_frame, analytic.grad_t_frame, "t'");
    probe(p.b_frame, analytic.grad_b_frame, "b'");
  }
  return report;
}

}  // namespace framealign
