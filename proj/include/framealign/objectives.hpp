#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace framealign {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Where the bias enters the pairwise logistic term.
//   kPrinted: softplus(z * (-t*s + b)), i.e. -log sigmoid(z * (t*s - b))
//   kSiglip:  softplus(-z * (t*s + b)), i.e. -log sigmoid(z * (t*s + b))
enum class BiasConvention { kPrinted, kSiglip };

struct LossParams {
  double t = 10.0;
  double b = -10.0;
  double t_frame = 10.0;
  double b_frame = -10.0;
  BiasConvention convention = BiasConvention::kPrinted;
};

/// Clip-level inputs: global audio embeddings (B x d), caption embeddings
/// (B x d), and an optional B x B 0/1 match matrix (empty means identity).
struct ClipBatch {
  Matrix audio;
  Matrix text;
  Matrix match;
};

/// Frame-level inputs, one entry per clip: frames (L x d), phrases (N_i x d)
/// and labels (N_i x L, entries 0/1). A clip may carry zero phrases.
struct FrameBatch {
  std::vector<Matrix> frames;
  std::vector<Matrix> phrases;
  std::vector<Matrix> labels;

  std::size_t size() const { return frames.size(); }
};

struct EmbeddingBatch {
  ClipBatch clip;
  FrameBatch frame;
};

/// Loss value with adjoints shaped like the inputs. Gradients for inputs a
/// loss does not read are left empty (matrices) or zero (scalars).
struct LossOutput {
  double value = 0.0;
  Matrix grad_audio;
  Matrix grad_text;
  std::vector<Matrix> grad_frames;
  std::vector<Matrix> grad_phrases;
  double grad_t = 0.0;
  double grad_b = 0.0;
  double grad_t_frame = 0.0;
  double grad_b_frame = 0.0;
};

/// Row-wise cosine similarities. Throws on a zero-norm row.
Matrix cosine_matrix(const Matrix& x, const Matrix& w);

LossOutput clip_sigmoid_loss(const ClipBatch& batch, double t, double b,
                             BiasConvention convention = BiasConvention::kPrinted);

LossOutput frame_sigmoid_loss(const FrameBatch& batch, double t, double b,
                              BiasConvention convention = BiasConvention::kPrinted);

LossOutput total_loss(const EmbeddingBatch& batch, const LossParams& params);

/// Symmetric InfoNCE over the diagonal pairing with logits t * s_ij.
LossOutput infonce_loss(const Matrix& audio, const Matrix& text, double t);

enum class LossKind { kClip, kFrame, kTotal, kInfoNce };

LossKind parse_loss_kind(const std::string& name);
std::string to_string(LossKind kind);

LossOutput evaluate_loss(LossKind kind, const EmbeddingBatch& batch, const LossParams& params);

struct GradientCheckReport {
  double max_rel_error = 0.0;
  std::string worst_coordinate;
  std::size_t coordinates = 0;
};

/// Central finite differences over every input coordinate and scalar
/// parameter the loss reads. Relative error per coordinate is
/// |analytic - numeric| / max(1, |analytic|, |numeric|).
GradientCheckReport gradient_check(LossKind kind, const EmbeddingBatch& batch,
                                   const LossParams& params, double epsilon = 1e-5);

// Numerically stable log(1 + exp(u)) and logistic sigmoid.
double softplus(double u);
double sigmoid(double u);

}  // namespace framealign
