#include "ternavit/distill.hpp"

#include <cmath>
#include <vector>

namespace ternavit {

namespace {

// log softmax of x/T, computed in double with max subtraction.
std::vector<double> log_softmax_scaled(const FloatVector& x, double temperature) {
  std::vector<double> out(x.len());
  double mx = -1e300;
  for (std::size_t i = 0; i < x.len(); ++i) {
    out[i] = static_cast<double>(x[i]) / temperature;
    mx = std::max(mx, out[i]);
  }
  double sum = 0.0;
  for (double& v : out) {
    v -= mx;
    sum += std::exp(v);
  }
  const double lse = std::log(sum);
  for (double& v : out) v -= lse;
  return out;
}

}  // namespace

double cross_entropy(const FloatVector& logits, std::size_t label) {
  if (logits.len() == 0) fail(ErrorCode::EmptyInput, "cross_entropy: empty logits");
  if (label >= logits.len())
    fail(ErrorCode::InvalidArgument, "cross_entropy: label out of range");
  const std::vector<double> lsm = log_softmax_scaled(logits, 1.0);
  return -lsm[label];
}

double kd_divergence(const FloatVector& student_logits, const FloatVector& teacher_logits,
                     double temperature) {
  if (student_logits.len() != teacher_logits.len())
    fail(ErrorCode::DimensionMismatch, "kd_divergence: logit lengths differ");
  if (student_logits.len() == 0) fail(ErrorCode::EmptyInput, "kd_divergence: empty logits");
  if (!(temperature > 0.0))
    fail(ErrorCode::InvalidArgument, "kd_divergence: temperature must be positive");
  const std::vector<double> log_pt = log_softmax_scaled(teacher_logits, temperature);
  const std::vector<double> log_ps = log_softmax_scaled(student_logits, temperature);
  double kl = 0.0;
  for (std::size_t i = 0; i < log_pt.size(); ++i)
    kl += std::exp(log_pt[i]) * (log_pt[i] - log_ps[i]);
  return temperature * temperature * kl;
}

double feature_loss(const FloatMatrix& student_feat, const FloatMatrix& teacher_feat,
                    const FeatureProjection& proj) {
  const FloatMatrix projected = matmul_f32(student_feat, proj.matrix);
  if (projected.rows != teacher_feat.rows || projected.cols != teacher_feat.cols)
    fail(ErrorCode::DimensionMismatch, "feature_loss: projected/teacher shape mismatch");
  if (teacher_feat.size() == 0) fail(ErrorCode::EmptyInput, "feature_loss: empty features");
  double sum = 0.0;
  for (std::size_t i = 0; i < projected.size(); ++i) {
    const double d = static_cast<double>(projected.data[i]) -
                     static_cast<double>(teacher_feat.data[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(projected.size());
}

double total_loss(double ce, double kd, double feat, const DistillWeights& w) {
  if (w.lambda_cls < 0.0 || w.lambda_logits < 0.0 || w.lambda_feat < 0.0)
    fail(ErrorCode::InvalidArgument, "total_loss: loss weights must be non-negative");
  if (!(std::isfinite(ce) && std::isfinite(kd) && std::isfinite(feat)))
    fail(ErrorCode::NonFinite, "total_loss: component losses must be finite");
  return w.lambda_cls * ce + w.lambda_logits * kd + w.lambda_feat * feat;
}

}  // namespace ternavit
