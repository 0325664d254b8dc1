#pragma once

#include "ternavit/tensor.hpp"

namespace ternavit {

// Weights of the composite training loss
// lambda_cls * CE + lambda_logits * KD + lambda_feat * feature MSE.
// Only forward evaluation is provided; there is no gradient path.
struct DistillWeights {
  double lambda_cls = 1.0;
  double lambda_logits = 1.0;
  double lambda_feat = 1.0;
  double temperature = 1.0;
};

// Maps student features into the teacher's feature width.
struct FeatureProjection {
  FloatMatrix matrix;  // student_dim x teacher_dim
};

// -log softmax(logits)[label], stable log-sum-exp form, double accumulation.
double cross_entropy(const FloatVector& logits, std::size_t label);

// T^2 * KL(softmax(teacher/T) || softmax(student/T)). Zero for identical
// inputs, non-negative always.
double kd_divergence(const FloatVector& student_logits, const FloatVector& teacher_logits,
                     double temperature);

// Mean squared error over (student_feat * proj - teacher_feat).
double feature_loss(const FloatMatrix& student_feat, const FloatMatrix& teacher_feat,
                    const FeatureProjection& proj);

double total_loss(double ce, double kd, double feat, const DistillWeights& w);

}  // namespace ternavit
