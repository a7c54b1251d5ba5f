#include "weasel/objective.hpp"

namespace weasel {

namespace {

long labeled_count(const SparseMask& target) {
  long n = 0;
  for (std::uint8_t v : target.labels) {
    if (v != kUnknownLabel) ++n;
  }
  return n;
}

void check_shapes(const ScoreMap& scores, const SparseMask& target) {
  if (scores.height != target.height || scores.width != target.width ||
      scores.data.cols() != static_cast<long>(target.labels.size()) ||
      scores.data.rows() != 2) {
    throw DataError("weighted_cross_entropy: score/target shape mismatch");
  }
}

}  // namespace

LossValue weighted_cross_entropy(const ScoreMap& scores, const SparseMask& target) {
  check_shapes(scores, target);
  LossValue out;
  out.contributing_pixels = labeled_count(target);
  if (out.contributing_pixels == 0) return out;
  double loss = 0.0;
  nn_detail::masked_ce<nn::RMat>(scores.data, target, 1.0 / out.contributing_pixels, loss,
                                 nullptr);
  out.value = loss;
  return out;
}

nn::RMat weighted_cross_entropy_grad(const ScoreMap& scores, const SparseMask& target) {
  check_shapes(scores, target);
  const long count = labeled_count(target);
  nn::RMat dscores = nn::RMat::Zero(2, scores.data.cols());
  if (count == 0) return dscores;
  double loss = 0.0;
  nn_detail::masked_ce<nn::RMat>(scores.data, target, 1.0 / count, loss, &dscores);
  return dscores;
}

double jaccard(const DenseMask& pred, const DenseMask& truth) {
  if (pred.height != truth.height || pred.width != truth.width) {
    throw DataError("jaccard: shape mismatch");
  }
  long inter = 0, uni = 0;
  for (size_t i = 0; i < pred.labels.size(); ++i) {
    const bool a = pred.labels[i] == 1;
    const bool b = truth.labels[i] == 1;
    if (a && b) ++inter;
    if (a || b) ++uni;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace weasel
