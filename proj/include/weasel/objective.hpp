#pragma once

#include "weasel/data.hpp"
#include "weasel/nn_ops.hpp"

namespace weasel {

/// Per-pixel class scores for one image: row 0 = background, row 1 =
/// foreground, column p = pixel r*W+c. Scores are unnormalized logits.
struct ScoreMap {
  int height = 0;
  int width = 0;
  nn::RMat data;  // [class_count, H*W]
};

struct LossValue {
  double value = 0.0;
  long contributing_pixels = 0;
  bool zero_labeled() const { return contributing_pixels == 0; }
};

/// Selective cross-entropy: mean over labeled pixels of -log softmax of the
/// true class; unknown pixels carry weight zero. A target with no labeled
/// pixel yields value 0 with the condition flagged via contributing_pixels.
LossValue weighted_cross_entropy(const ScoreMap& scores, const SparseMask& target);

/// Analytic gradient of weighted_cross_entropy w.r.t. the scores.
nn::RMat weighted_cross_entropy_grad(const ScoreMap& scores, const SparseMask& target);

/// Jaccard / intersection-over-union over foreground; 1.0 when both masks
/// are empty.
double jaccard(const DenseMask& pred, const DenseMask& truth);

namespace nn_detail {

// Shared kernel: accumulates the masked cross-entropy of one image into
// `loss` and, when `dscores` is non-null, writes (softmax - onehot) *
// inv_count at labeled pixels. inv_count is the global 1/(labeled pixels in
// batch) weight so batch loss is the mean over all labeled pixels.
template <class M>
void masked_ce(const M& scores, const SparseMask& target, double inv_count,
               nn::Scal<M>& loss, M* dscores) {
  using S = nn::Scal<M>;
  const long npix = nn::cols_of(scores);
  if (dscores) nn::set_zero(*dscores, 2, npix);
  auto get = [&](long r, long p) -> S {
    if constexpr (nn::is_dual_v<M>) {
      return nn::Dual{scores.v(r, p), scores.d(r, p)};
    } else {
      return scores(r, p);
    }
  };
  for (long p = 0; p < npix; ++p) {
    const std::uint8_t lab = target.labels[static_cast<size_t>(p)];
    if (lab == kUnknownLabel) continue;
    const S s0 = get(0, p), s1 = get(1, p);
    S z0 = s0, z1 = s1;
    double m;
    if constexpr (nn::is_dual_v<M>) {
      m = std::max(s0.v, s1.v);
    } else {
      m = std::max(s0, s1);
    }
    z0 = z0 - S(m);
    z1 = z1 - S(m);
    const S e0 = exp(z0), e1 = exp(z1);
    const S denom = e0 + e1;
    const S lse = log(denom);
    const S logp = (lab == 1 ? z1 : z0) - lse;
    loss += -logp * S(inv_count);
    if (dscores) {
      const S p0 = e0 / denom, p1 = e1 / denom;
      const S g0 = (p0 - S(lab == 0 ? 1.0 : 0.0)) * S(inv_count);
      const S g1 = (p1 - S(lab == 1 ? 1.0 : 0.0)) * S(inv_count);
      if constexpr (nn::is_dual_v<M>) {
        dscores->v(0, p) = g0.v;
        dscores->d(0, p) = g0.d;
        dscores->v(1, p) = g1.v;
        dscores->d(1, p) = g1.d;
      } else {
        (*dscores)(0, p) = g0;
        (*dscores)(1, p) = g1;
      }
    }
  }
}

}  // namespace nn_detail

}  // namespace weasel
