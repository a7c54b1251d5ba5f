#pragma once

// Low-level differentiable kernels for the segmentation network.
//
// Every kernel is written twice behind one template: once on plain double
// matrices (RMat) and once on value/tangent pairs (DMat). Running the whole
// forward+backward pass in DMat arithmetic with the parameter tangent set to
// a direction v yields the exact Hessian-vector product H(theta)·v in the
// gradient's tangent part (forward-over-reverse differentiation). Dual GEMMs
// decompose into three real GEMMs, so second-order cost stays within a small
// constant factor of first-order.

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <type_traits>
#include <vector>

#include "weasel/common.hpp"

namespace weasel::nn {

using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

struct DMat {
  RMat v, d;
};

/// First-order dual scalar for pointwise code (loss kernels).
struct Dual {
  double v = 0.0;
  double d = 0.0;
  Dual() = default;
  Dual(double value) : v(value) {}
  Dual(double value, double tangent) : v(value), d(tangent) {}
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator-(Dual a) { return {-a.v, -a.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.v * b.d + a.d * b.v}; }
inline Dual operator/(Dual a, Dual b) {
  const double inv = 1.0 / b.v;
  return {a.v * inv, (a.d - a.v * inv * b.d) * inv};
}
inline Dual& operator+=(Dual& a, Dual b) { a = a + b; return a; }
inline Dual exp(Dual a) {
  const double e = std::exp(a.v);
  return {e, e * a.d};
}
inline Dual log(Dual a) { return {std::log(a.v), a.d / a.v}; }

template <class M>
inline constexpr bool is_dual_v = std::is_same_v<M, DMat>;

template <class M>
using Scal = std::conditional_t<is_dual_v<M>, Dual, double>;

// --- flat parameter/gradient storage ---------------------------------------

template <class M>
struct FlatVec;

template <>
struct FlatVec<RMat> {
  RVec v;
  void zeros(long n) { v = RVec::Zero(n); }
};

template <>
struct FlatVec<DMat> {
  RVec v, d;
  void zeros(long n) {
    v = RVec::Zero(n);
    d = RVec::Zero(n);
  }
};

inline void extract(const FlatVec<RMat>& f, long offset, int rows, int cols, RMat& out) {
  out = Eigen::Map<const RMat>(f.v.data() + offset, rows, cols);
}
inline void extract(const FlatVec<DMat>& f, long offset, int rows, int cols, DMat& out) {
  out.v = Eigen::Map<const RMat>(f.v.data() + offset, rows, cols);
  out.d = Eigen::Map<const RMat>(f.d.data() + offset, rows, cols);
}

inline void accumulate(FlatVec<RMat>& f, long offset, const RMat& m) {
  Eigen::Map<RMat>(f.v.data() + offset, m.rows(), m.cols()) += m;
}
inline void accumulate(FlatVec<DMat>& f, long offset, const DMat& m) {
  Eigen::Map<RMat>(f.v.data() + offset, m.v.rows(), m.v.cols()) += m.v;
  Eigen::Map<RMat>(f.d.data() + offset, m.d.rows(), m.d.cols()) += m.d;
}

// --- shape helpers ----------------------------------------------------------

inline void set_zero(RMat& m, long rows, long cols) { m.setZero(rows, cols); }
inline void set_zero(DMat& m, long rows, long cols) {
  m.v.setZero(rows, cols);
  m.d.setZero(rows, cols);
}

inline long cols_of(const RMat& m) { return m.cols(); }
inline long cols_of(const DMat& m) { return m.v.cols(); }
inline long rows_of(const RMat& m) { return m.rows(); }
inline long rows_of(const DMat& m) { return m.v.rows(); }

// --- GEMM family ------------------------------------------------------------

inline void gemm(RMat& c, const RMat& a, const RMat& b) { c.noalias() = a * b; }
inline void gemm(DMat& c, const DMat& a, const DMat& b) {
  c.v.noalias() = a.v * b.v;
  c.d.noalias() = a.v * b.d;
  c.d.noalias() += a.d * b.v;
}

// c = a^T * b
inline void gemm_tn(RMat& c, const RMat& a, const RMat& b) {
  c.noalias() = a.transpose() * b;
}
inline void gemm_tn(DMat& c, const DMat& a, const DMat& b) {
  c.v.noalias() = a.v.transpose() * b.v;
  c.d.noalias() = a.v.transpose() * b.d;
  c.d.noalias() += a.d.transpose() * b.v;
}

// c += a * b^T
inline void gemm_nt_acc(RMat& c, const RMat& a, const RMat& b) {
  c.noalias() += a * b.transpose();
}
inline void gemm_nt_acc(DMat& c, const DMat& a, const DMat& b) {
  c.v.noalias() += a.v * b.v.transpose();
  c.d.noalias() += a.v * b.d.transpose();
  c.d.noalias() += a.d * b.v.transpose();
}

// --- bias -------------------------------------------------------------------

inline void add_bias(RMat& y, const RMat& b) { y.colwise() += b.col(0); }
inline void add_bias(DMat& y, const DMat& b) {
  y.v.colwise() += b.v.col(0);
  y.d.colwise() += b.d.col(0);
}

inline void bias_grad_acc(RMat& db, const RMat& dy) { db.col(0) += dy.rowwise().sum(); }
inline void bias_grad_acc(DMat& db, const DMat& dy) {
  db.v.col(0) += dy.v.rowwise().sum();
  db.d.col(0) += dy.d.rowwise().sum();
}

// --- ReLU ---------------------------------------------------------------

inline void relu_forward(RMat& x) { x = x.cwiseMax(0.0); }
inline void relu_forward(DMat& x) {
  x.d = (x.v.array() > 0.0).select(x.d, 0.0);
  x.v = x.v.cwiseMax(0.0);
}

// Mask dy by the stored post-activation (y > 0 <=> the unit was live).
inline void relu_backward(RMat& dy, const RMat& y) {
  dy = (y.array() > 0.0).select(dy, 0.0);
}
inline void relu_backward(DMat& dy, const DMat& y) {
  dy.v = (y.v.array() > 0.0).select(dy.v, 0.0);
  dy.d = (y.v.array() > 0.0).select(dy.d, 0.0);
}

// --- im2col / col2im for 3x3 same-padding convolutions ----------------------

// Feature maps are [C, H*W] with pixel p = r*W + c. col is [C*9, H*W] with
// row block k*C.. for kernel tap k = ky*3+kx (offsets dy=ky-1, dx=kx-1).
template <class M>
void im2col3(const M& x, int ch, int h, int w, M& col) {
  set_zero(col, static_cast<long>(ch) * 9, static_cast<long>(h) * w);
  for (int ky = 0; ky < 3; ++ky) {
    const int dy = ky - 1;
    for (int kx = 0; kx < 3; ++kx) {
      const int dx = kx - 1;
      const int k = ky * 3 + kx;
      const int r_lo = std::max(0, -dy), r_hi = std::min(h, h - dy);
      const int c_lo = std::max(0, -dx), c_hi = std::min(w, w - dx);
      if (c_hi <= c_lo) continue;
      for (int r = r_lo; r < r_hi; ++r) {
        const long p = static_cast<long>(r) * w + c_lo;
        const long q = static_cast<long>(r + dy) * w + (c_lo + dx);
        const long n = c_hi - c_lo;
        if constexpr (is_dual_v<M>) {
          col.v.block(static_cast<long>(k) * ch, p, ch, n) = x.v.block(0, q, ch, n);
          col.d.block(static_cast<long>(k) * ch, p, ch, n) = x.d.block(0, q, ch, n);
        } else {
          col.block(static_cast<long>(k) * ch, p, ch, n) = x.block(0, q, ch, n);
        }
      }
    }
  }
}

template <class M>
void col2im3_acc(const M& dcol, int ch, int h, int w, M& dx) {
  for (int ky = 0; ky < 3; ++ky) {
    const int dy = ky - 1;
    for (int kx = 0; kx < 3; ++kx) {
      const int dx_off = kx - 1;
      const int k = ky * 3 + kx;
      const int r_lo = std::max(0, -dy), r_hi = std::min(h, h - dy);
      const int c_lo = std::max(0, -dx_off), c_hi = std::min(w, w - dx_off);
      if (c_hi <= c_lo) continue;
      for (int r = r_lo; r < r_hi; ++r) {
        const long p = static_cast<long>(r) * w + c_lo;
        const long q = static_cast<long>(r + dy) * w + (c_lo + dx_off);
        const long n = c_hi - c_lo;
        if constexpr (is_dual_v<M>) {
          dx.v.block(0, q, ch, n) += dcol.v.block(static_cast<long>(k) * ch, p, ch, n);
          dx.d.block(0, q, ch, n) += dcol.d.block(static_cast<long>(k) * ch, p, ch, n);
        } else {
          dx.block(0, q, ch, n) += dcol.block(static_cast<long>(k) * ch, p, ch, n);
        }
      }
    }
  }
}

// --- 2x2 max pooling ----------------------------------------------------

// Ties resolve to the first candidate in scan order; selection is always by
// the value part so real and dual paths pick the same pixel.
template <class M>
void maxpool2_forward(const M& x, int ch, int h, int w, M& y, std::vector<int>& argmax) {
  const int ho = h / 2, wo = w / 2;
  set_zero(y, ch, static_cast<long>(ho) * wo);
  argmax.assign(static_cast<size_t>(ch) * ho * wo, 0);
  const RMat& xv = [&]() -> const RMat& {
    if constexpr (is_dual_v<M>) return x.v;
    else return x;
  }();
  for (int r = 0; r < ho; ++r) {
    for (int c = 0; c < wo; ++c) {
      const long po = static_cast<long>(r) * wo + c;
      const long p00 = static_cast<long>(2 * r) * w + 2 * c;
      const long cands[4] = {p00, p00 + 1, p00 + w, p00 + w + 1};
      for (int ci = 0; ci < ch; ++ci) {
        long best = cands[0];
        double bv = xv(ci, cands[0]);
        for (int t = 1; t < 4; ++t) {
          const double v = xv(ci, cands[t]);
          if (v > bv) {
            bv = v;
            best = cands[t];
          }
        }
        argmax[static_cast<size_t>(po) * ch + ci] = static_cast<int>(best);
        if constexpr (is_dual_v<M>) {
          y.v(ci, po) = x.v(ci, best);
          y.d(ci, po) = x.d(ci, best);
        } else {
          y(ci, po) = x(ci, best);
        }
      }
    }
  }
}

template <class M>
void maxpool2_backward(const M& dy, const std::vector<int>& argmax, int ch, int h, int w,
                       M& dx) {
  set_zero(dx, ch, static_cast<long>(h) * w);
  const long npo = cols_of(dy);
  for (long po = 0; po < npo; ++po) {
    for (int ci = 0; ci < ch; ++ci) {
      const int src = argmax[static_cast<size_t>(po) * ch + ci];
      if constexpr (is_dual_v<M>) {
        dx.v(ci, src) += dy.v(ci, po);
        dx.d(ci, src) += dy.d(ci, po);
      } else {
        dx(ci, src) += dy(ci, po);
      }
    }
  }
}

// --- 2x bilinear upsampling ----------------------------------------------

// Output pixel i samples input at (i+0.5)/2 - 0.5 with clamped borders.
struct UpsampleTable {
  std::vector<int> i0, i1;
  std::vector<double> w1;  // weight of i1; i0 gets 1-w1
};

inline UpsampleTable make_upsample_table(int n_in) {
  UpsampleTable t;
  const int n_out = 2 * n_in;
  t.i0.resize(n_out);
  t.i1.resize(n_out);
  t.w1.resize(n_out);
  for (int i = 0; i < n_out; ++i) {
    const double f = 0.5 * i - 0.25;
    int lo = static_cast<int>(std::floor(f));
    const double w = f - lo;
    int hi = lo + 1;
    lo = std::clamp(lo, 0, n_in - 1);
    hi = std::clamp(hi, 0, n_in - 1);
    t.i0[i] = lo;
    t.i1[i] = hi;
    t.w1[i] = w;
  }
  return t;
}

template <class M>
void upsample2_forward(const M& x, int ch, int h, int w, M& y) {
  const UpsampleTable ty = make_upsample_table(h);
  const UpsampleTable tx = make_upsample_table(w);
  const int ho = 2 * h, wo = 2 * w;
  set_zero(y, ch, static_cast<long>(ho) * wo);
  for (int r = 0; r < ho; ++r) {
    const double wy1 = ty.w1[r];
    const long r0 = ty.i0[r], r1 = ty.i1[r];
    for (int c = 0; c < wo; ++c) {
      const double wx1 = tx.w1[c];
      const long c0 = tx.i0[c], c1 = tx.i1[c];
      const long po = static_cast<long>(r) * wo + c;
      const double w00 = (1 - wy1) * (1 - wx1), w01 = (1 - wy1) * wx1;
      const double w10 = wy1 * (1 - wx1), w11 = wy1 * wx1;
      const long q00 = r0 * w + c0, q01 = r0 * w + c1, q10 = r1 * w + c0, q11 = r1 * w + c1;
      if constexpr (is_dual_v<M>) {
        y.v.col(po) = w00 * x.v.col(q00) + w01 * x.v.col(q01) + w10 * x.v.col(q10) +
                      w11 * x.v.col(q11);
        y.d.col(po) = w00 * x.d.col(q00) + w01 * x.d.col(q01) + w10 * x.d.col(q10) +
                      w11 * x.d.col(q11);
      } else {
        y.col(po) =
            w00 * x.col(q00) + w01 * x.col(q01) + w10 * x.col(q10) + w11 * x.col(q11);
      }
    }
  }
}

template <class M>
void upsample2_backward(const M& dy, int ch, int h, int w, M& dx) {
  const UpsampleTable ty = make_upsample_table(h);
  const UpsampleTable tx = make_upsample_table(w);
  const int ho = 2 * h, wo = 2 * w;
  set_zero(dx, ch, static_cast<long>(h) * w);
  for (int r = 0; r < ho; ++r) {
    const double wy1 = ty.w1[r];
    const long r0 = ty.i0[r], r1 = ty.i1[r];
    for (int c = 0; c < wo; ++c) {
      const double wx1 = tx.w1[c];
      const long c0 = tx.i0[c], c1 = tx.i1[c];
      const long po = static_cast<long>(r) * wo + c;
      const double w00 = (1 - wy1) * (1 - wx1), w01 = (1 - wy1) * wx1;
      const double w10 = wy1 * (1 - wx1), w11 = wy1 * wx1;
      const long q00 = r0 * w + c0, q01 = r0 * w + c1, q10 = r1 * w + c0, q11 = r1 * w + c1;
      if constexpr (is_dual_v<M>) {
        dx.v.col(q00) += w00 * dy.v.col(po);
        dx.v.col(q01) += w01 * dy.v.col(po);
        dx.v.col(q10) += w10 * dy.v.col(po);
        dx.v.col(q11) += w11 * dy.v.col(po);
        dx.d.col(q00) += w00 * dy.d.col(po);
        dx.d.col(q01) += w01 * dy.d.col(po);
        dx.d.col(q10) += w10 * dy.d.col(po);
        dx.d.col(q11) += w11 * dy.d.col(po);
      } else {
        dx.col(q00) += w00 * dy.col(po);
        dx.col(q01) += w01 * dy.col(po);
        dx.col(q10) += w10 * dy.col(po);
        dx.col(q11) += w11 * dy.col(po);
      }
    }
  }
}

// --- channel concatenation ----------------------------------------------

// cat = [top; bottom]. A disabled skip passes a zero bottom block, keeping
// parameter shapes fixed while removing the connection's influence.
template <class M>
void concat_rows(const M& top, const M* bottom, int bottom_rows, M& cat) {
  const long n = cols_of(top);
  const long rt = rows_of(top);
  set_zero(cat, rt + bottom_rows, n);
  if constexpr (is_dual_v<M>) {
    cat.v.topRows(rt) = top.v;
    cat.d.topRows(rt) = top.d;
    if (bottom) {
      cat.v.bottomRows(bottom_rows) = bottom->v;
      cat.d.bottomRows(bottom_rows) = bottom->d;
    }
  } else {
    cat.topRows(rt) = top;
    if (bottom) cat.bottomRows(bottom_rows) = *bottom;
  }
}

template <class M>
void split_rows(const M& dcat, long top_rows, M& dtop, M* dbottom) {
  if constexpr (is_dual_v<M>) {
    dtop.v = dcat.v.topRows(top_rows);
    dtop.d = dcat.d.topRows(top_rows);
    if (dbottom) {
      dbottom->v = dcat.v.bottomRows(dcat.v.rows() - top_rows);
      dbottom->d = dcat.d.bottomRows(dcat.d.rows() - top_rows);
    }
  } else {
    dtop = dcat.topRows(top_rows);
    if (dbottom) *dbottom = dcat.bottomRows(dcat.rows() - top_rows);
  }
}

// --- stat-free instance normalization ----------------------------------------

// Per channel, per image: xhat = (x - mean) / sqrt(var + eps). No learned
// affine and no running statistics, so episodic adaptation only ever touches
// weights and biases.
constexpr double kNormEps = 1e-5;

template <class M>
void instnorm_forward(M& x, std::vector<Scal<M>>& inv_std) {
  const long ch = rows_of(x), n = cols_of(x);
  inv_std.resize(ch);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (long ci = 0; ci < ch; ++ci) {
    if constexpr (is_dual_v<M>) {
      const double mu_v = x.v.row(ci).mean();
      const double mu_d = x.d.row(ci).mean();
      x.v.row(ci).array() -= mu_v;
      x.d.row(ci).array() -= mu_d;
      const double var_v = x.v.row(ci).squaredNorm() * inv_n;
      const double var_d = 2.0 * inv_n * x.v.row(ci).dot(x.d.row(ci));
      const double s_v = 1.0 / std::sqrt(var_v + kNormEps);
      const double s_d = -0.5 * s_v * s_v * s_v * var_d;
      inv_std[ci] = Dual{s_v, s_d};
      // xhat = xc * s  (product rule on the tangent)
      x.d.row(ci) = x.d.row(ci) * s_v + x.v.row(ci) * s_d;
      x.v.row(ci) *= s_v;
    } else {
      const double mu = x.row(ci).mean();
      x.row(ci).array() -= mu;
      const double var = x.row(ci).squaredNorm() * inv_n;
      const double s = 1.0 / std::sqrt(var + kNormEps);
      inv_std[ci] = s;
      x.row(ci) *= s;
    }
  }
}

// dx = s * (dy - mean(dy) - xhat * mean(dy .* xhat)); xhat passed as stored.
template <class M>
void instnorm_backward(M& dy, const M& xhat, const std::vector<Scal<M>>& inv_std) {
  const long ch = rows_of(dy), n = cols_of(dy);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (long ci = 0; ci < ch; ++ci) {
    if constexpr (is_dual_v<M>) {
      const Dual s = inv_std[ci];
      const Dual m1{dy.v.row(ci).mean(), dy.d.row(ci).mean()};
      const Dual m2{dy.v.row(ci).dot(xhat.v.row(ci)) * inv_n,
                    (dy.v.row(ci).dot(xhat.d.row(ci)) + dy.d.row(ci).dot(xhat.v.row(ci))) *
                        inv_n};
      // t = dy - m1 - xhat*m2 evaluated in dual arithmetic, then dx = s*t.
      RMat tv = dy.v.row(ci).array() - m1.v;
      RMat td = dy.d.row(ci).array() - m1.d;
      tv -= xhat.v.row(ci) * m2.v;
      td -= xhat.v.row(ci) * m2.d + xhat.d.row(ci) * m2.v;
      dy.v.row(ci) = tv * s.v;
      dy.d.row(ci) = td * s.v + tv * s.d;
    } else {
      const double s = inv_std[ci];
      const double m1 = dy.row(ci).mean();
      const double m2 = dy.row(ci).dot(xhat.row(ci)) * inv_n;
      dy.row(ci) = s * (dy.row(ci).array() - m1 - xhat.row(ci).array() * m2);
    }
  }
}

}  // namespace weasel::nn
