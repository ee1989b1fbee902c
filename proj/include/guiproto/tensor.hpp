#pragma once

// Dense float32 tensors (NCHW) and the layer primitives of the classifier,
// each with an exact analytic backward pass. Convolution lowers to im2col and
// a single GEMM per sample.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "guiproto/core.hpp"

namespace guiproto {

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, float fill = 0.0f) : shape_(std::move(shape)) {
    if (shape_.empty() || shape_.size() > 4) throw ShapeError("tensor rank must be 1..4, got " + std::to_string(shape_.size()));
    for (int d : shape_)
      if (d <= 0) throw ShapeError("tensor dimensions must be positive, got " + shape_string());
    data_.assign(numel_of(shape_), fill);
  }
  Tensor(std::vector<int> shape, std::vector<float> data) : Tensor(std::move(shape)) {
    if (data.size() != data_.size())
      throw ShapeError("tensor data length " + std::to_string(data.size()) + " does not match shape " + shape_string());
    data_ = std::move(data);
  }

  const std::vector<int>& shape() const { return shape_; }
  int dim(std::size_t i) const { return shape_.at(i); }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::vector<float>& values() { return data_; }
  const std::vector<float>& values() const { return data_; }
  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  // NCHW element access for rank-4 tensors.
  float& at(int n, int c, int h, int w) { return data_[offset(n, c, h, w)]; }
  float at(int n, int c, int h, int w) const { return data_[offset(n, c, h, w)]; }

  std::string shape_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < shape_.size(); ++i) s += (i ? "x" : "") + std::to_string(shape_[i]);
    return s + ")";
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
  }

  Tensor reshaped(std::vector<int> shape) const {
    if (numel_of(shape) != data_.size()) throw ShapeError("cannot reshape " + shape_string());
    return Tensor(std::move(shape), data_);
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  static std::size_t numel_of(const std::vector<int>& s) {
    std::size_t n = 1;
    for (int d : s) n *= static_cast<std::size_t>(d);
    return n;
  }
  std::size_t offset(int n, int c, int h, int w) const {
    return ((static_cast<std::size_t>(n) * shape_[1] + c) * shape_[2] + h) * shape_[3] + w;
  }

  std::vector<int> shape_;
  std::vector<float> data_;
};

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;

namespace detail {

inline void require_rank(const Tensor& t, std::size_t r, const char* what) {
  if (t.rank() != r)
    throw ShapeError(std::string(what) + ": expected rank " + std::to_string(r) + ", got " + t.shape_string());
}

inline int conv_out(int in, int k, int stride, int pad) { return (in + 2 * pad - k) / stride + 1; }

// Columns of one sample: rows = (c, ky, kx), cols = (oy, ox).
inline void im2col(const float* x, int C, int H, int W, int kh, int kw, int stride, int pad, int Ho, int Wo, float* cols) {
  for (int c = 0; c < C; ++c)
    for (int ky = 0; ky < kh; ++ky)
      for (int kx = 0; kx < kw; ++kx) {
        float* row = cols + ((static_cast<std::size_t>(c) * kh + ky) * kw + kx) * Ho * Wo;
        for (int oy = 0; oy < Ho; ++oy) {
          const int iy = oy * stride - pad + ky;
          float* out = row + static_cast<std::size_t>(oy) * Wo;
          if (iy < 0 || iy >= H) {
            std::fill_n(out, Wo, 0.0f);
            continue;
          }
          const float* in = x + (static_cast<std::size_t>(c) * H + iy) * W;
          for (int ox = 0; ox < Wo; ++ox) {
            const int ix = ox * stride - pad + kx;
            out[ox] = (ix >= 0 && ix < W) ? in[ix] : 0.0f;
          }
        }
      }
}

inline void col2im(const float* cols, int C, int H, int W, int kh, int kw, int stride, int pad, int Ho, int Wo, float* x) {
  for (int c = 0; c < C; ++c)
    for (int ky = 0; ky < kh; ++ky)
      for (int kx = 0; kx < kw; ++kx) {
        const float* row = cols + ((static_cast<std::size_t>(c) * kh + ky) * kw + kx) * Ho * Wo;
        for (int oy = 0; oy < Ho; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= H) continue;
          float* out = x + (static_cast<std::size_t>(c) * H + iy) * W;
          const float* in = row + static_cast<std::size_t>(oy) * Wo;
          for (int ox = 0; ox < Wo; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < W) out[ix] += in[ox];
          }
        }
      }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Convolution: x (N,C,H,W), w (K,C,kh,kw), b (K) -> (N,K,Ho,Wo)

inline void check_conv_shapes(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad) {
  detail::require_rank(x, 4, "conv2d input");
  detail::require_rank(w, 4, "conv2d weights");
  detail::require_rank(b, 1, "conv2d bias");
  if (stride < 1) throw ShapeError("conv2d: stride must be >= 1");
  if (pad < 0) throw ShapeError("conv2d: padding must be >= 0");
  if (x.dim(1) != w.dim(1))
    throw ShapeError("conv2d: input has " + std::to_string(x.dim(1)) + " channels but weights expect " +
                     std::to_string(w.dim(1)));
  if (b.dim(0) != w.dim(0))
    throw ShapeError("conv2d: bias length " + std::to_string(b.dim(0)) + " does not match " +
                     std::to_string(w.dim(0)) + " output channels");
  if (x.dim(2) + 2 * pad < w.dim(2) || x.dim(3) + 2 * pad < w.dim(3))
    throw ShapeError("conv2d: kernel " + w.shape_string() + " larger than padded input " + x.shape_string());
}

inline Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride = 1, int pad = 0) {
  check_conv_shapes(x, w, b, stride, pad);
  const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int K = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const int Ho = detail::conv_out(H, kh, stride, pad), Wo = detail::conv_out(W, kw, stride, pad);
  const int rows = C * kh * kw, hw = Ho * Wo;
  Tensor y({N, K, Ho, Wo});
  std::vector<float> cols(static_cast<std::size_t>(rows) * hw);
  const ConstMatMap wm(w.data(), K, rows);
  for (int n = 0; n < N; ++n) {
    detail::im2col(x.data() + static_cast<std::size_t>(n) * C * H * W, C, H, W, kh, kw, stride, pad, Ho, Wo, cols.data());
    MatMap out(y.data() + static_cast<std::size_t>(n) * K * hw, K, hw);
    out.noalias() = wm * ConstMatMap(cols.data(), rows, hw);
    for (int k = 0; k < K; ++k) out.row(k).array() += b[static_cast<std::size_t>(k)];
  }
  return y;
}

struct ConvGrads {
  Tensor dx, dw, db;
};

inline ConvGrads conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& dy, int stride = 1, int pad = 0) {
  const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int K = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const int Ho = detail::conv_out(H, kh, stride, pad), Wo = detail::conv_out(W, kw, stride, pad);
  if (dy.rank() != 4 || dy.dim(0) != N || dy.dim(1) != K || dy.dim(2) != Ho || dy.dim(3) != Wo)
    throw ShapeError("conv2d_backward: upstream gradient " + dy.shape_string() + " does not match output (" +
                     std::to_string(N) + "x" + std::to_string(K) + "x" + std::to_string(Ho) + "x" + std::to_string(Wo) + ")");
  const int rows = C * kh * kw, hw = Ho * Wo;
  ConvGrads g{Tensor(x.shape()), Tensor(w.shape()), Tensor({K})};
  std::vector<float> cols(static_cast<std::size_t>(rows) * hw), dcols(cols.size());
  const ConstMatMap wm(w.data(), K, rows);
  MatMap dwm(g.dw.data(), K, rows);
  for (int n = 0; n < N; ++n) {
    detail::im2col(x.data() + static_cast<std::size_t>(n) * C * H * W, C, H, W, kh, kw, stride, pad, Ho, Wo, cols.data());
    const ConstMatMap dym(dy.data() + static_cast<std::size_t>(n) * K * hw, K, hw);
    dwm.noalias() += dym * ConstMatMap(cols.data(), rows, hw).transpose();
    // Plain loop: Eigen's vectorised sum() peels by address, which makes the
    // rounding depend on where the buffer happens to be allocated.
    for (int k = 0; k < K; ++k) {
      const float* row = dy.data() + (static_cast<std::size_t>(n) * K + k) * hw;
      float s = 0.0f;
      for (int i = 0; i < hw; ++i) s += row[i];
      g.db[static_cast<std::size_t>(k)] += s;
    }
    MatMap(dcols.data(), rows, hw).noalias() = wm.transpose() * dym;
    detail::col2im(dcols.data(), C, H, W, kh, kw, stride, pad, Ho, Wo, g.dx.data() + static_cast<std::size_t>(n) * C * H * W);
  }
  return g;
}

// ---------------------------------------------------------------------------
// ReLU

inline Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.values()) v = v > 0.0f ? v : 0.0f;
  return y;
}

inline void relu_inplace(Tensor& x) {
  for (auto& v : x.values()) v = v > 0.0f ? v : 0.0f;
}

// Gradient masked where the forward input was <= 0.
inline Tensor relu_backward(const Tensor& x, const Tensor& dy) {
  if (x.shape() != dy.shape()) throw ShapeError("relu_backward: shapes " + x.shape_string() + " and " + dy.shape_string());
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i)
    if (x[i] <= 0.0f) dx[i] = 0.0f;
  return dx;
}

// ---------------------------------------------------------------------------
// 2x2 / stride 2 max pooling

struct PoolResult {
  Tensor y;
  std::vector<std::uint32_t> argmax;  // flat input index per output element
};

inline PoolResult maxpool2x2(const Tensor& x) {
  detail::require_rank(x, 4, "maxpool2x2 input");
  const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  if (H % 2 || W % 2) throw ShapeError("maxpool2x2: spatial dims must be even, got " + x.shape_string());
  const int Ho = H / 2, Wo = W / 2;
  PoolResult r{Tensor({N, C, Ho, Wo}), std::vector<std::uint32_t>(static_cast<std::size_t>(N) * C * Ho * Wo)};
  std::size_t o = 0;
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C; ++c) {
      const std::size_t base = (static_cast<std::size_t>(n) * C + c) * H * W;
      for (int oy = 0; oy < Ho; ++oy)
        for (int ox = 0; ox < Wo; ++ox, ++o) {
          std::size_t best = base + static_cast<std::size_t>(2 * oy) * W + 2 * ox;
          // Row-major window scan; strict '>' keeps the first maximum.
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
              const std::size_t i = base + static_cast<std::size_t>(2 * oy + dy) * W + 2 * ox + dx;
              if (x[i] > x[best]) best = i;
            }
          r.y[o] = x[best];
          r.argmax[o] = static_cast<std::uint32_t>(best);
        }
    }
  return r;
}

inline Tensor maxpool2x2_backward(const std::vector<int>& input_shape, const std::vector<std::uint32_t>& argmax,
                                  const Tensor& dy) {
  if (dy.size() != argmax.size()) throw ShapeError("maxpool2x2_backward: gradient " + dy.shape_string() + " does not match the pooled output");
  Tensor dx(input_shape);
  for (std::size_t o = 0; o < argmax.size(); ++o) dx[argmax[o]] += dy[o];
  return dx;
}

// ---------------------------------------------------------------------------
// Fully connected: x (N,in), w (out,in), b (out) -> (N,out)

inline Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  detail::require_rank(x, 2, "linear input");
  detail::require_rank(w, 2, "linear weights");
  if (x.dim(1) != w.dim(1))
    throw ShapeError("linear: input width " + std::to_string(x.dim(1)) + " does not match weights " + w.shape_string());
  if (b.rank() != 1 || b.dim(0) != w.dim(0)) throw ShapeError("linear: bias " + b.shape_string() + " does not match weights " + w.shape_string());
  Tensor y({x.dim(0), w.dim(0)});
  MatMap ym(y.data(), x.dim(0), w.dim(0));
  ym.noalias() = ConstMatMap(x.data(), x.dim(0), x.dim(1)) * ConstMatMap(w.data(), w.dim(0), w.dim(1)).transpose();
  for (int n = 0; n < x.dim(0); ++n)
    for (int j = 0; j < w.dim(0); ++j) ym(n, j) += b[static_cast<std::size_t>(j)];
  return y;
}

struct LinearGrads {
  Tensor dx, dw, db;
};

inline LinearGrads linear_backward(const Tensor& x, const Tensor& w, const Tensor& dy) {
  if (dy.rank() != 2 || dy.dim(0) != x.dim(0) || dy.dim(1) != w.dim(0))
    throw ShapeError("linear_backward: gradient " + dy.shape_string() + " does not match output");
  LinearGrads g{Tensor(x.shape()), Tensor(w.shape()), Tensor({w.dim(0)})};
  const ConstMatMap dym(dy.data(), dy.dim(0), dy.dim(1));
  MatMap(g.dx.data(), x.dim(0), x.dim(1)).noalias() = dym * ConstMatMap(w.data(), w.dim(0), w.dim(1));
  MatMap(g.dw.data(), w.dim(0), w.dim(1)).noalias() = dym.transpose() * ConstMatMap(x.data(), x.dim(0), x.dim(1));
  for (int n = 0; n < dy.dim(0); ++n)
    for (int j = 0; j < dy.dim(1); ++j) g.db[static_cast<std::size_t>(j)] += dym(n, j);
  return g;
}

// ---------------------------------------------------------------------------
// Softmax cross-entropy over rows of (N, K). Loss is the batch mean, so the
// gradient is (p - onehot) / N.

struct SoftmaxCeResult {
  double loss = 0.0;
  Tensor probabilities;
  Tensor gradient;
};

inline Tensor softmax(const Tensor& logits) {
  detail::require_rank(logits, 2, "softmax logits");
  const int N = logits.dim(0), K = logits.dim(1);
  Tensor p(logits.shape());
  for (int n = 0; n < N; ++n) {
    const float* z = logits.data() + static_cast<std::size_t>(n) * K;
    const float mx = *std::max_element(z, z + K);
    double sum = 0.0;
    for (int k = 0; k < K; ++k) sum += std::exp(static_cast<double>(z[k]) - mx);
    for (int k = 0; k < K; ++k) p[static_cast<std::size_t>(n) * K + k] = static_cast<float>(std::exp(static_cast<double>(z[k]) - mx) / sum);
  }
  return p;
}

inline SoftmaxCeResult softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
  detail::require_rank(logits, 2, "softmax_cross_entropy logits");
  const int N = logits.dim(0), K = logits.dim(1);
  if (static_cast<int>(labels.size()) != N)
    throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) + " labels for " + std::to_string(N) + " rows");
  SoftmaxCeResult r{0.0, softmax(logits), Tensor(logits.shape())};
  for (int n = 0; n < N; ++n) {
    const int y = labels[static_cast<std::size_t>(n)];
    if (y < 0 || y >= K) throw ValidationError("softmax_cross_entropy: label " + std::to_string(y) + " outside [0," + std::to_string(K) + ")");
    const float* z = logits.data() + static_cast<std::size_t>(n) * K;
    const double mx = *std::max_element(z, z + K);
    double sum = 0.0;
    for (int k = 0; k < K; ++k) sum += std::exp(z[k] - mx);
    r.loss += (std::log(sum) + mx - z[y]) / N;
    for (int k = 0; k < K; ++k) {
      const std::size_t i = static_cast<std::size_t>(n) * K + k;
      r.gradient[i] = (r.probabilities[i] - (k == y ? 1.0f : 0.0f)) / static_cast<float>(N);
    }
  }
  return r;
}

}  // namespace guiproto
