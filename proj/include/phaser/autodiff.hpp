#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <unordered_set>
#include <vector>

#include "phaser/common.hpp"

// Minimal dense-tensor reverse-mode autodiff. Tensors are flat row-major
// buffers plus a shape; ops build a DAG of nodes whose backward closures
// accumulate gradients into their parents. Storage is templated on the
// scalar: training runs in float, gradient checking in double. Explicit
// reductions (means, losses, norm statistics) accumulate in double.
namespace phaser::ad {

enum class Mode { Train, Eval };

template <typename S>
struct Node {
  using Storage = Eigen::Array<S, Eigen::Dynamic, 1>;

  std::vector<int> shape;
  Storage value;
  Storage grad;  // empty until first use
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node<S>>> parents;
  std::function<void(Node<S>&)> backward;

  Eigen::Index numel() const { return value.size(); }

  Storage& ensure_grad() {
    if (grad.size() != value.size()) grad = Storage::Zero(value.size());
    return grad;
  }
};

inline Eigen::Index shape_numel(const std::vector<int>& shape) {
  Eigen::Index n = 1;
  for (int d : shape) n *= d;
  return n;
}

template <typename S>
class Tensor {
 public:
  using Storage = typename Node<S>::Storage;

  Tensor() = default;

  static Tensor leaf(std::vector<int> shape, Storage data, bool requires_grad = false) {
    if (shape_numel(shape) != data.size())
      throw DataError("tensor: data length does not match shape");
    auto n = std::make_shared<Node<S>>();
    n->shape = std::move(shape);
    n->value = std::move(data);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
  }

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false) {
    const Eigen::Index n = shape_numel(shape);
    return leaf(std::move(shape), Storage::Zero(n), requires_grad);
  }

  bool valid() const { return static_cast<bool>(n_); }
  const std::vector<int>& shape() const { return n_->shape; }
  int dim(int i) const { return n_->shape[static_cast<std::size_t>(i)]; }
  int rank() const { return static_cast<int>(n_->shape.size()); }
  Eigen::Index numel() const { return n_->numel(); }
  Storage& value() { return n_->value; }
  const Storage& value() const { return n_->value; }
  Storage& grad() { return n_->ensure_grad(); }
  bool has_grad() const { return n_->grad.size() == n_->value.size(); }
  void zero_grad() { n_->grad = Storage::Zero(n_->value.size()); }
  bool requires_grad() const { return n_->requires_grad; }
  void set_requires_grad(bool b) { n_->requires_grad = b; }
  std::shared_ptr<Node<S>> node() const { return n_; }

  explicit Tensor(std::shared_ptr<Node<S>> n) : n_(std::move(n)) {}

 private:
  std::shared_ptr<Node<S>> n_;
};

namespace detail {

template <typename S>
Tensor<S> make_op(std::vector<int> shape, typename Node<S>::Storage value,
                  std::vector<std::shared_ptr<Node<S>>> parents,
                  std::function<void(Node<S>&)> backward) {
  auto n = std::make_shared<Node<S>>();
  n->shape = std::move(shape);
  n->value = std::move(value);
  n->parents = std::move(parents);
  n->backward = std::move(backward);
  for (const auto& p : n->parents)
    if (p->requires_grad) n->requires_grad = true;
  return Tensor<S>(std::move(n));
}

inline void require_rank(const std::vector<int>& shape, int rank, const char* who) {
  if (static_cast<int>(shape.size()) != rank)
    throw DataError(std::string(who) + ": expected rank " + std::to_string(rank) + " tensor");
}

}  // namespace detail

// Reverse-mode sweep from a scalar root. Gradients accumulate additively;
// callers reset leaf grads between independent passes.
template <typename S>
void backpropagate(const Tensor<S>& loss) {
  if (!loss.valid() || loss.numel() != 1)
    throw NumericError("backpropagate: root must be a scalar");

  // Iterative post-order DFS; the graph is acyclic by construction.
  std::vector<Node<S>*> order;
  std::unordered_set<Node<S>*> visited;
  std::vector<std::pair<Node<S>*, std::size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node<S>* p = node->parents[idx++].get();
      if (visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node<S>* n : order) n->ensure_grad();
  loss.node()->grad[0] += S(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backward) (*it)->backward(**it);
}

// ---------------------------------------------------------------------------
// elementwise and reduction ops

template <typename S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.shape() != b.shape()) throw DataError("add: shape mismatch");
  auto pa = a.node();
  auto pb = b.node();
  return detail::make_op<S>(a.shape(), a.value() + b.value(), {pa, pb}, [pa, pb](Node<S>& n) {
    pa->ensure_grad() += n.grad;
    pb->ensure_grad() += n.grad;
  });
}

template <typename S>
Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.shape() != b.shape()) throw DataError("mul: shape mismatch");
  auto pa = a.node();
  auto pb = b.node();
  return detail::make_op<S>(a.shape(), a.value() * b.value(), {pa, pb}, [pa, pb](Node<S>& n) {
    pa->ensure_grad() += n.grad * pb->value;
    pb->ensure_grad() += n.grad * pa->value;
  });
}

template <typename S>
Tensor<S> scale(const Tensor<S>& a, S c) {
  auto pa = a.node();
  return detail::make_op<S>(a.shape(), a.value() * c, {pa},
                            [pa, c](Node<S>& n) { pa->ensure_grad() += n.grad * c; });
}

template <typename S>
Tensor<S> silu(const Tensor<S>& x) {
  auto px = x.node();
  typename Node<S>::Storage sig = (S(1) / (S(1) + (-x.value()).exp()));
  typename Node<S>::Storage out = x.value() * sig;
  return detail::make_op<S>(x.shape(), std::move(out), {px}, [px, sig](Node<S>& n) {
    // d silu = sigma * (1 + x*(1 - sigma))
    px->ensure_grad() += n.grad * sig * (S(1) + px->value * (S(1) - sig));
  });
}

template <typename S>
Tensor<S> sum_all(const Tensor<S>& x) {
  auto px = x.node();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.numel(); ++i) acc += static_cast<double>(x.value()[i]);
  typename Node<S>::Storage v(1);
  v[0] = static_cast<S>(acc);
  return detail::make_op<S>({1}, std::move(v), {px},
                            [px](Node<S>& n) { px->ensure_grad() += n.grad[0]; });
}

// Mean that collapses one axis to size 1 (keepdim).
template <typename S>
Tensor<S> mean_over_axis(const Tensor<S>& x, int axis) {
  const auto& sh = x.shape();
  if (axis < 0 || axis >= static_cast<int>(sh.size()))
    throw DataError("mean_over_axis: axis out of range");
  Eigen::Index pre = 1, post = 1;
  for (int i = 0; i < axis; ++i) pre *= sh[static_cast<std::size_t>(i)];
  for (std::size_t i = static_cast<std::size_t>(axis) + 1; i < sh.size(); ++i) post *= sh[i];
  const Eigen::Index len = sh[static_cast<std::size_t>(axis)];

  std::vector<int> out_shape = sh;
  out_shape[static_cast<std::size_t>(axis)] = 1;
  typename Node<S>::Storage out(pre * post);
  for (Eigen::Index p = 0; p < pre; ++p)
    for (Eigen::Index q = 0; q < post; ++q) {
      double acc = 0.0;
      for (Eigen::Index a = 0; a < len; ++a)
        acc += static_cast<double>(x.value()[(p * len + a) * post + q]);
      out[p * post + q] = static_cast<S>(acc / static_cast<double>(len));
    }
  auto px = x.node();
  return detail::make_op<S>(std::move(out_shape), std::move(out), {px},
                            [px, pre, post, len](Node<S>& n) {
                              auto& g = px->ensure_grad();
                              const S inv = S(1) / static_cast<S>(len);
                              for (Eigen::Index p = 0; p < pre; ++p)
                                for (Eigen::Index q = 0; q < post; ++q) {
                                  const S gv = n.grad[p * post + q] * inv;
                                  for (Eigen::Index a = 0; a < len; ++a)
                                    g[(p * len + a) * post + q] += gv;
                                }
                            });
}

template <typename S>
Tensor<S> reshape(const Tensor<S>& x, std::vector<int> new_shape) {
  if (shape_numel(new_shape) != x.numel()) throw DataError("reshape: element count mismatch");
  auto px = x.node();
  return detail::make_op<S>(std::move(new_shape), x.value(), {px},
                            [px](Node<S>& n) { px->ensure_grad() += n.grad; });
}

// ---------------------------------------------------------------------------
// rank-4 structure ops (N, C, H, W)

template <typename S>
Tensor<S> slice_axis2(const Tensor<S>& x, int start, int len) {
  detail::require_rank(x.shape(), 4, "slice_axis2");
  const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  if (start < 0 || len < 1 || start + len > H) throw DataError("slice_axis2: range out of bounds");
  typename Node<S>::Storage out(static_cast<Eigen::Index>(N) * C * len * W);
  const auto& v = x.value();
  Eigen::Index o = 0;
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C; ++c)
      for (int h = start; h < start + len; ++h)
        for (int w = 0; w < W; ++w)
          out[o++] = v[((static_cast<Eigen::Index>(n) * C + c) * H + h) * W + w];
  auto px = x.node();
  return detail::make_op<S>({N, C, len, W}, std::move(out), {px},
                            [px, N, C, H, W, start, len](Node<S>& n4) {
                              auto& g = px->ensure_grad();
                              Eigen::Index o = 0;
                              for (int n = 0; n < N; ++n)
                                for (int c = 0; c < C; ++c)
                                  for (int h = start; h < start + len; ++h)
                                    for (int w = 0; w < W; ++w)
                                      g[((static_cast<Eigen::Index>(n) * C + c) * H + h) * W + w] +=
                                          n4.grad[o++];
                            });
}

template <typename S>
Tensor<S> concat(const std::vector<Tensor<S>>& parts, int axis) {
  if (parts.empty()) throw DataError("concat: no parts");
  if (axis != 1 && axis != 2) throw DataError("concat: only axes 1 and 2 are supported");
  const int N = parts[0].dim(0), W = parts[0].dim(3);
  int total = 0;
  for (const auto& p : parts) {
    detail::require_rank(p.shape(), 4, "concat");
    for (int d = 0; d < 4; ++d)
      if (d != axis && p.dim(d) != parts[0].dim(d)) throw DataError("concat: shape mismatch");
    total += p.dim(axis);
  }
  std::vector<int> out_shape = parts[0].shape();
  out_shape[static_cast<std::size_t>(axis)] = total;
  typename Node<S>::Storage out(shape_numel(out_shape));
  const int OC = out_shape[1], OH = out_shape[2];

  std::vector<std::shared_ptr<Node<S>>> pnodes;
  std::vector<int> offsets;
  int off = 0;
  for (const auto& p : parts) {
    const int C = p.dim(1), H = p.dim(2);
    const auto& v = p.value();
    Eigen::Index i = 0;
    for (int n = 0; n < N; ++n)
      for (int c = 0; c < C; ++c)
        for (int h = 0; h < H; ++h)
          for (int w = 0; w < W; ++w) {
            const int oc = axis == 1 ? c + off : c;
            const int oh = axis == 2 ? h + off : h;
            out[((static_cast<Eigen::Index>(n) * OC + oc) * OH + oh) * W + w] = v[i++];
          }
    pnodes.push_back(p.node());
    offsets.push_back(off);
    off += p.dim(axis);
  }
  auto backward = [pnodes, offsets, axis, N, W, OC, OH](Node<S>& n4) {
    for (std::size_t pi = 0; pi < pnodes.size(); ++pi) {
      auto& p = pnodes[pi];
      const int C = p->shape[1], H = p->shape[2];
      auto& g = p->ensure_grad();
      const int off2 = offsets[pi];
      Eigen::Index i = 0;
      for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c)
          for (int h = 0; h < H; ++h)
            for (int w = 0; w < W; ++w) {
              const int oc = axis == 1 ? c + off2 : c;
              const int oh = axis == 2 ? h + off2 : h;
              g[i++] += n4.grad[((static_cast<Eigen::Index>(n) * OC + oc) * OH + oh) * W + w];
            }
    }
  };
  return detail::make_op<S>(std::move(out_shape), std::move(out), std::move(pnodes),
                            std::move(backward));
}

// a is (N, C, 1, W) and broadcasts over the feature axis of b (N, C, H, W).
template <typename S>
Tensor<S> broadcast_add_axis2(const Tensor<S>& a, const Tensor<S>& b) {
  detail::require_rank(a.shape(), 4, "broadcast_add_axis2");
  detail::require_rank(b.shape(), 4, "broadcast_add_axis2");
  const int N = b.dim(0), C = b.dim(1), H = b.dim(2), W = b.dim(3);
  if (a.dim(0) != N || a.dim(1) != C || a.dim(2) != 1 || a.dim(3) != W)
    throw DataError("broadcast_add_axis2: left operand must be (N, C, 1, W) matching right");
  typename Node<S>::Storage out(b.numel());
  const auto& av = a.value();
  const auto& bv = b.value();
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C; ++c) {
      const Eigen::Index abase = (static_cast<Eigen::Index>(n) * C + c) * W;
      for (int h = 0; h < H; ++h) {
        const Eigen::Index bbase = ((static_cast<Eigen::Index>(n) * C + c) * H + h) * W;
        for (int w = 0; w < W; ++w) out[bbase + w] = av[abase + w] + bv[bbase + w];
      }
    }
  auto pa = a.node();
  auto pb = b.node();
  return detail::make_op<S>(b.shape(), std::move(out), {pa, pb}, [pa, pb, N, C, H, W](Node<S>& n4) {
    auto& ga = pa->ensure_grad();
    pb->ensure_grad() += n4.grad;
    for (int n = 0; n < N; ++n)
      for (int c = 0; c < C; ++c) {
        const Eigen::Index abase = (static_cast<Eigen::Index>(n) * C + c) * W;
        for (int h = 0; h < H; ++h) {
          const Eigen::Index bbase = ((static_cast<Eigen::Index>(n) * C + c) * H + h) * W;
          for (int w = 0; w < W; ++w) ga[abase + w] += n4.grad[bbase + w];
        }
      }
  });
}

// ---------------------------------------------------------------------------
// conv2d: cross-correlation, stride 1, zero padding

namespace detail {

template <typename S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <typename S>
void im2col(const typename Node<S>::Storage& x, Eigen::Index sample, int C, int H, int W, int KH,
            int KW, int PH, int PW, int OH, int OW, MatX<S>& col) {
  col.resize(static_cast<Eigen::Index>(C) * KH * KW, static_cast<Eigen::Index>(OH) * OW);
  for (int c = 0; c < C; ++c)
    for (int kh = 0; kh < KH; ++kh)
      for (int kw = 0; kw < KW; ++kw) {
        const Eigen::Index row = (static_cast<Eigen::Index>(c) * KH + kh) * KW + kw;
        for (int oh = 0; oh < OH; ++oh) {
          const int hi = oh + kh - PH;
          for (int ow = 0; ow < OW; ++ow) {
            const int wi = ow + kw - PW;
            S v = S(0);
            if (hi >= 0 && hi < H && wi >= 0 && wi < W)
              v = x[((sample * C + c) * H + hi) * W + wi];
            col(row, static_cast<Eigen::Index>(oh) * OW + ow) = v;
          }
        }
      }
}

template <typename S>
void col2im_add(const MatX<S>& col, typename Node<S>::Storage& dx, Eigen::Index sample, int C,
                int H, int W, int KH, int KW, int PH, int PW, int OH, int OW) {
  for (int c = 0; c < C; ++c)
    for (int kh = 0; kh < KH; ++kh)
      for (int kw = 0; kw < KW; ++kw) {
        const Eigen::Index row = (static_cast<Eigen::Index>(c) * KH + kh) * KW + kw;
        for (int oh = 0; oh < OH; ++oh) {
          const int hi = oh + kh - PH;
          if (hi < 0 || hi >= H) continue;
          for (int ow = 0; ow < OW; ++ow) {
            const int wi = ow + kw - PW;
            if (wi < 0 || wi >= W) continue;
            dx[((sample * C + c) * H + hi) * W + wi] +=
                col(row, static_cast<Eigen::Index>(oh) * OW + ow);
          }
        }
      }
}

}  // namespace detail

template <typename S>
Tensor<S> conv2d(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b, int pad_h,
                 int pad_w) {
  detail::require_rank(x.shape(), 4, "conv2d input");
  detail::require_rank(w.shape(), 4, "conv2d weight");
  const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int OC = w.dim(0), KH = w.dim(2), KW = w.dim(3);
  if (w.dim(1) != C)
    throw DataError("conv2d: weight expects " + std::to_string(w.dim(1)) + " input channels, got " +
                    std::to_string(C));
  if (b.rank() != 1 || b.dim(0) != OC) throw DataError("conv2d: bias shape mismatch");
  const int OH = H + 2 * pad_h - KH + 1;
  const int OW = W + 2 * pad_w - KW + 1;
  if (OH < 1 || OW < 1) throw DataError("conv2d: kernel larger than padded input");

  using Mat = detail::MatX<S>;
  Eigen::Map<const Mat> wmat(w.value().data(), static_cast<Eigen::Index>(C) * KH * KW, OC);
  // row-major (OC, C*KH*KW) viewed column-major is its transpose
  typename Node<S>::Storage out(static_cast<Eigen::Index>(N) * OC * OH * OW);
  Mat col;
  for (int n = 0; n < N; ++n) {
    detail::im2col<S>(x.value(), n, C, H, W, KH, KW, pad_h, pad_w, OH, OW, col);
    Mat y = wmat.transpose() * col;  // OC x OH*OW
    for (int oc = 0; oc < OC; ++oc) {
      const S bias = b.value()[oc];
      const Eigen::Index base = (static_cast<Eigen::Index>(n) * OC + oc) * OH * OW;
      for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(OH) * OW; ++i)
        out[base + i] = y(oc, i) + bias;
    }
  }

  auto px = x.node();
  auto pw = w.node();
  auto pb = b.node();
  auto backward = [px, pw, pb, N, C, H, W, OC, KH, KW, pad_h, pad_w, OH, OW](Node<S>& n4) {
    auto& gx = px->ensure_grad();
    auto& gw = pw->ensure_grad();
    auto& gb = pb->ensure_grad();
    Eigen::Map<const Mat> wmat2(pw->value.data(), static_cast<Eigen::Index>(C) * KH * KW, OC);
    Eigen::Map<Mat> gwmat(gw.data(), static_cast<Eigen::Index>(C) * KH * KW, OC);
    Mat col, dy(OC, static_cast<Eigen::Index>(OH) * OW);
    for (int n = 0; n < N; ++n) {
      for (int oc = 0; oc < OC; ++oc) {
        const Eigen::Index base = (static_cast<Eigen::Index>(n) * OC + oc) * OH * OW;
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(OH) * OW; ++i)
          dy(oc, i) = n4.grad[base + i];
        gb[oc] += dy.row(oc).sum();
      }
      detail::im2col<S>(px->value, n, C, H, W, KH, KW, pad_h, pad_w, OH, OW, col);
      gwmat.noalias() += col * dy.transpose();
      Mat dcol = wmat2 * dy;  // C*KH*KW x OH*OW
      detail::col2im_add<S>(dcol, gx, n, C, H, W, KH, KW, pad_h, pad_w, OH, OW);
    }
  };
  return detail::make_op<S>({N, OC, OH, OW}, std::move(out), {px, pw, pb}, std::move(backward));

}

// Affine map: x (N, In), w (Out, In) row-major, b (Out) -> y (N, Out).
template <typename S>
Tensor<S> dense(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b) {
  detail::require_rank(x.shape(), 2, "dense input");
  detail::require_rank(w.shape(), 2, "dense weight");
  const int N = x.dim(0), In = x.dim(1), Out = w.dim(0);
  if (w.dim(1) != In) throw DataError("dense: weight/input width mismatch");
  if (b.rank() != 1 || b.dim(0) != Out) throw DataError("dense: bias shape mismatch");

  using RowMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> xm(x.value().data(), N, In);
  Eigen::Map<const RowMat> wm(w.value().data(), Out, In);
  Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>> bv(b.value().data(), Out);
  typename Node<S>::Storage out(static_cast<Eigen::Index>(N) * Out);
  Eigen::Map<RowMat> ym(out.data(), N, Out);
  ym.noalias() = xm * wm.transpose();
  ym.rowwise() += bv.transpose();

  auto px = x.node();
  auto pw = w.node();
  auto pb = b.node();
  return detail::make_op<S>({N, Out}, std::move(out), {px, pw, pb},
                            [px, pw, pb, N, In, Out](Node<S>& n2) {
                              Eigen::Map<const RowMat> gy(n2.grad.data(), N, Out);
                              Eigen::Map<const RowMat> xm2(px->value.data(), N, In);
                              Eigen::Map<const RowMat> wm2(pw->value.data(), Out, In);
                              Eigen::Map<RowMat> gx(px->ensure_grad().data(), N, In);
                              Eigen::Map<RowMat> gw(pw->ensure_grad().data(), Out, In);
                              Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>> gb(
                                  pb->ensure_grad().data(), Out);
                              gx.noalias() += gy * wm2;
                              gw.noalias() += gy.transpose() * xm2;
                              gb.noalias() += gy.colwise().sum().transpose();
                            });
}

// Mean over the batch of -log softmax(logits)[label], log-sum-exp stabilized.
template <typename S>
Tensor<S> cross_entropy_loss(const Tensor<S>& logits, const std::vector<int>& labels) {
  detail::require_rank(logits.shape(), 2, "cross_entropy_loss");
  const int N = logits.dim(0), K = logits.dim(1);
  if (N < 1) throw DataError("cross_entropy_loss: empty batch");
  if (K < 2) throw DataError("cross_entropy_loss: need at least 2 classes");
  if (static_cast<int>(labels.size()) != N)
    throw DataError("cross_entropy_loss: labels/batch size mismatch");
  for (int l : labels)
    if (l < 0 || l >= K) throw DataError("cross_entropy_loss: label out of range");

  typename Node<S>::Storage probs(logits.numel());
  double loss_acc = 0.0;
  for (int n = 0; n < N; ++n) {
    const Eigen::Index base = static_cast<Eigen::Index>(n) * K;
    double mx = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) mx = std::max(mx, static_cast<double>(logits.value()[base + k]));
    double sum = 0.0;
    for (int k = 0; k < K; ++k) sum += std::exp(static_cast<double>(logits.value()[base + k]) - mx);
    const double lse = mx + std::log(sum);
    for (int k = 0; k < K; ++k)
      probs[base + k] =
          static_cast<S>(std::exp(static_cast<double>(logits.value()[base + k]) - lse));
    loss_acc += lse - static_cast<double>(logits.value()[base + labels[static_cast<std::size_t>(n)]]);
  }
  typename Node<S>::Storage v(1);
  v[0] = static_cast<S>(loss_acc / N);
  if (!std::isfinite(static_cast<double>(v[0])))
    throw NumericError("cross_entropy_loss: non-finite loss");

  auto pl = logits.node();
  return detail::make_op<S>({1}, std::move(v), {pl}, [pl, probs, labels, N, K](Node<S>& n1) {
    auto& g = pl->ensure_grad();
    const S gscale = n1.grad[0] / static_cast<S>(N);
    for (int n = 0; n < N; ++n) {
      const Eigen::Index base = static_cast<Eigen::Index>(n) * K;
      for (int k = 0; k < K; ++k) {
        S p = probs[base + k];
        if (k == labels[static_cast<std::size_t>(n)]) p -= S(1);
        g[base + k] += gscale * p;
      }
    }
  });
}

}  // namespace phaser::ad
