#pragma once

#include "phaser/autodiff.hpp"

namespace phaser::ad {

// Uniform(-sqrt(6/fan_in), +sqrt(6/fan_in)) init used for conv and dense
// weights; biases start at zero.
template <typename S>
typename Node<S>::Storage fan_in_uniform(Eigen::Index count, Eigen::Index fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  typename Node<S>::Storage out(count);
  for (Eigen::Index i = 0; i < count; ++i)
    out[i] = static_cast<S>(rng.uniform(-bound, bound));
  return out;
}

template <typename S>
struct NamedParam {
  std::string name;
  Tensor<S> tensor;
};

template <typename S>
class Conv2dLayer {
 public:
  Conv2dLayer() = default;
  // A conv feeding straight into a normalization layer runs bias-free: the
  // norm's mean subtraction makes such a bias a dead parameter (its gradient
  // is identically zero).
  Conv2dLayer(int in_ch, int out_ch, int kh, int kw, int pad_h, int pad_w, std::uint64_t seed,
              bool has_bias = true)
      : in_ch_(in_ch), out_ch_(out_ch), kh_(kh), kw_(kw), pad_h_(pad_h), pad_w_(pad_w),
        has_bias_(has_bias) {
    if (in_ch < 1 || out_ch < 1 || kh < 1 || kw < 1)
      throw DataError("conv2d layer: dimensions must be positive");
    Rng rng(seed);
    const Eigen::Index fan_in = static_cast<Eigen::Index>(in_ch) * kh * kw;
    weight = Tensor<S>::leaf({out_ch, in_ch, kh, kw},
                             fan_in_uniform<S>(static_cast<Eigen::Index>(out_ch) * fan_in, fan_in, rng),
                             true);
    bias = Tensor<S>::zeros({out_ch}, has_bias);
  }

  Tensor<S> forward(const Tensor<S>& x) const { return conv2d(x, weight, bias, pad_h_, pad_w_); }

  Tensor<S> weight, bias;  // bias frozen at zero when has_bias_ is false
  int in_ch_ = 0, out_ch_ = 0, kh_ = 0, kw_ = 0, pad_h_ = 0, pad_w_ = 0;
  bool has_bias_ = true;
};

template <typename S>
class DenseLayer {
 public:
  DenseLayer() = default;
  DenseLayer(int in, int out, std::uint64_t seed) {
    if (in < 1 || out < 1) throw DataError("dense layer: dimensions must be positive");
    Rng rng(seed);
    weight = Tensor<S>::leaf({out, in}, fan_in_uniform<S>(static_cast<Eigen::Index>(out) * in, in, rng),
                             true);
    bias = Tensor<S>::zeros({out}, true);
  }

  Tensor<S> forward(const Tensor<S>& x) const { return dense(x, weight, bias); }

  Tensor<S> weight, bias;
};

// Per-channel standardization over (batch, H, W) with batch statistics in
// train mode and running statistics in eval mode. Batch variance is biased;
// running statistics are plain exponential averages of the batch moments.
template <typename S>
class BatchNorm2d {
 public:
  BatchNorm2d() = default;
  BatchNorm2d(int channels, double eps = 1e-5, double momentum = 0.1)
      : channels_(channels), eps_(eps), momentum_(momentum) {
    if (channels < 1) throw DataError("batchnorm: channels must be positive");
    if (!(eps > 0.0)) throw DataError("batchnorm: eps must be positive");
    if (momentum < 0.0 || momentum > 1.0) throw DataError("batchnorm: momentum must be in [0,1]");
    gamma = Tensor<S>::leaf({channels}, Node<S>::Storage::Constant(channels, S(1)), true);
    beta = Tensor<S>::zeros({channels}, true);
    running_mean = Eigen::ArrayXd::Zero(channels);
    running_var = Eigen::ArrayXd::Ones(channels);
  }

  Tensor<S> forward(const Tensor<S>& x, Mode mode) {
    detail::require_rank(x.shape(), 4, "batchnorm");
    const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    if (C != channels_) throw DataError("batchnorm: channel count mismatch");

    Eigen::ArrayXd mean(C), var(C);
    if (mode == Mode::Train) {
      const double m = static_cast<double>(N) * H * W;
      for (int c = 0; c < C; ++c) {
        double acc = 0.0, acc2 = 0.0;
        for (int n = 0; n < N; ++n) {
          const Eigen::Index base = (static_cast<Eigen::Index>(n) * C + c) * H * W;
          for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(H) * W; ++i) {
            const double v = static_cast<double>(x.value()[base + i]);
            acc += v;
            acc2 += v * v;
          }
        }
        mean[c] = acc / m;
        var[c] = std::max(0.0, acc2 / m - mean[c] * mean[c]);
      }
      running_mean = (1.0 - momentum_) * running_mean + momentum_ * mean;
      running_var = (1.0 - momentum_) * running_var + momentum_ * var;
      has_stats = true;
    } else {
      if (!has_stats)
        throw NumericError("batchnorm: eval mode before any training statistics exist");
      mean = running_mean;
      var = running_var;
    }

    Eigen::ArrayXd inv_std = (var + eps_).sqrt().inverse();
    typename Node<S>::Storage xhat(x.numel());
    typename Node<S>::Storage out(x.numel());
    for (int n = 0; n < N; ++n)
      for (int c = 0; c < C; ++c) {
        const Eigen::Index base = (static_cast<Eigen::Index>(n) * C + c) * H * W;
        const S mu = static_cast<S>(mean[c]);
        const S is = static_cast<S>(inv_std[c]);
        const S g = gamma.value()[c];
        const S b = beta.value()[c];
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(H) * W; ++i) {
          const S xh = (x.value()[base + i] - mu) * is;
          xhat[base + i] = xh;
          out[base + i] = g * xh + b;
        }
      }

    auto px = x.node();
    auto pg = gamma.node();
    auto pb = beta.node();
    const bool train = mode == Mode::Train;
    auto backward = [px, pg, pb, xhat, inv_std, N, C, H, W, train](Node<S>& n4) {
      auto& gx = px->ensure_grad();
      auto& gg = pg->ensure_grad();
      auto& gb = pb->ensure_grad();
      const Eigen::Index hw = static_cast<Eigen::Index>(H) * W;
      const double m = static_cast<double>(N) * H * W;
      for (int c = 0; c < C; ++c) {
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (int n = 0; n < N; ++n) {
          const Eigen::Index base = (static_cast<Eigen::Index>(n) * C + c) * hw;
          for (Eigen::Index i = 0; i < hw; ++i) {
            const double dy = static_cast<double>(n4.grad[base + i]);
            sum_dy += dy;
            sum_dy_xhat += dy * static_cast<double>(xhat[base + i]);
          }
        }
        gg[c] += static_cast<S>(sum_dy_xhat);
        gb[c] += static_cast<S>(sum_dy);
        const double g = static_cast<double>(pg->value[c]);
        const double is = inv_std[c];
        if (train) {
          const double mean_dy = sum_dy / m;
          const double mean_dy_xhat = sum_dy_xhat / m;
          for (int n = 0; n < N; ++n) {
            const Eigen::Index base = (static_cast<Eigen::Index>(n) * C + c) * hw;
            for (Eigen::Index i = 0; i < hw; ++i)
              gx[base + i] += static_cast<S>(
                  g * is *
                  (static_cast<double>(n4.grad[base + i]) - mean_dy -
                   static_cast<double>(xhat[base + i]) * mean_dy_xhat));
          }
        } else {
          for (int n = 0; n < N; ++n) {
            const Eigen::Index base = (static_cast<Eigen::Index>(n) * C + c) * hw;
            for (Eigen::Index i = 0; i < hw; ++i)
              gx[base + i] += static_cast<S>(g * is * static_cast<double>(n4.grad[base + i]));
          }
        }
      }
    };
    return detail::make_op<S>(x.shape(), std::move(out), {px, pg, pb}, std::move(backward));
  }

  Tensor<S> gamma, beta;
  Eigen::ArrayXd running_mean, running_var;
  bool has_stats = false;
  int channels_ = 0;
  double eps_ = 1e-5, momentum_ = 0.1;
};

// Splits the feature axis into `bands` contiguous groups of floor(D/bands)
// bins, each standardized as an independent batch norm with its own affine
// and running statistics; D mod bands leftover bins form one extra plain
// batch-norm group.
template <typename S>
class SubSpectralNorm {
 public:
  SubSpectralNorm() = default;
  SubSpectralNorm(int channels, int feature_bins, int bands, double eps = 1e-5,
                  double momentum = 0.1)
      : channels_(channels), feature_bins_(feature_bins), bands_(bands) {
    if (bands < 1) throw DataError("subspectral norm: bands must be >= 1");
    if (feature_bins < bands)
      throw DataError("subspectral norm: feature bins (" + std::to_string(feature_bins) +
                      ") < bands (" + std::to_string(bands) + ")");
    const int band = feature_bins / bands;
    const int rem = feature_bins - band * bands;
    for (int g = 0; g < bands; ++g) band_sizes_.push_back(band);
    if (rem > 0) band_sizes_.push_back(rem);
    for (std::size_t g = 0; g < band_sizes_.size(); ++g)
      groups_.emplace_back(channels, eps, momentum);
  }

  Tensor<S> forward(const Tensor<S>& x, Mode mode) {
    detail::require_rank(x.shape(), 4, "subspectral norm");
    if (x.dim(1) != channels_ || x.dim(2) != feature_bins_)
      throw DataError("subspectral norm: input shape mismatch");
    std::vector<Tensor<S>> parts;
    int start = 0;
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      const int len = band_sizes_[g];
      parts.push_back(groups_[g].forward(slice_axis2(x, start, len), mode));
      start += len;
    }
    return parts.size() == 1 ? parts[0] : concat(parts, 2);
  }

  const std::vector<int>& band_sizes() const { return band_sizes_; }
  std::vector<BatchNorm2d<S>>& groups() { return groups_; }
  const std::vector<BatchNorm2d<S>>& groups() const { return groups_; }
  bool has_stats() const {
    for (const auto& g : groups_)
      if (!g.has_stats) return false;
    return !groups_.empty();
  }

  int channels_ = 0, feature_bins_ = 0, bands_ = 0;

 private:
  std::vector<int> band_sizes_;
  std::vector<BatchNorm2d<S>> groups_;
};

// ---------------------------------------------------------------------------
// Layer descriptors and the descriptor-driven single-layer entry points.

struct LayerSpec {
  enum class Kind { Conv2d, BatchNorm2d, Silu, MeanPoolOverDim, Dense, SoftmaxCe };

  Kind kind = Kind::Silu;
  // conv2d
  int in_ch = 0, out_ch = 0, kh = 0, kw = 0, pad_h = 0, pad_w = 0;
  // batchnorm2d
  int channels = 0;
  double eps = 1e-5, momentum = 0.1;
  // mean_pool_over_dim
  int axis = 0;
  // dense
  int in = 0, out = 0;
  std::uint64_t seed = 0;

  static LayerSpec conv2d(int in_ch, int out_ch, int kh, int kw, int pad_h, int pad_w,
                          std::uint64_t seed = 0) {
    LayerSpec s;
    s.kind = Kind::Conv2d;
    s.in_ch = in_ch;
    s.out_ch = out_ch;
    s.kh = kh;
    s.kw = kw;
    s.pad_h = pad_h;
    s.pad_w = pad_w;
    s.seed = seed;
    return s;
  }
  static LayerSpec batchnorm2d(int channels, double eps = 1e-5, double momentum = 0.1) {
    LayerSpec s;
    s.kind = Kind::BatchNorm2d;
    s.channels = channels;
    s.eps = eps;
    s.momentum = momentum;
    return s;
  }
  static LayerSpec silu() { return LayerSpec{}; }
  static LayerSpec mean_pool_over_dim(int axis) {
    LayerSpec s;
    s.kind = Kind::MeanPoolOverDim;
    s.axis = axis;
    return s;
  }
  static LayerSpec dense(int in, int out, std::uint64_t seed = 0) {
    LayerSpec s;
    s.kind = Kind::Dense;
    s.in = in;
    s.out = out;
    s.seed = seed;
    return s;
  }
  static LayerSpec softmax_ce() {
    LayerSpec s;
    s.kind = Kind::SoftmaxCe;
    return s;
  }
};

// Stateful instantiation of a LayerSpec chain element.
template <typename S>
class LayerInstance {
 public:
  explicit LayerInstance(const LayerSpec& spec) : spec_(spec) {
    switch (spec.kind) {
      case LayerSpec::Kind::Conv2d:
        conv_ = Conv2dLayer<S>(spec.in_ch, spec.out_ch, spec.kh, spec.kw, spec.pad_h, spec.pad_w,
                               spec.seed);
        break;
      case LayerSpec::Kind::BatchNorm2d:
        bn_ = BatchNorm2d<S>(spec.channels, spec.eps, spec.momentum);
        break;
      case LayerSpec::Kind::Dense:
        dense_ = DenseLayer<S>(spec.in, spec.out, spec.seed);
        break;
      case LayerSpec::Kind::SoftmaxCe:
        throw DataError("layer chain: softmax_ce is a loss, not a feature layer");
      default:
        break;
    }
  }

  Tensor<S> forward(const Tensor<S>& x, Mode mode) {
    switch (spec_.kind) {
      case LayerSpec::Kind::Conv2d:
        return conv_.forward(x);
      case LayerSpec::Kind::BatchNorm2d:
        return bn_.forward(x, mode);
      case LayerSpec::Kind::Silu:
        return silu(x);
      case LayerSpec::Kind::MeanPoolOverDim:
        return mean_over_axis(x, spec_.axis);
      case LayerSpec::Kind::Dense: {
        // a pooled (N, C, 1, 1) map flattens onto the affine input
        Tensor<S> in = x;
        if (in.rank() == 4 && in.dim(2) == 1 && in.dim(3) == 1)
          in = reshape(in, {in.dim(0), in.dim(1)});
        return dense_.forward(in);
      }
      default:
        throw DataError("layer chain: unsupported kind");
    }
  }

  std::vector<Tensor<S>> params() {
    switch (spec_.kind) {
      case LayerSpec::Kind::Conv2d:
        return {conv_.weight, conv_.bias};
      case LayerSpec::Kind::BatchNorm2d:
        return {bn_.gamma, bn_.beta};
      case LayerSpec::Kind::Dense:
        return {dense_.weight, dense_.bias};
      default:
        return {};
    }
  }

 private:
  LayerSpec spec_;
  Conv2dLayer<S> conv_;
  BatchNorm2d<S> bn_;
  DenseLayer<S> dense_;
};

// One-shot descriptor-driven forward with seeded initialization.
template <typename S>
Tensor<S> layer_forward(const LayerSpec& spec, const Tensor<S>& input, Mode mode) {
  LayerInstance<S> layer(spec);
  return layer.forward(input, mode);
}

// ---------------------------------------------------------------------------
// Finite-difference gradient checking.

struct GradReport {
  double max_rel_error = 0.0;
  bool pass = false;
  Eigen::Index entries_checked = 0;
};

// Central differences against reverse-mode gradients over the given
// parameter tensors. `build_loss` must rebuild the graph from the parameters'
// current values on every call. Checks every entry, or a seeded subsample
// when the total exceeds max_entries.
template <typename S>
GradReport grad_check_fn(const std::function<Tensor<S>()>& build_loss,
                         std::vector<Tensor<S>> params, double h, double threshold = 1e-4,
                         Eigen::Index max_entries = 200, std::uint64_t seed = 0) {
  if (h < 1e-7 || h > 1e-3) throw DataError("grad_check: h must be in [1e-7, 1e-3]");
  if (params.empty()) throw DataError("grad_check: no tensors to check");

  for (auto& p : params) p.zero_grad();
  Tensor<S> loss = build_loss();
  if (!std::isfinite(static_cast<double>(loss.value()[0])))
    throw NumericError("grad_check: non-finite loss");
  backpropagate(loss);
  std::vector<typename Node<S>::Storage> analytic;
  analytic.reserve(params.size());
  for (auto& p : params) analytic.push_back(p.grad());

  Eigen::Index total = 0;
  for (const auto& p : params) total += p.numel();
  std::vector<Eigen::Index> picks;
  if (total <= max_entries) {
    picks.resize(static_cast<std::size_t>(total));
    std::iota(picks.begin(), picks.end(), 0);
  } else {
    Rng rng(seed);
    std::unordered_set<Eigen::Index> seen;
    while (static_cast<Eigen::Index>(picks.size()) < max_entries) {
      const auto idx = static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(total)));
      if (seen.insert(idx).second) picks.push_back(idx);
    }
  }

  GradReport report;
  report.entries_checked = static_cast<Eigen::Index>(picks.size());
  for (Eigen::Index flat : picks) {
    Eigen::Index k = flat;
    std::size_t pi = 0;
    while (k >= params[pi].numel()) {
      k -= params[pi].numel();
      ++pi;
    }
    S& slot = params[pi].value()[k];
    const S saved = slot;
    slot = saved + static_cast<S>(h);
    const double lp = static_cast<double>(build_loss().value()[0]);
    slot = saved - static_cast<S>(h);
    const double lm = static_cast<double>(build_loss().value()[0]);
    slot = saved;
    if (!std::isfinite(lp) || !std::isfinite(lm))
      throw NumericError("grad_check: non-finite loss during perturbation");
    const double numeric = (lp - lm) / (2.0 * h);
    const double exact = static_cast<double>(analytic[pi][k]);
    const double rel =
        std::abs(numeric - exact) / std::max({std::abs(numeric), std::abs(exact), 1e-8});
    report.max_rel_error = std::max(report.max_rel_error, rel);
  }
  report.pass = report.max_rel_error < threshold;
  return report;
}

// Chain form: seeded layers, cross-entropy terminal. With a parameter-free
// chain the input gradient is checked instead.
template <typename S>
GradReport grad_check(const std::vector<LayerSpec>& chain, const Tensor<S>& input,
                      const std::vector<int>& labels, double h, double threshold = 1e-4,
                      Eigen::Index max_entries = 200, std::uint64_t seed = 0) {
  auto layers = std::make_shared<std::vector<LayerInstance<S>>>();
  for (const auto& spec : chain) {
    if (spec.kind == LayerSpec::Kind::SoftmaxCe) break;  // implicit terminal
    layers->emplace_back(spec);
  }
  std::vector<Tensor<S>> params;
  for (auto& l : *layers)
    for (auto& p : l.params()) params.push_back(p);

  const bool check_input = params.empty();
  Tensor<S> x = input;
  x.set_requires_grad(x.requires_grad() || check_input);
  auto build_loss = [layers, x, labels]() {
    Tensor<S> cur = x;
    for (auto& l : *layers) cur = l.forward(cur, Mode::Train);
    if (cur.rank() == 4 && cur.dim(2) == 1 && cur.dim(3) == 1)
      cur = reshape(cur, {cur.dim(0), cur.dim(1)});
    return cross_entropy_loss(cur, labels);
  };
  return grad_check_fn<S>(build_loss, check_input ? std::vector<Tensor<S>>{x} : params, h,
                          threshold, max_entries, seed);
}

}  // namespace phaser::ad
