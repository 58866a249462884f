#pragma once

#include <optional>

#include "phaser/layers.hpp"
#include "phaser/model_io.hpp"

namespace phaser::net {

struct PhaserConfig {
  int V = 3;             // variates
  int c = 1;             // width multiplier; encoders emit 2c channels
  int B = 3;             // subspectral groups
  int nfft = 1024;
  int seg_len = 4;
  int num_classes = 6;
  double eps_norm = 1e-5;
  std::uint64_t seed = 2711;
  bool random_window = false;  // per-variate random power-of-two segment lengths

  int bins() const { return nfft / 2 + 1; }
  void validate() const;
};

// Accepts exactly the PhaserConfig field names; unknown keys are rejected,
// missing keys take defaults.
PhaserConfig parse_phaser_config_json(const std::string& json_text);
PhaserConfig load_phaser_config(const std::string& path);
std::string phaser_config_to_json(const PhaserConfig& cfg);

enum class ArchMode { Full, NoResidual, MagOnly, Concat };

ArchMode arch_mode_from_string(const std::string& s);
std::string arch_mode_to_string(ArchMode m);

// Magnitude/phase encoders with subspectral normalization, channel fusion,
// depthwise encoding collapsed over the feature axis, temporal encoding, and
// a phase-projection residual broadcast back across the feature axis.
template <typename S>
class PhaserModel {
 public:
  PhaserModel() = default;

  ad::Tensor<S> forward(const ad::Tensor<S>& mag, const ad::Tensor<S>& pha, ad::Mode mode);

  std::vector<ad::NamedParam<S>> named_params();
  long long param_count();
  std::vector<NamedTensorF> state_dict();
  void load_state(const std::vector<NamedTensorF>& state);

  PhaserConfig cfg;
  ArchMode arch = ArchMode::Full;
  bool residual_pre_norm = false;  // feed g_res the raw phase-encoder output

  ad::Conv2dLayer<S> f_mag, f_pha, f_fus, f_dep1, f_dep2, f_tem, g_res, g_cls, f_cat;
  ad::BatchNorm2d<S> dep_bn1, dep_bn2;
  ad::SubSpectralNorm<S> ssn_mag, ssn_pha, ssn_cat;
};

template <typename S>
PhaserModel<S> build_model(const PhaserConfig& cfg, ArchMode arch = ArchMode::Full,
                           bool residual_pre_norm = false);

void save_model(PhaserModel<float>& model, const std::string& path);
PhaserModel<float> load_model(const std::string& config_path, const std::string& weights_path);
PhaserModel<float> load_model_with_config(const PhaserConfig& cfg, ArchMode arch,
                                          const std::string& weights_path);

// ---------------------------------------------------------------------------
// implementation

namespace detail {

inline std::uint64_t layer_seed(std::uint64_t model_seed, const char* name) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (const char* p = name; *p; ++p) h = (h ^ static_cast<unsigned char>(*p)) * 1099511628211ull;
  return splitmix64(model_seed ^ h);
}

}  // namespace detail

template <typename S>
PhaserModel<S> build_model(const PhaserConfig& cfg, ArchMode arch, bool residual_pre_norm) {
  cfg.validate();
  PhaserModel<S> m;
  m.cfg = cfg;
  m.arch = arch;
  m.residual_pre_norm = residual_pre_norm;
  const int ch = 2 * cfg.c;
  const int D = cfg.bins();
  const auto seed = [&](const char* name) { return detail::layer_seed(cfg.seed, name); };

  // Convs that feed a normalization layer are bias-free; the norm absorbs
  // any channel shift.
  if (arch == ArchMode::Concat) {
    m.f_cat = ad::Conv2dLayer<S>(2 * cfg.V, ch, 5, 5, 2, 2, seed("f_cat"), false);
    m.ssn_cat = ad::SubSpectralNorm<S>(ch, D, cfg.B, cfg.eps_norm);
  } else {
    m.f_mag = ad::Conv2dLayer<S>(cfg.V, ch, 5, 5, 2, 2, seed("f_mag"), false);
    m.ssn_mag = ad::SubSpectralNorm<S>(ch, D, cfg.B, cfg.eps_norm);
    if (arch != ArchMode::MagOnly) {
      m.f_pha = ad::Conv2dLayer<S>(cfg.V, ch, 5, 5, 2, 2, seed("f_pha"), false);
      m.ssn_pha = ad::SubSpectralNorm<S>(ch, D, cfg.B, cfg.eps_norm);
      m.f_fus = ad::Conv2dLayer<S>(2 * ch, ch, 1, 1, 0, 0, seed("f_fus"));
    }
  }
  m.f_dep1 = ad::Conv2dLayer<S>(ch, ch, 3, 3, 1, 1, seed("f_dep1"), false);
  m.dep_bn1 = ad::BatchNorm2d<S>(ch, cfg.eps_norm);
  m.f_dep2 = ad::Conv2dLayer<S>(ch, ch, 3, 3, 1, 1, seed("f_dep2"), false);
  m.dep_bn2 = ad::BatchNorm2d<S>(ch, cfg.eps_norm);
  m.f_tem = ad::Conv2dLayer<S>(ch, ch, 1, 3, 0, 1, seed("f_tem"));
  if (arch == ArchMode::Full)
    m.g_res = ad::Conv2dLayer<S>(ch, ch, 1, 1, 0, 0, seed("g_res"));
  m.g_cls = ad::Conv2dLayer<S>(ch, cfg.num_classes, 1, 1, 0, 0, seed("g_cls"));

  // Shape law for the residual broadcast: the temporal encoder must keep a
  // singleton feature axis and g_res must preserve (channels, bins).
  if (m.f_tem.kh_ != 1 || m.f_tem.pad_h_ != 0 || m.f_tem.out_ch_ != ch)
    throw DataError("build_model: temporal encoder would break the (N, 2c, 1, T) shape");
  if (arch == ArchMode::Full &&
      (m.g_res.out_ch_ != ch || m.g_res.kh_ != 1 + 2 * m.g_res.pad_h_ ||
       m.g_res.kw_ != 1 + 2 * m.g_res.pad_w_))
    throw DataError("build_model: residual projection would break the (N, 2c, bins, T) shape");
  return m;
}

template <typename S>
ad::Tensor<S> PhaserModel<S>::forward(const ad::Tensor<S>& mag, const ad::Tensor<S>& pha,
                                      ad::Mode mode) {
  using ad::Tensor;
  const int D = cfg.bins();
  auto check_input = [&](const Tensor<S>& t, const char* name) {
    if (!t.valid()) throw DataError(std::string("forward: missing ") + name + " input");
    ad::detail::require_rank(t.shape(), 4, name);
    if (t.dim(1) != cfg.V || t.dim(2) != D)
      throw DataError(std::string("forward: ") + name + " must be (N, " + std::to_string(cfg.V) +
                      ", " + std::to_string(D) + ", T)");
  };

  Tensor<S> fused;      // input to the depthwise stack, (N, 2c, D, T)
  Tensor<S> residual_in;  // phase embedding for g_res
  if (arch == ArchMode::Concat) {
    check_input(mag, "mag");
    check_input(pha, "pha");
    fused = ssn_cat.forward(f_cat.forward(ad::concat<S>({mag, pha}, 1)), mode);
  } else if (arch == ArchMode::MagOnly) {
    check_input(mag, "mag");
    fused = ssn_mag.forward(f_mag.forward(mag), mode);
  } else {
    check_input(mag, "mag");
    check_input(pha, "pha");
    Tensor<S> e_m = ssn_mag.forward(f_mag.forward(mag), mode);
    Tensor<S> raw_p = f_pha.forward(pha);
    Tensor<S> e_p = ssn_pha.forward(raw_p, mode);
    fused = f_fus.forward(ad::concat<S>({e_m, e_p}, 1));
    if (arch == ArchMode::Full) residual_in = residual_pre_norm ? raw_p : e_p;
  }

  Tensor<S> d = ad::silu(dep_bn1.forward(f_dep1.forward(fused), mode));
  d = ad::silu(dep_bn2.forward(f_dep2.forward(d), mode));
  Tensor<S> r_dep = ad::mean_over_axis(d, 2);  // (N, 2c, 1, T)
  Tensor<S> r_tem = f_tem.forward(r_dep);

  Tensor<S> r;
  if (arch == ArchMode::Full)
    r = ad::broadcast_add_axis2(r_tem, ad::silu(g_res.forward(residual_in)));
  else
    r = r_tem;

  Tensor<S> cls = g_cls.forward(r);                      // (N, K, D|1, T)
  Tensor<S> pooled = ad::mean_over_axis(cls, 2);
  pooled = ad::mean_over_axis(pooled, 3);                // (N, K, 1, 1)
  return ad::reshape(pooled, {pooled.dim(0), pooled.dim(1)});
}

template <typename S>
std::vector<ad::NamedParam<S>> PhaserModel<S>::named_params() {
  std::vector<ad::NamedParam<S>> out;
  auto add_conv = [&](const char* name, ad::Conv2dLayer<S>& l) {
    out.push_back({std::string(name) + ".weight", l.weight});
    if (l.has_bias_) out.push_back({std::string(name) + ".bias", l.bias});
  };
  auto add_bn = [&](const std::string& name, ad::BatchNorm2d<S>& l) {
    out.push_back({name + ".gamma", l.gamma});
    out.push_back({name + ".beta", l.beta});
  };
  auto add_ssn = [&](const std::string& name, ad::SubSpectralNorm<S>& l) {
    for (std::size_t g = 0; g < l.groups().size(); ++g)
      add_bn(name + ".band" + std::to_string(g), l.groups()[g]);
  };

  if (arch == ArchMode::Concat) {
    add_conv("f_cat", f_cat);
    add_ssn("ssn_cat", ssn_cat);
  } else {
    add_conv("f_mag", f_mag);
    add_ssn("ssn_mag", ssn_mag);
    if (arch != ArchMode::MagOnly) {
      add_conv("f_pha", f_pha);
      add_ssn("ssn_pha", ssn_pha);
      add_conv("f_fus", f_fus);
    }
  }
  add_conv("f_dep1", f_dep1);
  add_bn("dep_bn1", dep_bn1);
  add_conv("f_dep2", f_dep2);
  add_bn("dep_bn2", dep_bn2);
  add_conv("f_tem", f_tem);
  if (arch == ArchMode::Full) add_conv("g_res", g_res);
  add_conv("g_cls", g_cls);
  return out;
}

template <typename S>
long long PhaserModel<S>::param_count() {
  long long n = 0;
  for (auto& p : named_params()) n += static_cast<long long>(p.tensor.numel());
  return n;
}

template <typename S>
std::vector<NamedTensorF> PhaserModel<S>::state_dict() {
  std::vector<NamedTensorF> out;
  for (auto& p : named_params()) {
    NamedTensorF t;
    t.name = p.name;
    t.shape = p.tensor.shape();
    t.data.resize(static_cast<std::size_t>(p.tensor.numel()));
    for (Eigen::Index i = 0; i < p.tensor.numel(); ++i)
      t.data[static_cast<std::size_t>(i)] = static_cast<float>(p.tensor.value()[i]);
    out.push_back(std::move(t));
  }
  auto add_stats = [&](const std::string& name, ad::BatchNorm2d<S>& bn) {
    NamedTensorF mean{name + ".running_mean", {bn.channels_}, {}};
    NamedTensorF var{name + ".running_var", {bn.channels_}, {}};
    for (int c = 0; c < bn.channels_; ++c) {
      mean.data.push_back(static_cast<float>(bn.running_mean[c]));
      var.data.push_back(static_cast<float>(bn.running_var[c]));
    }
    out.push_back(std::move(mean));
    out.push_back(std::move(var));
    out.push_back({name + ".stats_count", {1}, {bn.has_stats ? 1.0f : 0.0f}});
  };
  auto add_ssn_stats = [&](const std::string& name, ad::SubSpectralNorm<S>& l) {
    for (std::size_t g = 0; g < l.groups().size(); ++g)
      add_stats(name + ".band" + std::to_string(g), l.groups()[g]);
  };
  if (arch == ArchMode::Concat) {
    add_ssn_stats("ssn_cat", ssn_cat);
  } else {
    add_ssn_stats("ssn_mag", ssn_mag);
    if (arch != ArchMode::MagOnly) add_ssn_stats("ssn_pha", ssn_pha);
  }
  add_stats("dep_bn1", dep_bn1);
  add_stats("dep_bn2", dep_bn2);
  return out;
}

template <typename S>
void PhaserModel<S>::load_state(const std::vector<NamedTensorF>& state) {
  auto find = [&](const std::string& name) -> const NamedTensorF& {
    for (const auto& t : state)
      if (t.name == name) return t;
    throw DataError("load_state: missing tensor '" + name + "'");
  };
  for (auto& p : named_params()) {
    const NamedTensorF& t = find(p.name);
    if (t.shape != p.tensor.shape())
      throw DataError("load_state: shape mismatch for '" + p.name + "'");
    for (Eigen::Index i = 0; i < p.tensor.numel(); ++i)
      p.tensor.value()[i] = static_cast<S>(t.data[static_cast<std::size_t>(i)]);
  }
  auto load_stats = [&](const std::string& name, ad::BatchNorm2d<S>& bn) {
    const NamedTensorF& mean = find(name + ".running_mean");
    const NamedTensorF& var = find(name + ".running_var");
    for (int c = 0; c < bn.channels_; ++c) {
      bn.running_mean[c] = static_cast<double>(mean.data[static_cast<std::size_t>(c)]);
      bn.running_var[c] = static_cast<double>(var.data[static_cast<std::size_t>(c)]);
    }
    bn.has_stats = find(name + ".stats_count").data.at(0) != 0.0f;
  };
  auto load_ssn_stats = [&](const std::string& name, ad::SubSpectralNorm<S>& l) {
    for (std::size_t g = 0; g < l.groups().size(); ++g)
      load_stats(name + ".band" + std::to_string(g), l.groups()[g]);
  };
  if (arch == ArchMode::Concat) {
    load_ssn_stats("ssn_cat", ssn_cat);
  } else {
    load_ssn_stats("ssn_mag", ssn_mag);
    if (arch != ArchMode::MagOnly) load_ssn_stats("ssn_pha", ssn_pha);
  }
  load_stats("dep_bn1", dep_bn1);
  load_stats("dep_bn2", dep_bn2);
}

}  // namespace phaser::net
