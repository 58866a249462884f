#include "phaser/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace phaser::harness {

void SynthSpec::validate() const {
  if (variates < 1 || timesteps < 8) throw DataError("synth: need V >= 1 and T >= 8");
  if (num_classes < 2 || num_domains < 1) throw DataError("synth: need K >= 2 and domains >= 1");
  if (samples_per_domain_class < 1) throw DataError("synth: need at least one sample per cell");
  if (!(sample_rate_hz > 0.0)) throw DataError("synth: sample rate must be positive");
  if (!(noise_sigma > 0.0)) throw DataError("synth: noise_sigma must be positive");
  const std::vector<int> bins = resolved_class_bins();
  std::set<int> seen;
  for (int b : bins) {
    if (b < 1 || b >= timesteps / 2)
      throw DataError("synth: class tone bin " + std::to_string(b) +
                      " must lie strictly between DC and Nyquist");
    if (!seen.insert(b).second)
      throw DataError("synth: class tone frequencies collide at bin " + std::to_string(b));
  }
}

std::vector<int> SynthSpec::resolved_class_bins() const {
  if (!class_bins.empty()) {
    if (static_cast<int>(class_bins.size()) != num_classes)
      throw DataError("synth: class_bins must have one entry per class");
    return class_bins;
  }
  std::vector<int> bins;
  for (int k = 0; k < num_classes; ++k) bins.push_back(6 + 4 * k);
  return bins;
}

double SynthSpec::domain_phase(int domain) const {
  if (!domain_phase_offsets.empty()) {
    if (static_cast<int>(domain_phase_offsets.size()) != num_domains)
      throw DataError("synth: domain_phase_offsets must have one entry per domain");
    return domain_phase_offsets[static_cast<std::size_t>(domain)];
  }
  return domain_phase_step * domain;
}

GaussianTrack domain_track(const SynthSpec& spec, int domain) {
  GaussianTrack track;
  track.mu.resize(spec.timesteps);
  track.sigma.resize(spec.timesteps);
  const double slope = spec.trend_amp * (1.0 + spec.trend_domain_step * domain);
  const double scale = spec.noise_sigma * (1.0 + spec.sigma_domain_step * domain);
  for (int t = 0; t < spec.timesteps; ++t) {
    const double u = static_cast<double>(t) / (spec.timesteps - 1) - 0.5;
    track.mu[t] = slope * u;
    track.sigma[t] = scale * (1.0 + 0.25 * std::sin(2.0 * kPi * t / spec.timesteps));
  }
  return track;
}

LabeledDataset synth_from_tracks(const SynthSpec& spec, const std::vector<GaussianTrack>& tracks) {
  spec.validate();
  if (static_cast<int>(tracks.size()) != spec.num_domains)
    throw DataError("synth: one track per domain required");
  for (const auto& t : tracks) {
    t.validate();
    if (t.length() != spec.timesteps) throw DataError("synth: track length != timesteps");
  }
  const std::vector<int> bins = spec.resolved_class_bins();

  LabeledDataset ds;
  ds.num_classes = spec.num_classes;
  ds.name = "synth";
  std::uint64_t sample_index = 0;
  for (int d = 0; d < spec.num_domains; ++d) {
    const GaussianTrack& track = tracks[static_cast<std::size_t>(d)];
    for (int k = 0; k < spec.num_classes; ++k) {
      for (int i = 0; i < spec.samples_per_domain_class; ++i, ++sample_index) {
        Rng rng(derive_seed(spec.seed, sample_index));
        const double jitter =
            spec.phase_jitter > 0.0 ? rng.uniform(-spec.phase_jitter, spec.phase_jitter) : 0.0;
        const double phase = spec.domain_phase(d) + jitter;
        TimeSeries ts;
        ts.sample_rate_hz = spec.sample_rate_hz;
        ts.values.resize(spec.variates, spec.timesteps);
        for (int v = 0; v < spec.variates; ++v) {
          const double variate_phase = 0.4 * v;
          for (int t = 0; t < spec.timesteps; ++t) {
            const double tone =
                spec.tone_amp *
                std::cos(2.0 * kPi * bins[static_cast<std::size_t>(k)] * t / spec.timesteps +
                         phase + variate_phase);
            ts.values(v, t) = track.mu[t] + track.sigma[t] * rng.normal() + tone;
          }
        }
        ds.samples.push_back(std::move(ts));
        ds.labels.push_back(k);
        ds.domains.push_back(d);
      }
    }
  }
  ds.validate();
  return ds;
}

LabeledDataset synth_generate(const SynthSpec& spec) {
  spec.validate();
  std::vector<GaussianTrack> tracks;
  for (int d = 0; d < spec.num_domains; ++d) tracks.push_back(domain_track(spec, d));
  return synth_from_tracks(spec, tracks);
}

void ScenarioSplit::validate() const {
  if (source_domains.empty() || target_domains.empty())
    throw DataError("scenario: source and target domain sets must be nonempty");
  for (int d : target_domains)
    if (source_domains.count(d))
      throw DataError("scenario: domain " + std::to_string(d) + " in both source and target");
}

ScenarioSplit scenario_split(const LabeledDataset& ds, int scenario) {
  std::set<int> present;
  for (int d : ds.domains)
    if (d != kNoDomain) present.insert(d);
  if (present.size() < 2) throw DataError("scenario: dataset needs at least 2 domains");
  if (scenario < 1 || scenario > static_cast<int>(present.size()))
    throw DataError("scenario: index must be in [1, " + std::to_string(present.size()) + "]");
  ScenarioSplit split;
  int idx = 1;
  for (int d : present) {
    if (idx == scenario)
      split.target_domains.insert(d);
    else
      split.source_domains.insert(d);
    ++idx;
  }
  split.validate();
  return split;
}

LabeledDataset filter_by_domains(const LabeledDataset& ds, const std::set<int>& domains) {
  LabeledDataset out;
  out.num_classes = ds.num_classes;
  out.name = ds.name;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!domains.count(ds.domains[i])) continue;
    out.samples.push_back(ds.samples[i]);
    out.labels.push_back(ds.labels[i]);
    out.domains.push_back(ds.domains[i]);
  }
  if (out.samples.empty()) throw DataError("filter_by_domains: no samples in the requested set");
  return out;
}

EncodedDataset EncodedDataset::subset(const std::vector<int>& indices) const {
  EncodedDataset out;
  out.V = V;
  out.bins = bins;
  out.frames = frames;
  out.num_classes = num_classes;
  for (int i : indices) {
    out.mag.push_back(mag[static_cast<std::size_t>(i)]);
    out.pha.push_back(pha[static_cast<std::size_t>(i)]);
    out.labels.push_back(labels[static_cast<std::size_t>(i)]);
  }
  return out;
}

EncodedDataset encode_dataset(const LabeledDataset& ds, const net::PhaserConfig& cfg) {
  ds.validate();
  cfg.validate();
  if (ds.samples.empty()) throw DataError("encode_dataset: empty dataset");
  if (static_cast<int>(ds.variates()) != cfg.V)
    throw DataError("encode_dataset: dataset has " + std::to_string(ds.variates()) +
                    " variates, config expects " + std::to_string(cfg.V));

  // Per-variate random power-of-two windows are drawn once per run so every
  // sample lands on the same grid.
  std::vector<int> seg_lens(static_cast<std::size_t>(cfg.V), cfg.seg_len);
  if (cfg.random_window) {
    Rng rng(splitmix64(cfg.seed ^ 0x57464E44ull));  // window-draw substream
    const int max_pow = static_cast<int>(
        std::floor(std::log2(static_cast<double>(std::min<Eigen::Index>(ds.timesteps(), cfg.nfft)))));
    const int lo_pow = 2;
    if (max_pow < lo_pow) throw DataError("encode_dataset: series too short for random windows");
    for (auto& w : seg_lens)
      w = 1 << (lo_pow + static_cast<int>(rng.uniform_int(
                    static_cast<std::uint64_t>(max_pow - lo_pow + 1))));
  }

  EncodedDataset out;
  out.V = cfg.V;
  out.num_classes = ds.num_classes;
  out.labels = ds.labels;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Spectrogram spec = cfg.random_window
                                 ? stft_multi_window(ds.samples[i], seg_lens, cfg.nfft)
                                 : stft(ds.samples[i], cfg.seg_len, cfg.nfft);
    const MagPhase mp = mag_phase(spec);
    if (i == 0) {
      out.bins = static_cast<int>(spec.bins());
      out.frames = static_cast<int>(spec.frames());
    }
    const Eigen::Index numel = static_cast<Eigen::Index>(out.V) * out.bins * out.frames;
    Eigen::ArrayXf m(numel), p(numel);
    Eigen::Index o = 0;
    for (int v = 0; v < out.V; ++v)
      for (int b = 0; b < out.bins; ++b)
        for (int f = 0; f < out.frames; ++f, ++o) {
          m[o] = static_cast<float>(mp.mag[static_cast<std::size_t>(v)](b, f));
          p[o] = static_cast<float>(mp.pha[static_cast<std::size_t>(v)](b, f));
        }
    out.mag.push_back(std::move(m));
    out.pha.push_back(std::move(p));
  }
  return out;
}

void TrainConfig::validate() const {
  if (learning_rate < 1e-5 || learning_rate > 1e-3)
    throw DataError("train: learning rate must lie in [1e-5, 1e-3]");
  if (max_epochs < 0 || max_epochs > 150) throw DataError("train: max_epochs must be in [0, 150]");
  if (batch_size < 1) throw DataError("train: batch_size must be positive");
  if (!(validation_fraction > 0.0) || !(validation_fraction < 1.0))
    throw DataError("train: validation fraction must be in (0, 1)");
  if (patience < 1) throw DataError("train: patience must be positive");
}

namespace {

template <typename T>
void seeded_shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[rng.uniform_int(i)]);
}

std::pair<ad::Tensor<float>, ad::Tensor<float>> gather_batch(const EncodedDataset& data,
                                                             const std::vector<int>& indices,
                                                             std::size_t begin, std::size_t end) {
  const int n = static_cast<int>(end - begin);
  const Eigen::Index per = static_cast<Eigen::Index>(data.V) * data.bins * data.frames;
  Eigen::ArrayXf mbuf(per * n), pbuf(per * n);
  for (int i = 0; i < n; ++i) {
    const auto src = static_cast<std::size_t>(indices[begin + static_cast<std::size_t>(i)]);
    mbuf.segment(per * i, per) = data.mag[src];
    pbuf.segment(per * i, per) = data.pha[src];
  }
  const std::vector<int> shape = {n, data.V, data.bins, data.frames};
  return {ad::Tensor<float>::leaf(shape, std::move(mbuf)),
          ad::Tensor<float>::leaf(shape, std::move(pbuf))};
}

std::vector<int> gather_labels(const EncodedDataset& data, const std::vector<int>& indices,
                               std::size_t begin, std::size_t end) {
  std::vector<int> out;
  for (std::size_t i = begin; i < end; ++i)
    out.push_back(data.labels[static_cast<std::size_t>(indices[i])]);
  return out;
}

// Adam with bias correction; state per parameter tensor.
class Adam {
 public:
  Adam(std::vector<ad::NamedParam<float>> params, double lr)
      : params_(std::move(params)), lr_(lr) {
    for (auto& p : params_) {
      m_.push_back(Eigen::ArrayXf::Zero(p.tensor.numel()));
      v_.push_back(Eigen::ArrayXf::Zero(p.tensor.numel()));
    }
  }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(kBeta1, t_);
    const double bc2 = 1.0 - std::pow(kBeta2, t_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& p = params_[i].tensor;
      if (!p.has_grad()) continue;
      m_[i] = static_cast<float>(kBeta1) * m_[i] + static_cast<float>(1.0 - kBeta1) * p.grad();
      v_[i] = static_cast<float>(kBeta2) * v_[i] +
              static_cast<float>(1.0 - kBeta2) * p.grad().square();
      const Eigen::ArrayXf mhat = m_[i] / static_cast<float>(bc1);
      const Eigen::ArrayXf vhat = v_[i] / static_cast<float>(bc2);
      p.value() -= static_cast<float>(lr_) * mhat / (vhat.sqrt() + static_cast<float>(kEps));
    }
  }

  void zero_grad() {
    for (auto& p : params_) p.tensor.zero_grad();
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  std::vector<ad::NamedParam<float>> params_;
  std::vector<Eigen::ArrayXf> m_, v_;
  double lr_;
  long long t_ = 0;
};

double dataset_loss(net::PhaserModel<float>& model, const EncodedDataset& data,
                    const std::vector<int>& indices) {
  double acc = 0.0;
  const std::size_t n = indices.size();
  for (std::size_t at = 0; at < n; at += 64) {
    const std::size_t end = std::min(n, at + 64);
    auto [mag, pha] = gather_batch(data, indices, at, end);
    ad::Tensor<float> logits = model.forward(mag, pha, ad::Mode::Eval);
    ad::Tensor<float> loss = ad::cross_entropy_loss(logits, gather_labels(data, indices, at, end));
    acc += static_cast<double>(loss.value()[0]) * static_cast<double>(end - at);
  }
  return acc / static_cast<double>(n);
}

}  // namespace

TrainResult train(net::PhaserModel<float>& model, const EncodedDataset& data,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (data.size() < 2) throw DataError("train: need at least 2 samples");

  TrainResult result;
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(cfg.seed);
  seeded_shuffle(order, rng);
  const auto n_val = std::max<std::size_t>(
      1, static_cast<std::size_t>(cfg.validation_fraction * static_cast<double>(data.size())));
  result.val_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  result.train_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  if (result.train_indices.empty()) throw DataError("train: validation split leaves no train data");

  Adam opt(model.named_params(), cfg.learning_rate);
  std::vector<NamedTensorF> best_state;
  int since_best = 0;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    seeded_shuffle(result.train_indices, rng);
    const std::size_t n = result.train_indices.size();
    for (std::size_t at = 0; at < n; at += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(n, at + static_cast<std::size_t>(cfg.batch_size));
      auto [mag, pha] = gather_batch(data, result.train_indices, at, end);
      ad::Tensor<float> loss;
      try {
        ad::Tensor<float> logits = model.forward(mag, pha, ad::Mode::Train);
        loss = ad::cross_entropy_loss(logits, gather_labels(data, result.train_indices, at, end));
        if (!std::isfinite(static_cast<double>(loss.value()[0])))
          throw NumericError("non-finite loss value");
      } catch (const NumericError& e) {
        // state dump: where the run died plus the parameter scale at death
        double param_linf = 0.0;
        for (auto& p : model.named_params())
          param_linf = std::max(param_linf,
                                static_cast<double>(p.tensor.value().abs().maxCoeff()));
        throw NumericError("train: divergent loss at epoch " + std::to_string(epoch) +
                           ", batch offset " + std::to_string(at) +
                           ", best_val_loss=" + std::to_string(result.best_val_loss) +
                           ", max|param|=" + std::to_string(param_linf) + ": " + e.what());
      }
      opt.zero_grad();
      ad::backpropagate(loss);
      opt.step();
    }

    const double val_loss = dataset_loss(model, data, result.val_indices);
    ++result.epochs_run;
    if (val_loss < result.best_val_loss) {
      result.best_val_loss = val_loss;
      result.best_epoch = epoch;
      best_state = model.state_dict();
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  if (!best_state.empty()) model.load_state(best_state);
  return result;
}

Eigen::VectorXi predict(net::PhaserModel<float>& model, const EncodedDataset& data) {
  Eigen::VectorXi out(static_cast<Eigen::Index>(data.size()));
  std::vector<int> indices(data.size());
  std::iota(indices.begin(), indices.end(), 0);
  for (std::size_t at = 0; at < data.size(); at += 64) {
    const std::size_t end = std::min(data.size(), at + 64);
    auto [mag, pha] = gather_batch(data, indices, at, end);
    ad::Tensor<float> logits = model.forward(mag, pha, ad::Mode::Eval);
    const int k = logits.dim(1);
    for (std::size_t i = at; i < end; ++i) {
      const Eigen::Index base = static_cast<Eigen::Index>(i - at) * k;
      int arg = 0;
      for (int j = 1; j < k; ++j)
        if (logits.value()[base + j] > logits.value()[base + arg]) arg = j;
      out[static_cast<Eigen::Index>(i)] = arg;
    }
  }
  return out;
}

MetricsRow evaluate(net::PhaserModel<float>& model, const EncodedDataset& data,
                    const std::string& scenario, std::uint64_t seed, const std::string& split) {
  if (data.size() == 0) throw DataError("evaluate: empty dataset");
  for (int l : data.labels)
    if (l < 0 || l >= data.num_classes)
      throw DataError("evaluate: label outside num_classes range");

  const Eigen::VectorXi preds = predict(model, data);
  Eigen::VectorXd correct = Eigen::VectorXd::Zero(data.num_classes);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(data.num_classes);
  for (std::size_t i = 0; i < data.size(); ++i) {
    total[data.labels[i]] += 1.0;
    if (preds[static_cast<Eigen::Index>(i)] == data.labels[i]) correct[data.labels[i]] += 1.0;
  }

  std::vector<int> indices(data.size());
  std::iota(indices.begin(), indices.end(), 0);
  MetricsRow row;
  row.scenario = scenario;
  row.seed = seed;
  row.split = split;
  row.accuracy = correct.sum() / static_cast<double>(data.size());
  row.loss = dataset_loss(model, data, indices);
  row.per_class.resize(data.num_classes);
  for (int k = 0; k < data.num_classes; ++k)
    row.per_class[k] = total[k] > 0.0 ? correct[k] / total[k] : 0.0;
  return row;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows, int num_classes) {
  std::string out = "scenario,seed,split,accuracy,loss";
  for (int k = 0; k < num_classes; ++k) out += ",acc_class_" + std::to_string(k);
  out += "\n";
  char buf[64];
  for (const auto& r : rows) {
    out += r.scenario + "," + std::to_string(r.seed) + "," + r.split;
    std::snprintf(buf, sizeof(buf), ",%.6f,%.6f", r.accuracy, r.loss);
    out += buf;
    for (int k = 0; k < num_classes; ++k) {
      std::snprintf(buf, sizeof(buf), ",%.6f", k < r.per_class.size() ? r.per_class[k] : 0.0);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

void write_metrics_csv(const std::vector<MetricsRow>& rows, int num_classes,
                       const std::string& path) {
  atomic_write_text(path, metrics_csv(rows, num_classes));
}

namespace {

// Seeded 80/20 split of sample indices, by underlying sample.
std::pair<std::vector<int>, std::vector<int>> holdout_split(std::size_t n, double frac,
                                                            std::uint64_t seed) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(splitmix64(seed ^ 0x484F4C44ull));
  seeded_shuffle(order, rng);
  const auto n_test = std::max<std::size_t>(1, static_cast<std::size_t>(frac * n));
  std::vector<int> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<int> train(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  return {train, test};
}

LabeledDataset take(const LabeledDataset& ds, const std::vector<int>& idx) {
  LabeledDataset out;
  out.num_classes = ds.num_classes;
  out.name = ds.name;
  for (int i : idx) {
    out.samples.push_back(ds.samples[static_cast<std::size_t>(i)]);
    out.labels.push_back(ds.labels[static_cast<std::size_t>(i)]);
    out.domains.push_back(ds.domains[static_cast<std::size_t>(i)]);
  }
  return out;
}

LabeledDataset relabel_all(const LabeledDataset& ds, int label, int num_classes) {
  LabeledDataset out = ds;
  out.num_classes = num_classes;
  std::fill(out.labels.begin(), out.labels.end(), label);
  return out;
}

}  // namespace

double discrepancy_test(const LabeledDataset& ds, const net::PhaserConfig& cfg,
                        const TrainConfig& tc) {
  ds.validate();
  auto [train_idx, test_idx] = holdout_split(ds.size(), 0.2, tc.seed);
  const LabeledDataset s_train = take(ds, train_idx);
  const LabeledDataset s_test = take(ds, test_idx);

  net::PhaserConfig bin_cfg = cfg;
  bin_cfg.num_classes = 2;
  bin_cfg.seed = tc.seed;
  const LabeledDataset train_ds =
      merge(relabel_all(s_train, 0, 2), relabel_all(hilbert_augment(s_train), 1, 2));
  const LabeledDataset test_ds =
      merge(relabel_all(s_test, 0, 2), relabel_all(hilbert_augment(s_test), 1, 2));

  net::PhaserModel<float> model = net::build_model<float>(bin_cfg);
  const EncodedDataset enc_train = encode_dataset(train_ds, bin_cfg);
  train(model, enc_train, tc);
  return evaluate(model, encode_dataset(test_ds, bin_cfg), "discrepancy", tc.seed, "target")
      .accuracy;
}

std::pair<double, double> semantic_preservation_test(const LabeledDataset& ds,
                                                     const net::PhaserConfig& cfg,
                                                     const TrainConfig& tc) {
  ds.validate();
  auto [train_idx, test_idx] = holdout_split(ds.size(), 0.2, tc.seed);
  const LabeledDataset s_train = take(ds, train_idx);
  const LabeledDataset s_test = take(ds, test_idx);

  net::PhaserConfig run_cfg = cfg;
  run_cfg.seed = tc.seed;
  net::PhaserModel<float> model = net::build_model<float>(run_cfg);
  train(model, encode_dataset(s_train, run_cfg), tc);
  const double acc_s =
      evaluate(model, encode_dataset(s_test, run_cfg), "semantic", tc.seed, "target").accuracy;
  const double acc_aug =
      evaluate(model, encode_dataset(hilbert_augment(s_test), run_cfg), "semantic", tc.seed,
               "target")
          .accuracy;
  return {acc_s, acc_aug};
}

Variant variant_from_string(const std::string& s) {
  if (s == "full") return Variant::Full;
  if (s == "no_aug") return Variant::NoAug;
  if (s == "no_residual") return Variant::NoResidual;
  if (s == "mag_only") return Variant::MagOnly;
  if (s == "concat") return Variant::Concat;
  throw DataError("unknown variant '" + s + "'");
}

std::string variant_to_string(Variant v) {
  switch (v) {
    case Variant::Full:
      return "full";
    case Variant::NoAug:
      return "no_aug";
    case Variant::NoResidual:
      return "no_residual";
    case Variant::MagOnly:
      return "mag_only";
    case Variant::Concat:
      return "concat";
  }
  return "full";
}

std::vector<MetricsRow> run_experiment(const LabeledDataset& ds, const ScenarioSplit& split,
                                       Variant variant, const net::PhaserConfig& net_cfg,
                                       const TrainConfig& train_cfg,
                                       const std::string& scenario_name) {
  split.validate();
  const LabeledDataset source = filter_by_domains(ds, split.source_domains);
  const LabeledDataset target = filter_by_domains(ds, split.target_domains);

  const LabeledDataset train_ds =
      variant == Variant::NoAug ? source : merge(source, hilbert_augment(source));
  net::ArchMode arch = net::ArchMode::Full;
  if (variant == Variant::NoResidual) arch = net::ArchMode::NoResidual;
  if (variant == Variant::MagOnly) arch = net::ArchMode::MagOnly;
  if (variant == Variant::Concat) arch = net::ArchMode::Concat;

  net::PhaserConfig cfg = net_cfg;
  cfg.seed = train_cfg.seed;
  net::PhaserModel<float> model = net::build_model<float>(cfg, arch);
  const EncodedDataset enc_train = encode_dataset(train_ds, cfg);
  const TrainResult tr = train(model, enc_train, train_cfg);

  std::vector<MetricsRow> rows;
  rows.push_back(evaluate(model, enc_train.subset(tr.val_indices), scenario_name, train_cfg.seed,
                          "val"));
  rows.push_back(
      evaluate(model, encode_dataset(target, cfg), scenario_name, train_cfg.seed, "target"));
  return rows;
}

std::vector<MetricsRow> ablate(const LabeledDataset& ds, int scenario,
                               const std::vector<Variant>& variants,
                               const std::vector<std::uint64_t>& seeds,
                               const net::PhaserConfig& net_cfg, const TrainConfig& train_cfg,
                               int jobs) {
  const ScenarioSplit split = scenario_split(ds, scenario);
  struct Task {
    Variant variant;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (Variant v : variants)
    for (std::uint64_t s : seeds) tasks.push_back({v, s});

  std::vector<std::vector<MetricsRow>> slots(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      TrainConfig tc = train_cfg;
      tc.seed = tasks[i].seed;
      const std::string name =
          std::to_string(scenario) + ":" + variant_to_string(tasks[i].variant);
      slots[i] = run_experiment(ds, split, tasks[i].variant, net_cfg, tc, name);
    }
  };

  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<MetricsRow> rows;
  for (auto& s : slots)
    for (auto& r : s) rows.push_back(std::move(r));
  return rows;
}

}  // namespace phaser::harness
