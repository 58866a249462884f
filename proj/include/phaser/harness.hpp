#pragma once

#include <set>

#include "phaser/augment.hpp"
#include "phaser/divergence.hpp"
#include "phaser/phaser_net.hpp"

namespace phaser::harness {

// Synthetic nonstationary domains: sample = mu_t + sigma_t * z_t + class
// tone. Classes are coded by distinct bin-aligned tone frequencies (so the
// task is magnitude-separable); domains shift the (mu_t, sigma_t) tracks and
// add a domain-specific tone phase offset.
struct SynthSpec {
  int variates = 3;
  int timesteps = 64;
  int num_classes = 3;
  int num_domains = 4;
  int samples_per_domain_class = 12;
  double sample_rate_hz = 64.0;
  std::vector<int> class_bins;          // default: 6, 10, 14, ...
  double tone_amp = 1.0;
  double noise_sigma = 0.3;
  double trend_amp = 1.0;
  double trend_domain_step = 0.5;       // slope multiplier per domain
  double sigma_domain_step = 0.15;      // sigma scale per domain
  std::vector<double> domain_phase_offsets;  // default: d * domain_phase_step
  double domain_phase_step = kPi / 6.0;
  double phase_jitter = 0.0;            // per-sample uniform tone-phase jitter
  std::uint64_t seed = 2711;

  void validate() const;
  std::vector<int> resolved_class_bins() const;
  double domain_phase(int domain) const;
};

// The (mu_t, sigma_t) track that spec assigns to one domain.
GaussianTrack domain_track(const SynthSpec& spec, int domain);

LabeledDataset synth_generate(const SynthSpec& spec);
// Same tone/label machinery but with explicit per-domain tracks.
LabeledDataset synth_from_tracks(const SynthSpec& spec,
                                 const std::vector<GaussianTrack>& tracks);

struct ScenarioSplit {
  std::set<int> source_domains;
  std::set<int> target_domains;
  void validate() const;  // disjoint, both nonempty
};

// Scenario k (1-based) holds out the k-th domain id present in the dataset.
ScenarioSplit scenario_split(const LabeledDataset& ds, int scenario);
LabeledDataset filter_by_domains(const LabeledDataset& ds, const std::set<int>& domains);

// Spectrogram-encoded view of a dataset: mag/pha per sample, flattened
// V x bins x frames, float32. Carries no domain ids, so the training path
// cannot read them.
struct EncodedDataset {
  int V = 0, bins = 0, frames = 0, num_classes = 0;
  std::vector<Eigen::ArrayXf> mag, pha;
  std::vector<int> labels;

  std::size_t size() const { return mag.size(); }
  EncodedDataset subset(const std::vector<int>& indices) const;
};

EncodedDataset encode_dataset(const LabeledDataset& ds, const net::PhaserConfig& cfg);

struct TrainConfig {
  double learning_rate = 1e-3;  // within [1e-5, 1e-3]
  int max_epochs = 40;          // <= 150
  int batch_size = 32;
  double validation_fraction = 0.2;
  int patience = 15;
  std::uint64_t seed = 2711;

  void validate() const;
};

struct TrainResult {
  int best_epoch = -1;
  double best_val_loss = std::numeric_limits<double>::infinity();
  int epochs_run = 0;
  std::vector<int> train_indices, val_indices;
};

// Adam on the cross-entropy objective with a seeded 20% validation split,
// checkpoint at minimum validation loss, early stop on patience.
TrainResult train(net::PhaserModel<float>& model, const EncodedDataset& data,
                  const TrainConfig& cfg);

struct MetricsRow {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string split;  // val | target
  double accuracy = 0.0;
  double loss = 0.0;
  Eigen::VectorXd per_class;
};

Eigen::VectorXi predict(net::PhaserModel<float>& model, const EncodedDataset& data);
MetricsRow evaluate(net::PhaserModel<float>& model, const EncodedDataset& data,
                    const std::string& scenario, std::uint64_t seed, const std::string& split);

std::string metrics_csv(const std::vector<MetricsRow>& rows, int num_classes);
void write_metrics_csv(const std::vector<MetricsRow>& rows, int num_classes,
                       const std::string& path);

// Trains a binary classifier to tell S from HT(S) on a held-out split;
// high accuracy certifies that the augmentation diversifies the data.
double discrepancy_test(const LabeledDataset& ds, const net::PhaserConfig& cfg,
                        const TrainConfig& tc);

// Trains on S only; returns (accuracy on held-out S, accuracy on HT of the
// same held-out samples).
std::pair<double, double> semantic_preservation_test(const LabeledDataset& ds,
                                                     const net::PhaserConfig& cfg,
                                                     const TrainConfig& tc);

enum class Variant { Full, NoAug, NoResidual, MagOnly, Concat };
Variant variant_from_string(const std::string& s);
std::string variant_to_string(Variant v);

// Trains the variant on the source domains (with Hilbert augmentation except
// for NoAug) and evaluates the validation split and the target domains.
std::vector<MetricsRow> run_experiment(const LabeledDataset& ds, const ScenarioSplit& split,
                                       Variant variant, const net::PhaserConfig& net_cfg,
                                       const TrainConfig& train_cfg,
                                       const std::string& scenario_name);

// variants x seeds grid; rows come back in deterministic order regardless of
// the number of worker threads.
std::vector<MetricsRow> ablate(const LabeledDataset& ds, int scenario,
                               const std::vector<Variant>& variants,
                               const std::vector<std::uint64_t>& seeds,
                               const net::PhaserConfig& net_cfg, const TrainConfig& train_cfg,
                               int jobs = 1);

}  // namespace phaser::harness
