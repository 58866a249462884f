// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion pins its tolerances and, where stated, its runtime
// budget in code.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "phaser/harness.hpp"
#include "phaser/stationarity.hpp"

using namespace phaser;

namespace {

int g_failures = 0;

void criterion(int number, const std::string& label, const std::function<bool(std::string&)>& fn,
               double budget_seconds = 0.0) {
  std::string detail;
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  try {
    ok = fn(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_seconds > 0.0 && elapsed > budget_seconds) {
    ok = false;
    detail += (detail.empty() ? "" : "; ") + std::string("runtime ") + std::to_string(elapsed) +
              "s exceeds budget " + std::to_string(budget_seconds) + "s";
  }
  if (!ok) ++g_failures;
  std::printf("[%s] criterion %-2d %-28s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", number,
              label.c_str(), elapsed, detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
}

Eigen::VectorXd random_vector(int n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.normal();
  return x;
}

Eigen::VectorXd strip_dc_nyquist(const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd out = x;
  const double mean = x.mean();
  double alt = 0.0;
  for (int i = 0; i < n; ++i) alt += (i % 2 == 0 ? 1.0 : -1.0) * x[i];
  alt /= n;
  for (int i = 0; i < n; ++i) out[i] -= mean + (i % 2 == 0 ? 1.0 : -1.0) * alt;
  return out;
}

double rms(const Eigen::VectorXd& x) {
  return std::sqrt(x.squaredNorm() / static_cast<double>(x.size()));
}

// --- criterion 1: Hilbert identities --------------------------------------

bool hilbert_identities(std::string& detail) {
  const int n = 128;
  // cos -> sin on every interior bin-aligned tone frequency
  for (int bin = 1; bin < n / 2; ++bin) {
    Eigen::VectorXd cosx(n), sinx(n);
    for (int i = 0; i < n; ++i) {
      cosx[i] = std::cos(2.0 * kPi * bin * i / n);
      sinx[i] = std::sin(2.0 * kPi * bin * i / n);
    }
    if (rms(hilbert(cosx) - sinx) >= 1e-9) {
      detail = "cos->sin failed at bin " + std::to_string(bin);
      return false;
    }
  }
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Eigen::VectorXd x = random_vector(n, 10'000 + seed);
    const Eigen::VectorXd h = hilbert(x);
    const Eigen::VectorXcd sx = dft_forward(x);
    const Eigen::VectorXcd sh = dft_forward(h);
    for (int k = 1; k < n; ++k) {
      if (k == n / 2) continue;
      if (std::abs(std::abs(sh[k]) - std::abs(sx[k])) >= 1e-9) {
        detail = "magnitude drift at seed " + std::to_string(seed);
        return false;
      }
    }
    const Eigen::VectorXd clean = strip_dc_nyquist(x);
    const Eigen::VectorXd hc = hilbert(clean);
    if (std::abs(clean.dot(hc)) / (clean.norm() * hc.norm()) > 1e-9) {
      detail = "orthogonality failed at seed " + std::to_string(seed);
      return false;
    }
    if (rms(hilbert(hc) + clean) >= 1e-9) {
      detail = "anti-involution failed at seed " + std::to_string(seed);
      return false;
    }
  }
  return true;
}

// --- criterion 2: gradient correctness -------------------------------------

bool gradient_correctness(std::string& detail) {
  using ad::LayerSpec;
  using ad::Tensor;
  auto rand_tensor = [](std::vector<int> shape, std::uint64_t seed, bool positive = false) {
    Rng rng(seed);
    ad::Node<double>::Storage data(ad::shape_numel(shape));
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      data[i] = rng.normal();
      if (positive) data[i] = std::abs(data[i]);
    }
    return Tensor<double>::leaf(std::move(shape), std::move(data));
  };

  struct Case {
    std::string name;
    std::vector<LayerSpec> chain;
    std::vector<int> input_shape;
    std::vector<int> labels;
  };
  const std::vector<Case> cases = {
      {"dense", {LayerSpec::dense(6, 4, 11)}, {5, 6}, {0, 1, 2, 3, 0}},
      {"conv2d", {LayerSpec::conv2d(2, 3, 3, 3, 1, 1, 12), LayerSpec::mean_pool_over_dim(2),
                  LayerSpec::mean_pool_over_dim(3)},
       {4, 2, 5, 6},
       {0, 1, 2, 0}},
      {"batchnorm2d", {LayerSpec::batchnorm2d(3), LayerSpec::mean_pool_over_dim(2),
                       LayerSpec::mean_pool_over_dim(3)},
       {4, 3, 4, 4},
       {0, 1, 2, 0}},
      {"silu", {LayerSpec::silu()}, {4, 3}, {0, 1, 2, 0}},  // parameter-free: input grads
      {"mean_pool", {LayerSpec::mean_pool_over_dim(2), LayerSpec::mean_pool_over_dim(3)},
       {3, 2, 4, 5},
       {0, 1, 1}},
  };
  for (const auto& c : cases) {
    const ad::GradReport rep =
        ad::grad_check(c.chain, rand_tensor(c.input_shape, 77), c.labels, 1e-5, 1e-4, 400, 5);
    if (!rep.pass) {
      detail = c.name + " max rel error " + std::to_string(rep.max_rel_error);
      return false;
    }
  }

  // Full model in double precision.
  net::PhaserConfig cfg;
  cfg.V = 2;
  cfg.c = 1;
  cfg.B = 2;
  cfg.nfft = 8;
  cfg.seg_len = 4;
  cfg.num_classes = 3;
  cfg.seed = 7;
  auto model = std::make_shared<net::PhaserModel<double>>(net::build_model<double>(cfg));
  Tensor<double> mag = rand_tensor({3, 2, 5, 4}, 71, true);
  Tensor<double> pha = rand_tensor({3, 2, 5, 4}, 72);
  const std::vector<int> labels = {0, 1, 2};
  auto build_loss = [model, mag, pha, labels]() {
    return ad::cross_entropy_loss(model->forward(mag, pha, ad::Mode::Train), labels);
  };
  std::vector<Tensor<double>> params;
  for (auto& p : model->named_params()) params.push_back(p.tensor);
  const ad::GradReport rep = ad::grad_check_fn<double>(build_loss, params, 1e-5, 1e-4, 250, 9);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "full model max rel error %.2e", rep.max_rel_error);
  detail = buf;
  return rep.pass;
}

// --- criterion 3: subspectral normalization ---------------------------------

bool subspectral_norm(std::string& detail) {
  ad::SubSpectralNorm<double> paper_scale(2, 513, 3);
  if (paper_scale.band_sizes() != std::vector<int>{171, 171, 171}) {
    detail = "513/3 did not split into three 171-bin bands";
    return false;
  }

  ad::SubSpectralNorm<double> ssn(2, 12, 3);
  Rng rng(5);
  ad::Node<double>::Storage data(16L * 2 * 12 * 6);
  for (Eigen::Index i = 0; i < data.size(); ++i) data[i] = 3.0 + 2.0 * rng.normal();
  ad::Tensor<double> x = ad::Tensor<double>::leaf({16, 2, 12, 6}, std::move(data));
  ad::Tensor<double> y = ssn.forward(x, ad::Mode::Train);
  for (int c = 0; c < 2; ++c)
    for (int band = 0; band < 3; ++band) {
      double acc = 0.0, acc2 = 0.0;
      int count = 0;
      for (int n = 0; n < 16; ++n)
        for (int b = 4 * band; b < 4 * (band + 1); ++b)
          for (int t = 0; t < 6; ++t, ++count) {
            const double v = y.value()[((n * 2 + c) * 12 + b) * 6 + t];
            acc += v;
            acc2 += v * v;
          }
      const double mean = acc / count;
      const double sd = std::sqrt(acc2 / count - mean * mean);
      if (std::abs(mean) > 1e-6 || std::abs(sd - 1.0) > 1e-3) {
        detail = "band " + std::to_string(band) + " mean " + std::to_string(mean) + " sd " +
                 std::to_string(sd);
        return false;
      }
    }
  return true;
}

// --- criterion 4: ADF -------------------------------------------------------

double adf_oracle(const Eigen::VectorXd& x, int p) {
  const int T = static_cast<int>(x.size());
  const int n_obs = T - p - 1;
  const int k = p + 2;
  Eigen::VectorXd y(n_obs);
  Eigen::MatrixXd X(n_obs, k);
  for (int r = 0; r < n_obs; ++r) {
    const int t = p + 1 + r;
    y[r] = x[t] - x[t - 1];
    X(r, 0) = 1.0;
    X(r, 1) = x[t - 1];
    for (int i = 1; i <= p; ++i) X(r, 1 + i) = x[t - i] - x[t - i - 1];
  }
  const Eigen::MatrixXd xtx = X.transpose() * X;
  const Eigen::VectorXd beta = xtx.ldlt().solve(X.transpose() * y);
  const double s2 = (y - X * beta).squaredNorm() / (n_obs - k);
  const Eigen::MatrixXd xtx_inv = xtx.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  return beta[1] / std::sqrt(s2 * xtx_inv(1, 1));
}

bool adf_checks(std::string& detail) {
  auto ar1 = [](int n, double phi, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::VectorXd x(n);
    x[0] = rng.normal();
    for (int t = 1; t < n; ++t) x[t] = phi * x[t - 1] + rng.normal();
    return x;
  };
  int rejects = 0, holds = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Eigen::VectorXd stat_series = ar1(500, 0.5, 40'000 + seed);
    const AdfResult a = adf_statistic(stat_series);
    if (std::abs(a.statistic - adf_oracle(stat_series, a.lag_order)) > 1e-8) {
      detail = "oracle mismatch on AR(1) seed " + std::to_string(seed);
      return false;
    }
    if (a.reject_at_5pct) ++rejects;

    const Eigen::VectorXd walk = ar1(500, 1.0, 41'000 + seed);
    const AdfResult b = adf_statistic(walk);
    if (std::abs(b.statistic - adf_oracle(walk, b.lag_order)) > 1e-8) {
      detail = "oracle mismatch on random walk seed " + std::to_string(seed);
      return false;
    }
    if (!b.reject_at_5pct) ++holds;
  }
  detail = "AR(1) rejections " + std::to_string(rejects) + "/20, random-walk holds " +
           std::to_string(holds) + "/20";
  return rejects >= 18 && holds >= 18;
}

// --- criterion 5: divergence oracles ----------------------------------------

bool divergence_oracles(std::string& detail) {
  Rng rng(2711);
  for (double q : {0.5, 2.0, 4.0}) {
    for (int i = 0; i < 50; ++i) {
      const double mi = rng.uniform(-0.3, 0.3);
      const double mj = rng.uniform(-0.3, 0.3);
      const double si = rng.uniform(0.97, 1.03);
      const double sj = rng.uniform(0.97, 1.03);
      GaussianTrack a, b;
      a.mu = Eigen::VectorXd::Constant(1, mi);
      a.sigma = Eigen::VectorXd::Constant(1, si);
      b.mu = Eigen::VectorXd::Constant(1, mj);
      b.sigma = Eigen::VectorXd::Constant(1, sj);
      const double numeric =
          renyi_numeric([&](double x) { return gaussian_pdf(x, mi, si); },
                        [&](double x) { return gaussian_pdf(x, mj, sj); }, q,
                        default_grid({a, b}));
      const double closed = renyi_gaussian_standard(mi, si, mj, sj, q);
      if (std::abs(numeric - closed) > 1e-6 * std::max(1.0, std::abs(closed))) {
        detail = "quadrature disagrees at q=" + std::to_string(q) + " draw " + std::to_string(i);
        return false;
      }
    }
  }
  if (std::abs(renyi_gaussian_bound(0, 1, 1, 1, 0.5) - 0.57213) > 1e-4) {
    detail = "bound-form evaluation drifted from 0.57213";
    return false;
  }
  for (double q : {0.25, 0.5, 2.0, 4.0}) {
    if (beta_divergence(0.0, q) != 1.0) {
      detail = "beta(0, q) != 1 at q=" + std::to_string(q);
      return false;
    }
  }
  return true;
}

// --- criterion 6: Lemma-1 numeric check --------------------------------------

bool lemma1_check(std::string& detail) {
  std::vector<GaussianTrack> sources(3);
  sources[0].mu = Eigen::VectorXd::Constant(1, -1.0);
  sources[0].sigma = Eigen::VectorXd::Constant(1, 1.0);
  sources[1].mu = Eigen::VectorXd::Constant(1, 0.0);
  sources[1].sigma = Eigen::VectorXd::Constant(1, 1.2);
  sources[2].mu = Eigen::VectorXd::Constant(1, 1.5);
  sources[2].sigma = Eigen::VectorXd::Constant(1, 0.9);
  const double q = 2.0;
  const QuadratureGrid grid = default_grid(sources);

  double max_source_beta = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      const double rd = renyi_numeric(
          [&](double x) { return gaussian_pdf(x, sources[i].mu[0], sources[i].sigma[0]); },
          [&](double x) { return gaussian_pdf(x, sources[j].mu[0], sources[j].sigma[0]); }, q,
          grid);
      max_source_beta = std::max(max_source_beta, beta_divergence(rd, q));
    }

  Rng rng(2711);
  auto simplex = [&rng]() {
    std::vector<double> cuts = {0.0, 1.0, rng.uniform(), rng.uniform()};
    std::sort(cuts.begin(), cuts.end());
    Eigen::VectorXd w(3);
    for (int i = 0; i < 3; ++i) w[i] = cuts[static_cast<std::size_t>(i) + 1] - cuts[static_cast<std::size_t>(i)];
    return w;
  };
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd w1 = simplex();
    const Eigen::VectorXd w2 = simplex();
    const double rd =
        renyi_numeric([&](double x) { return mixture_pdf(x, w1, sources, 0); },
                      [&](double x) { return mixture_pdf(x, w2, sources, 0); }, q, grid);
    if (beta_divergence(rd, q) > max_source_beta + 1e-6) {
      detail = "hull bound violated at trial " + std::to_string(trial);
      return false;
    }
  }
  detail = "max source beta " + std::to_string(max_source_beta);
  return true;
}

// --- criterion 7: risk-bound sanity -------------------------------------------

bool risk_bound_sanity(std::string& detail) {
  harness::SynthSpec spec;
  spec.variates = 2;
  spec.timesteps = 64;
  spec.num_classes = 2;
  spec.num_domains = 2;
  spec.samples_per_domain_class = 12;
  spec.class_bins = {6, 10};
  spec.tone_amp = 1.5;
  spec.noise_sigma = 0.3;
  spec.trend_amp = 1.0;
  spec.domain_phase_offsets = {0.0, kPi / 6};
  spec.phase_jitter = 0.1;
  spec.seed = 2711;
  const LabeledDataset source = harness::synth_generate(spec);

  const std::vector<GaussianTrack> tracks = {harness::domain_track(spec, 0),
                                             harness::domain_track(spec, 1)};
  const double q = 2.0;
  const double epsilon = epsilon_bound(tracks, q, RenyiForm::Standard).epsilon;

  net::PhaserConfig cfg;
  cfg.V = 2;
  cfg.c = 1;
  cfg.B = 3;
  cfg.nfft = 64;
  cfg.seg_len = 4;
  cfg.num_classes = 2;
  harness::TrainConfig tc;
  tc.learning_rate = 1e-3;
  tc.max_epochs = 25;
  tc.batch_size = 32;
  tc.patience = 15;

  // Five-seed ensemble trained once on the augmented source pipeline.
  const LabeledDataset merged = merge(source, hilbert_augment(source));
  std::vector<net::PhaserModel<float>> ensemble;
  for (std::uint64_t seed : {2711ull, 2712ull, 2713ull, 2714ull, 2715ull}) {
    net::PhaserConfig c = cfg;
    c.seed = seed;
    harness::TrainConfig t = tc;
    t.seed = seed;
    net::PhaserModel<float> model = net::build_model<float>(c);
    harness::train(model, harness::encode_dataset(merged, c), t);
    ensemble.push_back(std::move(model));
  }

  // Unseen in-hull domain: midpoint statistics track, midpoint phase.
  GaussianTrack mid;
  mid.mu = 0.5 * (tracks[0].mu + tracks[1].mu);
  mid.sigma = 0.5 * (tracks[0].sigma + tracks[1].sigma);
  harness::SynthSpec target_spec = spec;
  target_spec.num_domains = 1;
  target_spec.domain_phase_offsets = {kPi / 12};
  target_spec.samples_per_domain_class = 15;

  int held = 0;
  for (int trial = 0; trial < 20; ++trial) {
    target_spec.seed = 50'000 + static_cast<std::uint64_t>(trial);
    const LabeledDataset target = harness::synth_from_tracks(target_spec, {mid});
    const harness::EncodedDataset enc = harness::encode_dataset(target, cfg);
    Eigen::MatrixXi preds(static_cast<Eigen::Index>(ensemble.size()),
                          static_cast<Eigen::Index>(enc.size()));
    for (std::size_t m = 0; m < ensemble.size(); ++m)
      preds.row(static_cast<Eigen::Index>(m)) = harness::predict(ensemble[m], enc).transpose();
    Eigen::VectorXi labels(static_cast<Eigen::Index>(enc.labels.size()));
    for (std::size_t i = 0; i < enc.labels.size(); ++i)
      labels[static_cast<Eigen::Index>(i)] = enc.labels[i];
    const BoundReport report = make_bound_report(preds, labels, epsilon, q);
    if (report.holds) ++held;
  }
  detail = "bound held in " + std::to_string(held) + "/20 trials (epsilon " +
           std::to_string(epsilon) + ")";
  return held >= 18;
}

// --- criteria 8/9/10/11: synthetic experiment analogs --------------------------

net::PhaserConfig experiment_net_config(int variates, int num_classes) {
  net::PhaserConfig cfg;
  cfg.V = variates;
  cfg.c = 1;
  cfg.B = 3;
  cfg.nfft = 64;
  cfg.seg_len = 4;
  cfg.num_classes = num_classes;
  return cfg;
}

harness::TrainConfig experiment_train_config() {
  harness::TrainConfig tc;
  tc.learning_rate = 1e-3;
  tc.max_epochs = 60;
  tc.batch_size = 32;
  tc.patience = 15;
  tc.seed = 2711;
  return tc;
}

bool diversification(std::string& detail) {
  harness::SynthSpec spec;
  spec.variates = 3;
  spec.timesteps = 64;
  spec.num_classes = 3;
  spec.num_domains = 2;
  spec.samples_per_domain_class = 24;
  spec.class_bins = {4, 12, 20};
  spec.tone_amp = 1.0;
  spec.noise_sigma = 0.3;
  spec.trend_amp = 2.5;
  spec.phase_jitter = kPi;
  spec.seed = 2711;
  const double acc =
      harness::discrepancy_test(harness::synth_generate(spec), experiment_net_config(3, 3),
                                experiment_train_config());
  detail = "discrepancy accuracy " + std::to_string(acc);
  return acc >= 0.90;
}

bool preservation(std::string& detail) {
  harness::SynthSpec spec;
  spec.variates = 3;
  spec.timesteps = 64;
  spec.num_classes = 3;
  spec.num_domains = 2;
  spec.samples_per_domain_class = 30;
  spec.class_bins = {4, 12, 20};
  spec.tone_amp = 1.0;
  spec.noise_sigma = 0.3;
  spec.trend_amp = 0.5;
  spec.phase_jitter = kPi;
  spec.seed = 2711;
  const auto [acc_s, acc_aug] = harness::semantic_preservation_test(
      harness::synth_generate(spec), experiment_net_config(3, 3), experiment_train_config());
  detail = "acc_S " + std::to_string(acc_s) + ", acc_augmented " + std::to_string(acc_aug);
  return std::abs(acc_s - acc_aug) <= 0.05;
}

harness::SynthSpec ablation_spec() {
  harness::SynthSpec spec;
  spec.variates = 3;
  spec.timesteps = 64;
  spec.num_classes = 3;
  spec.num_domains = 4;
  spec.samples_per_domain_class = 12;
  spec.class_bins = {6, 8, 10};
  spec.tone_amp = 1.5;
  spec.noise_sigma = 0.3;
  spec.trend_amp = 1.0;
  spec.domain_phase_offsets = {0.0, kPi / 6, kPi / 3, -kPi / 3};
  spec.phase_jitter = 0.1;
  spec.seed = 2711;
  return spec;
}

bool ablation(std::string& detail) {
  const LabeledDataset ds = harness::synth_generate(ablation_spec());
  const std::vector<harness::Variant> variants = {
      harness::Variant::Full, harness::Variant::NoAug, harness::Variant::NoResidual};
  const std::vector<std::uint64_t> seeds = {2711, 2712, 2713};
  const std::vector<harness::MetricsRow> rows = harness::ablate(
      ds, 4, variants, seeds, experiment_net_config(3, 3), experiment_train_config(), 3);

  auto mean_target = [&](const std::string& variant) {
    double acc = 0.0;
    int count = 0;
    for (const auto& r : rows)
      if (r.split == "target" && r.scenario == "4:" + variant) {
        acc += r.accuracy;
        ++count;
      }
    return acc / count;
  };
  const double full = mean_target("full");
  const double no_aug = mean_target("no_aug");
  const double no_residual = mean_target("no_residual");
  detail = "mean target acc: full " + std::to_string(full) + ", no_aug " + std::to_string(no_aug) +
           ", no_residual " + std::to_string(no_residual);
  return full >= no_residual && full >= no_aug && (full - no_aug) >= 0.02;
}

bool determinism(std::string& detail) {
  harness::SynthSpec spec = ablation_spec();
  spec.samples_per_domain_class = 6;
  const LabeledDataset ds = harness::synth_generate(spec);
  harness::TrainConfig tc = experiment_train_config();
  tc.max_epochs = 6;
  auto run = [&]() {
    return harness::metrics_csv(
        harness::ablate(ds, 4, {harness::Variant::Full}, {2711}, experiment_net_config(3, 3), tc,
                        2),
        3);
  };
  const std::string first = run();
  const std::string second = run();
  if (first != second) {
    detail = "metrics CSV bytes differ between identical runs";
    return false;
  }
  return true;
}

}  // namespace

int main() {
  criterion(1, "hilbert identities", hilbert_identities, 5.0);
  criterion(2, "gradient correctness", gradient_correctness, 60.0);
  criterion(3, "subspectral normalization", subspectral_norm);
  criterion(4, "adf statistics", adf_checks, 10.0);
  criterion(5, "divergence oracles", divergence_oracles);
  criterion(6, "lemma-1 hull bound", lemma1_check, 60.0);
  criterion(7, "risk-bound sanity", risk_bound_sanity);
  criterion(8, "diversification analog", diversification);
  criterion(9, "preservation analog", preservation);
  criterion(10, "ablation analog", ablation, 600.0);
  criterion(11, "determinism", determinism);
  if (g_failures == 0) {
    std::printf("acceptance: all 11 criteria passed\n");
  } else {
    std::printf("acceptance: %d criteria FAILED\n", g_failures);
  }
  return g_failures == 0 ? 0 : 1;
}
