// phaser: one executable exposing every pipeline stage for scripted runs.
// Exit codes: 0 success, 1 usage, 2 data error, 3 numeric error. Every
// subcommand writes its artifacts to files named by flags and echoes the
// fully resolved configuration into <out>.manifest.json; stdout carries a
// single summary line.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "phaser/harness.hpp"
#include "phaser/stationarity.hpp"

namespace {

using nlohmann::json;
using namespace phaser;

void write_manifest(const std::string& out_path, const std::string& subcommand, const json& cfg) {
  json manifest;
  manifest["subcommand"] = subcommand;
  manifest["output"] = out_path;
  manifest["config"] = cfg;
  atomic_write_text(out_path + ".manifest.json", manifest.dump(2) + "\n");
}

net::PhaserConfig resolve_net_config(const std::string& config_path, int variates, int timesteps,
                                     int num_classes, int nfft, int seg_len) {
  net::PhaserConfig cfg;
  if (!config_path.empty()) {
    cfg = net::load_phaser_config(config_path);
  } else {
    cfg.V = variates;
    cfg.num_classes = num_classes;
    cfg.nfft = nfft;
    cfg.seg_len = seg_len;
  }
  if (timesteps > 0 && timesteps / cfg.seg_len < 1)
    throw DataError("config: seg_len larger than the series length");
  return cfg;
}

json net_config_json(const net::PhaserConfig& cfg) {
  return json::parse(net::phaser_config_to_json(cfg));
}

json train_config_json(const harness::TrainConfig& tc) {
  json j;
  j["learning_rate"] = tc.learning_rate;
  j["max_epochs"] = tc.max_epochs;
  j["batch_size"] = tc.batch_size;
  j["validation_fraction"] = tc.validation_fraction;
  j["patience"] = tc.patience;
  j["seed"] = tc.seed;
  return j;
}

std::vector<GaussianTrack> load_tracks(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open for reading");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw DataError(path + ": invalid JSON: " + e.what());
  }
  if (!j.contains("tracks") || !j["tracks"].is_array())
    throw DataError(path + ": expected {\"tracks\": [{\"mu\": [...], \"sigma\": [...]}]}");
  std::vector<GaussianTrack> tracks;
  for (const auto& t : j["tracks"]) {
    GaussianTrack track;
    const auto mu = t.at("mu").get<std::vector<double>>();
    const auto sigma = t.at("sigma").get<std::vector<double>>();
    track.mu = Eigen::Map<const Eigen::VectorXd>(mu.data(), static_cast<Eigen::Index>(mu.size()));
    track.sigma =
        Eigen::Map<const Eigen::VectorXd>(sigma.data(), static_cast<Eigen::Index>(sigma.size()));
    track.validate();
    tracks.push_back(std::move(track));
  }
  return tracks;
}

int run(int argc, char** argv) {
  CLI::App app{"PhASER pipeline: Hilbert-augmented magnitude/phase classification "
               "with nonstationarity diagnostics and divergence bounds"};
  app.require_subcommand(1);

  // --- synth ---------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "Generate a synthetic multi-domain dataset");
  struct {
    std::string out;
    harness::SynthSpec spec;
  } sy;
  synth->add_option("--out", sy.out, "Output TSDS file")->required();
  synth->add_option("--domains", sy.spec.num_domains, "Number of domains");
  synth->add_option("--classes", sy.spec.num_classes, "Number of classes");
  synth->add_option("--variates", sy.spec.variates, "Variates per sample");
  synth->add_option("--timesteps", sy.spec.timesteps, "Time steps per sample");
  synth->add_option("--samples-per-domain-class", sy.spec.samples_per_domain_class,
                    "Samples per (domain, class) cell");
  synth->add_option("--sample-rate", sy.spec.sample_rate_hz, "Sample rate in Hz");
  synth->add_option("--tone-amp", sy.spec.tone_amp, "Class tone amplitude");
  synth->add_option("--noise-sigma", sy.spec.noise_sigma, "Base noise level");
  synth->add_option("--trend-amp", sy.spec.trend_amp, "Mean-trend amplitude");
  synth->add_option("--trend-domain-step", sy.spec.trend_domain_step,
                    "Per-domain slope multiplier");
  synth->add_option("--sigma-domain-step", sy.spec.sigma_domain_step, "Per-domain sigma step");
  synth->add_option("--domain-phase-step", sy.spec.domain_phase_step,
                    "Tone phase offset between adjacent domains (radians)");
  synth->add_option("--phase-jitter", sy.spec.phase_jitter,
                    "Uniform per-sample tone phase jitter (radians)");
  synth->add_option("--seed", sy.spec.seed, "Generator seed");

  // --- augment ---------------------------------------------------------------
  auto* augment = app.add_subcommand("augment", "Augment a dataset");
  struct {
    std::string in, out, kind = "hilbert_fixed";
    AugmentSpec spec;
    bool merge = false;
  } au;
  augment->add_option("--in", au.in, "Input TSDS file")->required();
  augment->add_option("--out", au.out, "Output TSDS file")->required();
  augment->add_option("--kind", au.kind, "Augmentation kind")
      ->check(CLI::IsMember({"hilbert_fixed", "hilbert_random_phase", "rotation", "permutation",
                             "circular_shift"}));
  augment->add_option("--seed", au.spec.seed, "Seed for the stochastic kinds");
  augment->add_option("--phi-lo", au.spec.phi_lo, "Random-phase lower bound (radians)");
  augment->add_option("--phi-hi", au.spec.phi_hi, "Random-phase upper bound (radians)");
  augment->add_option("--window", au.spec.window, "Permutation window (must divide T)");
  augment->add_option("--max-shift-frac", au.spec.max_shift_frac,
                      "Circular shift bound as a fraction of T");
  augment->add_flag("--merge", au.merge, "Write original + augmented instead of augmented only");

  // --- stft ------------------------------------------------------------------
  auto* stft_cmd = app.add_subcommand("stft", "Dump one sample's spectrogram as CSV");
  struct {
    std::string in, out;
    int sample = 0, seg_len = 4, nfft = 1024;
    bool positive_exponent = false;
  } st;
  stft_cmd->add_option("--in", st.in, "Input TSDS file")->required();
  stft_cmd->add_option("--out", st.out, "Output CSV file")->required();
  stft_cmd->add_option("--sample", st.sample, "Sample index");
  stft_cmd->add_option("--seg-len", st.seg_len, "Segment length (hop == seg-len)");
  stft_cmd->add_option("--nfft", st.nfft, "Transform length (power of two)");
  stft_cmd->add_flag("--positive-exponent", st.positive_exponent,
                     "Use the e^{+i...} kernel (conjugate spectrum)");

  // --- adf -------------------------------------------------------------------
  auto* adf = app.add_subcommand("adf", "Per-variate mean ADF statistic of a dataset");
  struct {
    std::string in, out;
    int lag = -1;
  } ad_args;
  adf->add_option("--in", ad_args.in, "Input TSDS file")->required();
  adf->add_option("--out", ad_args.out, "Output CSV file")->required();
  adf->add_option("--lag", ad_args.lag, "Lag order; -1 selects Schwert's rule");

  // --- shared train-ish flags --------------------------------------------------
  struct TrainFlags {
    std::string data, config, out;
    harness::TrainConfig tc;
    int nfft = 64, seg_len = 4;
  };
  auto add_train_flags = [](CLI::App* cmd, TrainFlags& tf, bool with_out = true) {
    cmd->add_option("--data", tf.data, "Input TSDS file")->required();
    cmd->add_option("--config", tf.config, "PhaserConfig JSON file (overrides --nfft/--seg-len)");
    if (with_out) cmd->add_option("--out", tf.out, "Output file")->required();
    cmd->add_option("--nfft", tf.nfft, "Transform length when no config file is given");
    cmd->add_option("--seg-len", tf.seg_len, "Segment length when no config file is given");
    cmd->add_option("--lr", tf.tc.learning_rate, "Adam learning rate");
    cmd->add_option("--epochs", tf.tc.max_epochs, "Maximum training epochs");
    cmd->add_option("--batch-size", tf.tc.batch_size, "Mini-batch size");
    cmd->add_option("--patience", tf.tc.patience, "Early-stopping patience (epochs)");
    cmd->add_option("--seed", tf.tc.seed, "Run seed");
  };

  // --- train -------------------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "Train a model on an augmented+merged dataset");
  TrainFlags tr;
  std::string tr_model_out, tr_variant = "full";
  add_train_flags(train_cmd, tr);
  train_cmd->add_option("--model-out", tr_model_out, "Output PHSW weights file")->required();
  train_cmd->add_option("--variant", tr_variant, "Architecture variant")
      ->check(CLI::IsMember({"full", "no_residual", "mag_only", "concat"}));

  // --- eval ----------------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a trained model on a dataset");
  struct {
    std::string data, config, model, out, split = "target", scenario = "eval";
    std::uint64_t seed = 2711;
    std::string variant = "full";
  } ev;
  eval_cmd->add_option("--data", ev.data, "Input TSDS file")->required();
  eval_cmd->add_option("--config", ev.config, "PhaserConfig JSON used at training time")
      ->required();
  eval_cmd->add_option("--model", ev.model, "PHSW weights file")->required();
  eval_cmd->add_option("--out", ev.out, "Output metrics CSV")->required();
  eval_cmd->add_option("--split", ev.split, "Split tag written into the CSV");
  eval_cmd->add_option("--scenario", ev.scenario, "Scenario tag written into the CSV");
  eval_cmd->add_option("--seed", ev.seed, "Seed tag written into the CSV");
  eval_cmd->add_option("--variant", ev.variant, "Architecture variant of the weights")
      ->check(CLI::IsMember({"full", "no_residual", "mag_only", "concat"}));

  // --- discrepancy ------------------------------------------------------------------
  auto* disc = app.add_subcommand("discrepancy",
                                  "Binary S-vs-HT(S) domain discrepancy accuracy");
  TrainFlags dc;
  add_train_flags(disc, dc);

  // --- semantic ----------------------------------------------------------------------
  auto* sem = app.add_subcommand("semantic",
                                 "Train on S, evaluate held-out S and HT(held-out S)");
  TrainFlags se;
  add_train_flags(sem, se);

  // --- divergence ---------------------------------------------------------------------
  auto* div = app.add_subcommand("divergence", "Pairwise beta-divergence bound over tracks");
  struct {
    std::string tracks, out, form = "bound";
    double q = 2.0;
  } dv;
  div->add_option("--tracks", dv.tracks, "Tracks JSON file")->required();
  div->add_option("--out", dv.out, "Output CSV")->required();
  div->add_option("--q", dv.q, "Renyi order q (> 0, != 1)");
  div->add_option("--form", dv.form, "Closed form for the divergence")
      ->check(CLI::IsMember({"bound", "standard"}));

  // --- bound -------------------------------------------------------------------------
  auto* bound = app.add_subcommand("bound", "Risk-bound report for an ensemble on a dataset");
  struct {
    std::string tracks, ensemble, data, out, form = "standard";
    double q = 2.0;
  } bd;
  bound->add_option("--tracks", bd.tracks, "Tracks JSON file for epsilon")->required();
  bound->add_option("--ensemble", bd.ensemble,
                    "Directory with config.json and one or more .phsw files")
      ->required();
  bound->add_option("--data", bd.data, "Dataset for the estimators (TSDS)")->required();
  bound->add_option("--out", bd.out, "Output CSV")->required();
  bound->add_option("--q", bd.q, "Renyi order q");
  bound->add_option("--form", bd.form, "Closed form for epsilon")
      ->check(CLI::IsMember({"bound", "standard"}));

  // --- ablate -------------------------------------------------------------------------
  auto* ablate_cmd = app.add_subcommand("ablate", "Variant x seed experiment grid");
  TrainFlags ab;
  std::string ab_variants = "full,no_aug";
  std::string ab_seeds = "2711,2712,2713";
  int ab_scenario = 1;
  int ab_jobs = 1;
  add_train_flags(ablate_cmd, ab);
  ablate_cmd->add_option("--scenario", ab_scenario, "Scenario index (1-based held-out domain)");
  ablate_cmd->add_option("--variants", ab_variants,
                         "Comma list of full,no_aug,no_residual,mag_only,concat");
  ablate_cmd->add_option("--seeds", ab_seeds, "Comma list of seeds");
  ablate_cmd->add_option("--jobs", ab_jobs, "Parallel runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage error
  }

  auto split_csv = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
  };

  if (synth->parsed()) {
    const LabeledDataset ds = harness::synth_generate(sy.spec);
    write_tsds(ds, sy.out);
    json cfg;
    cfg["domains"] = sy.spec.num_domains;
    cfg["classes"] = sy.spec.num_classes;
    cfg["variates"] = sy.spec.variates;
    cfg["timesteps"] = sy.spec.timesteps;
    cfg["samples_per_domain_class"] = sy.spec.samples_per_domain_class;
    cfg["sample_rate"] = sy.spec.sample_rate_hz;
    cfg["tone_amp"] = sy.spec.tone_amp;
    cfg["noise_sigma"] = sy.spec.noise_sigma;
    cfg["trend_amp"] = sy.spec.trend_amp;
    cfg["trend_domain_step"] = sy.spec.trend_domain_step;
    cfg["sigma_domain_step"] = sy.spec.sigma_domain_step;
    cfg["domain_phase_step"] = sy.spec.domain_phase_step;
    cfg["phase_jitter"] = sy.spec.phase_jitter;
    cfg["seed"] = sy.spec.seed;
    write_manifest(sy.out, "synth", cfg);
    std::cout << "wrote " << sy.out << " (" << ds.size() << " samples)\n";
    return 0;
  }

  if (augment->parsed()) {
    const LabeledDataset ds = read_tsds(au.in);
    au.spec.kind = augment_kind_from_string(au.kind);
    LabeledDataset result = apply_augment(ds, au.spec);
    if (au.merge) result = merge(ds, result);
    write_tsds(result, au.out);
    json cfg;
    cfg["kind"] = au.kind;
    cfg["seed"] = au.spec.seed;
    cfg["phi_lo"] = au.spec.phi_lo;
    cfg["phi_hi"] = au.spec.phi_hi;
    cfg["window"] = au.spec.window;
    cfg["max_shift_frac"] = au.spec.max_shift_frac;
    cfg["merge"] = au.merge;
    write_manifest(au.out, "augment", cfg);
    std::cout << "wrote " << au.out << " (" << result.size() << " samples)\n";
    return 0;
  }

  if (stft_cmd->parsed()) {
    const LabeledDataset ds = read_tsds(st.in);
    if (st.sample < 0 || static_cast<std::size_t>(st.sample) >= ds.size())
      throw DataError("stft: sample index out of range");
    const Spectrogram s =
        stft(ds.samples[static_cast<std::size_t>(st.sample)], st.seg_len, st.nfft,
             st.positive_exponent ? FourierSign::Positive : FourierSign::Negative);
    std::ostringstream text;
    write_spectrogram_csv(s, text);
    atomic_write_text(st.out, text.str());
    json cfg;
    cfg["sample"] = st.sample;
    cfg["seg_len"] = st.seg_len;
    cfg["nfft"] = st.nfft;
    cfg["positive_exponent"] = st.positive_exponent;
    write_manifest(st.out, "stft", cfg);
    std::cout << "wrote " << st.out << " (" << s.bins() << "x" << s.frames() << " per variate)\n";
    return 0;
  }

  if (adf->parsed()) {
    const LabeledDataset ds = read_tsds(ad_args.in);
    const Eigen::VectorXd summary = dataset_adf_summary(ds, ad_args.lag);
    std::ostringstream text;
    write_adf_summary_csv(summary, text);
    atomic_write_text(ad_args.out, text.str());
    json cfg;
    cfg["lag"] = ad_args.lag;
    write_manifest(ad_args.out, "adf", cfg);
    std::cout << "wrote " << ad_args.out << " (mean over variates "
              << summary.mean() << ")\n";
    return 0;
  }

  if (train_cmd->parsed()) {
    const LabeledDataset ds = read_tsds(tr.data);
    net::PhaserConfig cfg = resolve_net_config(tr.config, static_cast<int>(ds.variates()),
                                               static_cast<int>(ds.timesteps()), ds.num_classes,
                                               tr.nfft, tr.seg_len);
    cfg.seed = tr.tc.seed;
    const net::ArchMode arch = net::arch_mode_from_string(tr_variant);
    net::PhaserModel<float> model = net::build_model<float>(cfg, arch);
    const harness::EncodedDataset enc = harness::encode_dataset(ds, cfg);
    const harness::TrainResult res = harness::train(model, enc, tr.tc);
    net::save_model(model, tr_model_out);
    std::vector<harness::MetricsRow> rows;
    rows.push_back(
        harness::evaluate(model, enc.subset(res.val_indices), "train", tr.tc.seed, "val"));
    harness::write_metrics_csv(rows, cfg.num_classes, tr.out);
    atomic_write_text(tr_model_out + ".config.json", net::phaser_config_to_json(cfg));
    json m;
    m["net"] = net_config_json(cfg);
    m["train"] = train_config_json(tr.tc);
    m["variant"] = tr_variant;
    m["model_out"] = tr_model_out;
    write_manifest(tr.out, "train", m);
    std::cout << "wrote " << tr_model_out << " (best val loss " << res.best_val_loss << " at epoch "
              << res.best_epoch << ")\n";
    return 0;
  }

  if (eval_cmd->parsed()) {
    const LabeledDataset ds = read_tsds(ev.data);
    net::PhaserConfig cfg = net::load_phaser_config(ev.config);
    net::PhaserModel<float> model = net::load_model_with_config(
        cfg, net::arch_mode_from_string(ev.variant), ev.model);
    const harness::EncodedDataset enc = harness::encode_dataset(ds, cfg);
    const harness::MetricsRow row = harness::evaluate(model, enc, ev.scenario, ev.seed, ev.split);
    harness::write_metrics_csv({row}, cfg.num_classes, ev.out);
    json m;
    m["net"] = net_config_json(cfg);
    m["model"] = ev.model;
    m["variant"] = ev.variant;
    write_manifest(ev.out, "eval", m);
    std::cout << "wrote " << ev.out << " (accuracy " << row.accuracy << ")\n";
    return 0;
  }

  if (disc->parsed()) {
    const LabeledDataset ds = read_tsds(dc.data);
    const net::PhaserConfig cfg = resolve_net_config(dc.config, static_cast<int>(ds.variates()),
                                                     static_cast<int>(ds.timesteps()),
                                                     ds.num_classes, dc.nfft, dc.seg_len);
    const double acc = harness::discrepancy_test(ds, cfg, dc.tc);
    atomic_write_text(dc.out, "discrepancy_accuracy\n" + std::to_string(acc) + "\n");
    json m;
    m["net"] = net_config_json(cfg);
    m["train"] = train_config_json(dc.tc);
    write_manifest(dc.out, "discrepancy", m);
    std::cout << "wrote " << dc.out << " (accuracy " << acc << ")\n";
    return 0;
  }

  if (sem->parsed()) {
    const LabeledDataset ds = read_tsds(se.data);
    const net::PhaserConfig cfg = resolve_net_config(se.config, static_cast<int>(ds.variates()),
                                                     static_cast<int>(ds.timesteps()),
                                                     ds.num_classes, se.nfft, se.seg_len);
    const auto [acc_s, acc_aug] = harness::semantic_preservation_test(ds, cfg, se.tc);
    atomic_write_text(se.out, "acc_on_S,acc_on_augmented\n" + std::to_string(acc_s) + "," +
                                  std::to_string(acc_aug) + "\n");
    json m;
    m["net"] = net_config_json(cfg);
    m["train"] = train_config_json(se.tc);
    write_manifest(se.out, "semantic", m);
    std::cout << "wrote " << se.out << " (S " << acc_s << ", augmented " << acc_aug << ")\n";
    return 0;
  }

  if (div->parsed()) {
    const std::vector<GaussianTrack> tracks = load_tracks(dv.tracks);
    const RenyiForm form = dv.form == "standard" ? RenyiForm::Standard : RenyiForm::Bound;
    const EpsilonReport report = epsilon_bound(tracks, dv.q, form);
    std::ostringstream text;
    text << "epsilon,argmax_i,argmax_j,argmax_t,q,form\n";
    char line[160];
    std::snprintf(line, sizeof(line), "%.9g,%d,%d,%d,%.9g,%s\n", report.epsilon, report.i,
                  report.j, report.t, dv.q, dv.form.c_str());
    text << line;
    atomic_write_text(dv.out, text.str());
    json m;
    m["q"] = dv.q;
    m["form"] = dv.form;
    m["tracks"] = dv.tracks;
    write_manifest(dv.out, "divergence", m);
    std::cout << "wrote " << dv.out << " (epsilon " << report.epsilon << ")\n";
    return 0;
  }

  if (bound->parsed()) {
    const std::vector<GaussianTrack> tracks = load_tracks(bd.tracks);
    const RenyiForm form = bd.form == "standard" ? RenyiForm::Standard : RenyiForm::Bound;
    const EpsilonReport eps = epsilon_bound(tracks, bd.q, form);
    const LabeledDataset ds = read_tsds(bd.data);
    const net::PhaserConfig cfg = net::load_phaser_config(
        (std::filesystem::path(bd.ensemble) / "config.json").string());
    std::vector<std::string> weight_files;
    for (const auto& entry : std::filesystem::directory_iterator(bd.ensemble))
      if (entry.path().extension() == ".phsw") weight_files.push_back(entry.path().string());
    std::sort(weight_files.begin(), weight_files.end());
    if (weight_files.size() < 2)
      throw DataError("bound: ensemble needs at least 2 .phsw members in " + bd.ensemble);

    const harness::EncodedDataset enc = harness::encode_dataset(ds, cfg);
    Eigen::MatrixXi preds(static_cast<Eigen::Index>(weight_files.size()),
                          static_cast<Eigen::Index>(enc.size()));
    for (std::size_t i = 0; i < weight_files.size(); ++i) {
      net::PhaserModel<float> model =
          net::load_model_with_config(cfg, net::ArchMode::Full, weight_files[i]);
      preds.row(static_cast<Eigen::Index>(i)) = harness::predict(model, enc).transpose();
    }
    Eigen::VectorXi labels(static_cast<Eigen::Index>(enc.labels.size()));
    for (std::size_t i = 0; i < enc.labels.size(); ++i)
      labels[static_cast<Eigen::Index>(i)] = enc.labels[i];
    const BoundReport report = make_bound_report(preds, labels, eps.epsilon, bd.q);
    std::ostringstream text;
    write_bound_csv(report, text);
    atomic_write_text(bd.out, text.str());
    json m;
    m["q"] = bd.q;
    m["form"] = bd.form;
    m["ensemble"] = bd.ensemble;
    m["members"] = weight_files.size();
    m["net"] = net_config_json(cfg);
    write_manifest(bd.out, "bound", m);
    std::cout << "wrote " << bd.out << " (rhs " << report.rhs << ", risk "
              << report.empirical_risk << ", holds " << report.holds << ")\n";
    return 0;
  }

  if (ablate_cmd->parsed()) {
    const LabeledDataset ds = read_tsds(ab.data);
    const net::PhaserConfig cfg = resolve_net_config(ab.config, static_cast<int>(ds.variates()),
                                                     static_cast<int>(ds.timesteps()),
                                                     ds.num_classes, ab.nfft, ab.seg_len);
    std::vector<harness::Variant> variants;
    for (const auto& v : split_csv(ab_variants))
      variants.push_back(harness::variant_from_string(v));
    std::vector<std::uint64_t> seeds;
    for (const auto& s : split_csv(ab_seeds)) seeds.push_back(std::stoull(s));
    if (variants.empty() || seeds.empty())
      throw DataError("ablate: need at least one variant and one seed");
    const std::vector<harness::MetricsRow> rows =
        harness::ablate(ds, ab_scenario, variants, seeds, cfg, ab.tc, ab_jobs);
    harness::write_metrics_csv(rows, cfg.num_classes, ab.out);
    json m;
    m["net"] = net_config_json(cfg);
    m["train"] = train_config_json(ab.tc);
    m["scenario"] = ab_scenario;
    m["variants"] = ab_variants;
    m["seeds"] = ab_seeds;
    m["jobs"] = ab_jobs;
    write_manifest(ab.out, "ablate", m);
    std::cout << "wrote " << ab.out << " (" << rows.size() << " rows)\n";
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const phaser::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const phaser::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
