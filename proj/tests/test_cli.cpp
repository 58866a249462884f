#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "phaser/harness.hpp"
#include "phaser/stationarity.hpp"

using namespace phaser;
namespace fs = std::filesystem;

namespace {

const std::string kCli = PHASER_CLI_PATH;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / "phaser_cli_test";
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

harness::SynthSpec tiny_spec() {
  harness::SynthSpec spec;
  spec.variates = 2;
  spec.timesteps = 32;
  spec.num_classes = 2;
  spec.num_domains = 2;
  spec.samples_per_domain_class = 8;
  spec.class_bins = {4, 10};
  spec.tone_amp = 2.0;
  spec.noise_sigma = 0.25;
  spec.seed = 2711;
  return spec;
}

}  // namespace

TEST_CASE("help exits 0 and bad usage exits 1") {
  CHECK(run("--help") == 0);
  CHECK(run("synth --help") == 0);
  CHECK(run("") == 1);
  CHECK(run("frobnicate") == 1);
  CHECK(run("synth --out /tmp/x.tsds --no-such-flag 3") == 1);
  CHECK(run("synth") == 1);  // missing required --out
  CHECK(run("augment --in /tmp/a --out /tmp/b --kind bogus") == 1);
  CHECK(run("divergence --tracks /tmp/t --out /tmp/d --form neither") == 1);
}

TEST_CASE("synth produces a readable dataset with a manifest") {
  TempDir tmp;
  const std::string out = tmp / "ds.tsds";
  CHECK(run("synth --out " + out + " --domains 4 --classes 3 --variates 2 --timesteps 32 "
            "--samples-per-domain-class 4 --seed 2711") == 0);
  const LabeledDataset ds = read_tsds(out);
  CHECK(ds.size() == 4 * 3 * 4);
  CHECK(ds.num_classes == 3);
  CHECK(ds.variates() == 2);
  CHECK(fs::exists(out + ".manifest.json"));
  const std::string manifest = file_bytes(out + ".manifest.json");
  CHECK(manifest.find("\"subcommand\": \"synth\"") != std::string::npos);
  CHECK(manifest.find("\"seed\": 2711") != std::string::npos);
}

TEST_CASE("cli augment output equals the direct library call byte for byte") {
  TempDir tmp;
  const std::string in = tmp / "in.tsds";
  const LabeledDataset ds = harness::synth_generate(tiny_spec());
  write_tsds(ds, in);

  const std::string via_cli = tmp / "aug_cli.tsds";
  CHECK(run("augment --in " + in + " --out " + via_cli + " --kind hilbert_fixed") == 0);
  const std::string via_lib = tmp / "aug_lib.tsds";
  write_tsds(hilbert_augment(read_tsds(in)), via_lib);
  CHECK(file_bytes(via_cli) == file_bytes(via_lib));

  const std::string merged = tmp / "merged.tsds";
  CHECK(run("augment --in " + in + " --out " + merged + " --kind hilbert_fixed --merge") == 0);
  CHECK(read_tsds(merged).size() == 2 * ds.size());
}

TEST_CASE("corrupted dataset input exits 2") {
  TempDir tmp;
  const std::string bad = tmp / "bad.tsds";
  atomic_write_text(bad, "this is not a dataset");
  CHECK(run("adf --in " + bad + " --out " + (tmp / "x.csv")) == 2);
  CHECK(run("augment --in " + (tmp / "missing.tsds") + " --out " + (tmp / "y.tsds")) == 2);
}

TEST_CASE("degenerate numeric input exits 3") {
  TempDir tmp;
  LabeledDataset ds;
  ds.num_classes = 2;
  TimeSeries ts;
  ts.values = Eigen::MatrixXd::Constant(1, 64, 1.0);  // constant series
  ds.samples.push_back(ts);
  ds.labels.push_back(0);
  ds.domains.push_back(kNoDomain);
  const std::string in = tmp / "const.tsds";
  write_tsds(ds, in);
  CHECK(run("adf --in " + in + " --out " + (tmp / "adf.csv")) == 3);
}

TEST_CASE("adf csv matches the library summary") {
  TempDir tmp;
  const std::string in = tmp / "ds.tsds";
  harness::SynthSpec spec = tiny_spec();
  spec.timesteps = 64;
  const LabeledDataset ds = harness::synth_generate(spec);
  write_tsds(ds, in);
  const std::string out = tmp / "adf.csv";
  CHECK(run("adf --in " + in + " --out " + out) == 0);
  std::ostringstream expect;
  write_adf_summary_csv(dataset_adf_summary(read_tsds(in), -1), expect);
  CHECK(file_bytes(out) == expect.str());
}

TEST_CASE("stft dump is valid csv with the configured grid") {
  TempDir tmp;
  const std::string in = tmp / "ds.tsds";
  write_tsds(harness::synth_generate(tiny_spec()), in);
  const std::string out = tmp / "spec.csv";
  CHECK(run("stft --in " + in + " --out " + out + " --sample 1 --seg-len 4 --nfft 32") == 0);
  const std::string text = file_bytes(out);
  CHECK(text.rfind("variate,bin,frame,re,im\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 2 * 17 * 8);
  CHECK(run("stft --in " + in + " --out " + out + " --sample 999") == 2);
}

TEST_CASE("train then eval round trip through model and config files") {
  TempDir tmp;
  const std::string data = tmp / "ds.tsds";
  write_tsds(harness::synth_generate(tiny_spec()), data);
  const std::string model = tmp / "model.phsw";
  const std::string metrics = tmp / "train_metrics.csv";
  CHECK(run("train --data " + data + " --model-out " + model + " --out " + metrics +
            " --nfft 32 --seg-len 4 --epochs 5 --seed 2711") == 0);
  CHECK(fs::exists(model));
  CHECK(fs::exists(model + ".config.json"));
  const std::string eval_out = tmp / "eval_metrics.csv";
  CHECK(run("eval --data " + data + " --config " + model + ".config.json --model " + model +
            " --out " + eval_out + " --split target --scenario t") == 0);
  const std::string text = file_bytes(eval_out);
  CHECK(text.rfind("scenario,seed,split,accuracy,loss", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
}

TEST_CASE("ablate writes variants x seeds x splits rows and is byte deterministic") {
  TempDir tmp;
  const std::string data = tmp / "ds.tsds";
  write_tsds(harness::synth_generate(tiny_spec()), data);
  const std::string out1 = tmp / "m1.csv";
  const std::string out2 = tmp / "m2.csv";
  const std::string flags = "ablate --data " + data +
                            " --scenario 1 --variants full,no_aug --seeds 2711,2712 "
                            "--nfft 32 --seg-len 4 --epochs 3 --out ";
  CHECK(run(flags + out1) == 0);
  CHECK(run(flags + out2) == 0);
  const std::string text = file_bytes(out1);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 2 * 2 * 2);
  CHECK(text == file_bytes(out2));
  CHECK(text.find("1:full") != std::string::npos);
  CHECK(text.find("1:no_aug") != std::string::npos);
}

TEST_CASE("discrepancy and semantic subcommands emit their summaries") {
  TempDir tmp;
  const std::string data = tmp / "ds.tsds";
  write_tsds(harness::synth_generate(tiny_spec()), data);
  const std::string disc = tmp / "disc.csv";
  CHECK(run("discrepancy --data " + data + " --nfft 32 --seg-len 4 --epochs 4 --out " + disc) ==
        0);
  CHECK(file_bytes(disc).rfind("discrepancy_accuracy\n", 0) == 0);
  const std::string sem = tmp / "sem.csv";
  CHECK(run("semantic --data " + data + " --nfft 32 --seg-len 4 --epochs 4 --out " + sem) == 0);
  CHECK(file_bytes(sem).rfind("acc_on_S,acc_on_augmented\n", 0) == 0);
}

TEST_CASE("divergence and bound subcommands agree with the library") {
  TempDir tmp;
  const std::string tracks = tmp / "tracks.json";
  atomic_write_text(tracks,
                    "{\"tracks\": ["
                    "{\"mu\": [0.0, 0.1], \"sigma\": [1.0, 1.05]},"
                    "{\"mu\": [0.4, 0.5], \"sigma\": [1.1, 1.0]}]}\n");

  const std::string div_out = tmp / "div.csv";
  CHECK(run("divergence --tracks " + tracks + " --q 2 --form standard --out " + div_out) == 0);
  {
    GaussianTrack a, b;
    a.mu = Eigen::Vector2d(0.0, 0.1);
    a.sigma = Eigen::Vector2d(1.0, 1.05);
    b.mu = Eigen::Vector2d(0.4, 0.5);
    b.sigma = Eigen::Vector2d(1.1, 1.0);
    const EpsilonReport expect = epsilon_bound({a, b}, 2.0, RenyiForm::Standard);
    std::ostringstream line;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g,", expect.epsilon);
    CHECK(file_bytes(div_out).find(std::string("\n") + buf) != std::string::npos);
  }

  // Ensemble: two quick models trained at different seeds.
  const std::string data = tmp / "ds.tsds";
  const LabeledDataset ds = harness::synth_generate(tiny_spec());
  write_tsds(ds, data);
  const fs::path ens = tmp.path / "models";
  fs::create_directories(ens);
  net::PhaserConfig cfg;
  cfg.V = 2;
  cfg.nfft = 32;
  cfg.seg_len = 4;
  cfg.num_classes = 2;
  atomic_write_text((ens / "config.json").string(), net::phaser_config_to_json(cfg));
  const harness::EncodedDataset enc = harness::encode_dataset(ds, cfg);
  for (std::uint64_t seed : {2711ull, 2712ull}) {
    net::PhaserConfig c = cfg;
    c.seed = seed;
    net::PhaserModel<float> model = net::build_model<float>(c);
    harness::TrainConfig tc;
    tc.max_epochs = 3;
    tc.seed = seed;
    harness::train(model, enc, tc);
    net::save_model(model, (ens / ("m" + std::to_string(seed) + ".phsw")).string());
  }
  const std::string bound_out = tmp / "bound.csv";
  CHECK(run("bound --tracks " + tracks + " --ensemble " + ens.string() + " --data " + data +
            " --q 2 --out " + bound_out) == 0);
  const std::string text = file_bytes(bound_out);
  CHECK(text.rfind("d_hat,e_hat,epsilon,q,rhs,empirical_risk,holds\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);

  // Cross-check against the module-level call with identical inputs.
  Eigen::MatrixXi preds(2, static_cast<Eigen::Index>(enc.size()));
  int row = 0;
  std::vector<std::string> weight_files;
  for (const auto& entry : fs::directory_iterator(ens))
    if (entry.path().extension() == ".phsw") weight_files.push_back(entry.path().string());
  std::sort(weight_files.begin(), weight_files.end());
  for (const auto& wf : weight_files) {
    net::PhaserModel<float> model = net::load_model_with_config(cfg, net::ArchMode::Full, wf);
    preds.row(row++) = harness::predict(model, enc).transpose();
  }
  Eigen::VectorXi labels(static_cast<Eigen::Index>(enc.labels.size()));
  for (std::size_t i = 0; i < enc.labels.size(); ++i)
    labels[static_cast<Eigen::Index>(i)] = enc.labels[i];
  GaussianTrack a, b;
  a.mu = Eigen::Vector2d(0.0, 0.1);
  a.sigma = Eigen::Vector2d(1.0, 1.05);
  b.mu = Eigen::Vector2d(0.4, 0.5);
  b.sigma = Eigen::Vector2d(1.1, 1.0);
  const BoundReport expect =
      make_bound_report(preds, labels, epsilon_bound({a, b}, 2.0, RenyiForm::Standard).epsilon,
                        2.0);
  std::ostringstream expect_text;
  write_bound_csv(expect, expect_text);
  CHECK(text == expect_text.str());
}
