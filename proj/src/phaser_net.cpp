#include "phaser/phaser_net.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace phaser::net {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

void PhaserConfig::validate() const {
  if (V < 1) throw DataError("config: V must be >= 1");
  if (c < 1) throw DataError("config: c must be >= 1");
  if (B < 1) throw DataError("config: B must be >= 1");
  if (num_classes < 2) throw DataError("config: num_classes must be >= 2");
  if (!power_of_two(nfft)) throw DataError("config: nfft must be a power of two");
  if (seg_len < 2) throw DataError("config: seg_len must be >= 2");
  if (nfft < seg_len) throw DataError("config: nfft must be >= seg_len");
  if (!(eps_norm > 0.0)) throw DataError("config: eps_norm must be positive");
  if (bins() < B) throw DataError("config: nfft/2+1 bins must be >= B groups");
}

PhaserConfig parse_phaser_config_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError("config: top-level JSON must be an object");
  PhaserConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "V")
      cfg.V = value.get<int>();
    else if (key == "c")
      cfg.c = value.get<int>();
    else if (key == "B")
      cfg.B = value.get<int>();
    else if (key == "nfft")
      cfg.nfft = value.get<int>();
    else if (key == "seg_len")
      cfg.seg_len = value.get<int>();
    else if (key == "num_classes")
      cfg.num_classes = value.get<int>();
    else if (key == "eps_norm")
      cfg.eps_norm = value.get<double>();
    else if (key == "seed")
      cfg.seed = value.get<std::uint64_t>();
    else if (key == "random_window")
      cfg.random_window = value.get<bool>();
    else
      throw DataError("config: unknown field '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

PhaserConfig load_phaser_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_phaser_config_json(ss.str());
}

std::string phaser_config_to_json(const PhaserConfig& cfg) {
  nlohmann::json j;
  j["V"] = cfg.V;
  j["c"] = cfg.c;
  j["B"] = cfg.B;
  j["nfft"] = cfg.nfft;
  j["seg_len"] = cfg.seg_len;
  j["num_classes"] = cfg.num_classes;
  j["eps_norm"] = cfg.eps_norm;
  j["seed"] = cfg.seed;
  j["random_window"] = cfg.random_window;
  return j.dump(2) + "\n";
}

ArchMode arch_mode_from_string(const std::string& s) {
  if (s == "full") return ArchMode::Full;
  if (s == "no_residual") return ArchMode::NoResidual;
  if (s == "mag_only") return ArchMode::MagOnly;
  if (s == "concat") return ArchMode::Concat;
  throw DataError("unknown architecture variant '" + s + "'");
}

std::string arch_mode_to_string(ArchMode m) {
  switch (m) {
    case ArchMode::Full:
      return "full";
    case ArchMode::NoResidual:
      return "no_residual";
    case ArchMode::MagOnly:
      return "mag_only";
    case ArchMode::Concat:
      return "concat";
  }
  return "full";
}

void save_model(PhaserModel<float>& model, const std::string& path) {
  write_phsw(model.state_dict(), path);
}

PhaserModel<float> load_model_with_config(const PhaserConfig& cfg, ArchMode arch,
                                          const std::string& weights_path) {
  PhaserModel<float> m = build_model<float>(cfg, arch);
  m.load_state(read_phsw(weights_path));
  return m;
}

PhaserModel<float> load_model(const std::string& config_path, const std::string& weights_path) {
  return load_model_with_config(load_phaser_config(config_path), ArchMode::Full, weights_path);
}

}  // namespace phaser::net
