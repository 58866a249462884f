#include "phaser/dataset.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace phaser {

namespace {

constexpr char kMagic[4] = {'T', 'S', 'D', 'S'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint32_t kNoDomainOnDisk = 0xFFFFFFFFu;

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

class Reader {
 public:
  Reader(const std::string& buf, const std::string& path) : buf_(buf), path_(path) {}

  std::uint16_t u16() { return static_cast<std::uint16_t>(u_n(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(u_n(4)); }
  std::uint64_t u64() { return u_n(8); }

  float f32() {
    const std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }

  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  void raw(char* dst, std::size_t n) {
    if (pos_ + n > buf_.size())
      throw DataError(path_ + ": truncated payload");
    std::memcpy(dst, buf_.data() + pos_, n);
    pos_ += n;
  }

  bool at_end() const { return pos_ == buf_.size(); }

 private:
  std::uint64_t u_n(int n) {
    if (pos_ + static_cast<std::size_t>(n) > buf_.size())
      throw DataError(path_ + ": truncated payload");
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  const std::string& buf_;
  std::string path_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void atomic_write_bytes(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(path + ": cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError(path + ": write failed");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

bool LabeledDataset::has_domains() const {
  for (int d : domains)
    if (d != kNoDomain) return true;
  return false;
}

void LabeledDataset::validate() const {
  if (labels.size() != samples.size())
    throw DataError("dataset: labels/samples length mismatch");
  if (domains.size() != samples.size())
    throw DataError("dataset: domains/samples length mismatch");
  if (num_classes < 1) throw DataError("dataset: num_classes must be >= 1");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].validate();
    if (samples[i].variates() != variates() || samples[i].timesteps() != timesteps() ||
        samples[i].sample_rate_hz != sample_rate_hz())
      throw DataError("dataset: sample " + std::to_string(i) + " shape mismatch");
    if (labels[i] < 0 || labels[i] >= num_classes)
      throw DataError("dataset: label out of range at sample " + std::to_string(i));
  }
}

LabeledDataset LabeledDataset::empty_like() const {
  LabeledDataset out;
  out.num_classes = num_classes;
  out.name = name;
  return out;
}

void write_tsds(const LabeledDataset& ds, const std::string& path) {
  ds.validate();
  if (ds.samples.empty()) throw DataError("write_tsds: refusing to write an empty dataset");
  std::string out;
  out.append(kMagic, 4);
  put_u16(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(ds.variates()));
  put_u32(out, static_cast<std::uint32_t>(ds.timesteps()));
  put_u32(out, static_cast<std::uint32_t>(ds.num_classes));
  put_u64(out, ds.samples.size());
  put_f64(out, ds.sample_rate_hz());
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    put_u32(out, static_cast<std::uint32_t>(ds.labels[i]));
    put_u32(out, ds.domains[i] == kNoDomain ? kNoDomainOnDisk
                                            : static_cast<std::uint32_t>(ds.domains[i]));
    const Eigen::MatrixXd& m = ds.samples[i].values;
    for (Eigen::Index v = 0; v < m.rows(); ++v)
      for (Eigen::Index t = 0; t < m.cols(); ++t) put_f32(out, static_cast<float>(m(v, t)));
  }
  atomic_write_bytes(path, out);
}

LabeledDataset read_tsds(const std::string& path) {
  const std::string buf = read_file(path);
  if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0)
    throw DataError(path + ": bad magic");
  Reader r(buf, path);
  char magic[4];
  r.raw(magic, 4);
  const std::uint16_t version = r.u16();
  if (version != kVersion)
    throw DataError(path + ": unsupported version " + std::to_string(version));
  const std::uint32_t V = r.u32();
  const std::uint32_t T = r.u32();
  const std::uint32_t num_classes = r.u32();
  const std::uint64_t n_samples = r.u64();
  const double sample_rate = r.f64();
  if (V == 0 || T == 0) throw DataError(path + ": zero dimension in header");

  LabeledDataset ds;
  ds.num_classes = static_cast<int>(num_classes);
  ds.name = std::filesystem::path(path).stem().string();
  ds.samples.reserve(n_samples);
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    const std::uint32_t label = r.u32();
    if (label >= num_classes)
      throw DataError(path + ": label out of range at sample " + std::to_string(i));
    const std::uint32_t domain = r.u32();
    TimeSeries ts;
    ts.sample_rate_hz = sample_rate;
    ts.values.resize(V, T);
    for (std::uint32_t v = 0; v < V; ++v)
      for (std::uint32_t t = 0; t < T; ++t) ts.values(v, t) = static_cast<double>(r.f32());
    ds.samples.push_back(std::move(ts));
    ds.labels.push_back(static_cast<int>(label));
    ds.domains.push_back(domain == kNoDomainOnDisk ? kNoDomain : static_cast<int>(domain));
  }
  if (!r.at_end()) throw DataError(path + ": trailing bytes after payload");
  ds.validate();
  return ds;
}

LabeledDataset import_csv(const std::string& path, double sample_rate_hz, int num_classes) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open for reading");
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");

  // Header gives V and T: domain,label,v0_t0,...,v{V-1}_t{T-1}
  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
  }
  if (cols.size() < 3 || cols[0] != "domain" || cols[1] != "label")
    throw DataError(path + ": expected header domain,label,v0_t0,...");
  int V = 0, T = 0;
  for (std::size_t i = 2; i < cols.size(); ++i) {
    int v = -1, t = -1;
    if (std::sscanf(cols[i].c_str(), "v%d_t%d", &v, &t) != 2)
      throw DataError(path + ": bad payload column name '" + cols[i] + "'");
    V = std::max(V, v + 1);
    T = std::max(T, t + 1);
  }
  if (cols.size() != 2 + static_cast<std::size_t>(V) * static_cast<std::size_t>(T))
    throw DataError(path + ": header does not cover a full VxT grid");

  LabeledDataset ds;
  ds.name = std::filesystem::path(path).stem().string();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != cols.size())
      throw DataError(path + ": row " + std::to_string(line_no) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(cols.size()));
    TimeSeries ts;
    ts.sample_rate_hz = sample_rate_hz;
    ts.values.resize(V, T);
    const long domain = std::stol(cells[0]);
    const long label = std::stol(cells[1]);
    for (int v = 0; v < V; ++v)
      for (int t = 0; t < T; ++t) {
        // float32 precision on purpose, to match the TSDS payload exactly
        const float f = std::strtof(cells[2 + static_cast<std::size_t>(v) * T + t].c_str(), nullptr);
        ts.values(v, t) = static_cast<double>(f);
      }
    ds.samples.push_back(std::move(ts));
    ds.labels.push_back(static_cast<int>(label));
    ds.domains.push_back(domain < 0 ? kNoDomain : static_cast<int>(domain));
  }
  if (ds.samples.empty()) throw DataError(path + ": no data rows");
  int max_label = 0;
  for (int l : ds.labels) max_label = std::max(max_label, l);
  ds.num_classes = num_classes > 0 ? num_classes : max_label + 1;
  ds.validate();
  return ds;
}

void export_csv(const LabeledDataset& ds, const std::string& path) {
  ds.validate();
  const int V = static_cast<int>(ds.variates());
  const int T = static_cast<int>(ds.timesteps());
  std::string out = "domain,label";
  for (int v = 0; v < V; ++v)
    for (int t = 0; t < T; ++t)
      out += ",v" + std::to_string(v) + "_t" + std::to_string(t);
  out += "\n";
  char cell[48];
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out += std::to_string(ds.domains[i]);
    out += ",";
    out += std::to_string(ds.labels[i]);
    for (int v = 0; v < V; ++v)
      for (int t = 0; t < T; ++t) {
        // %.9g round-trips float32 exactly
        std::snprintf(cell, sizeof(cell), ",%.9g",
                      static_cast<double>(static_cast<float>(ds.samples[i].values(v, t))));
        out += cell;
      }
    out += "\n";
  }
  atomic_write_text(path, out);
}

void atomic_write_text(const std::string& path, const std::string& content) {
  atomic_write_bytes(path, content);
}

}  // namespace phaser
