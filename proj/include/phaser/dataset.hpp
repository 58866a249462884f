#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "phaser/signal.hpp"

namespace phaser {

inline constexpr int kNoDomain = -1;  // stored as 0xFFFFFFFF on disk

// Shape-homogeneous labeled samples with optional domain ids. Domain ids are
// split/bookkeeping metadata only; nothing on the training path reads them.
struct LabeledDataset {
  std::vector<TimeSeries> samples;
  std::vector<int> labels;
  std::vector<int> domains;  // same length as samples, kNoDomain where absent
  int num_classes = 0;
  std::string name;

  std::size_t size() const { return samples.size(); }
  Eigen::Index variates() const { return samples.empty() ? 0 : samples[0].variates(); }
  Eigen::Index timesteps() const { return samples.empty() ? 0 : samples[0].timesteps(); }
  double sample_rate_hz() const { return samples.empty() ? 1.0 : samples[0].sample_rate_hz; }
  bool has_domains() const;
  void validate() const;

  // Empty dataset with this one's shape metadata (merge identity element).
  LabeledDataset empty_like() const;
};

// TSDS container: magic "TSDS", u16 version, u32 V, u32 T, u32 num_classes,
// u64 num_samples, f64 sample_rate_hz, then per sample u32 label, u32
// domain_id, and V*T float32 variate-major payload. Little-endian.
void write_tsds(const LabeledDataset& ds, const std::string& path);
LabeledDataset read_tsds(const std::string& path);

// CSV with header domain,label,v0_t0,...,v{V-1}_t{T-1}. Payload cells are
// parsed at float32 precision so a CSV export of a TSDS file reads back to an
// identical in-memory dataset. num_classes <= 0 infers max(label)+1.
LabeledDataset import_csv(const std::string& path, double sample_rate_hz,
                          int num_classes = 0);
void export_csv(const LabeledDataset& ds, const std::string& path);

// Write-temp-then-rename text file write used by every artifact writer.
void atomic_write_text(const std::string& path, const std::string& content);

}  // namespace phaser
