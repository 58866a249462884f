#include "phaser/augment.hpp"

#include <cmath>

namespace phaser {

namespace {

LabeledDataset clone_meta(const LabeledDataset& ds) {
  LabeledDataset out;
  out.labels = ds.labels;
  out.domains = ds.domains;
  out.num_classes = ds.num_classes;
  out.name = ds.name;
  out.samples.reserve(ds.size());
  return out;
}

}  // namespace

void AugmentSpec::validate(Eigen::Index variates, Eigen::Index timesteps) const {
  switch (kind) {
    case AugmentKind::HilbertFixed:
      break;
    case AugmentKind::HilbertRandomPhase:
      if (phi_lo > phi_hi) throw DataError("augment: empty phi range");
      if (phi_lo < -kPi || phi_hi > kPi)
        throw DataError("augment: phi range must lie within [-pi, pi]");
      break;
    case AugmentKind::Rotation:
      if (variates != 3)
        throw DataError("augment: rotation requires V == 3 (axis triplet), got V=" +
                        std::to_string(variates));
      break;
    case AugmentKind::Permutation:
      if (window < 1 || timesteps % window != 0)
        throw DataError("augment: permutation window must divide T (window=" +
                        std::to_string(window) + ", T=" + std::to_string(timesteps) + ")");
      break;
    case AugmentKind::CircularShift:
      if (!(max_shift_frac > 0.0) || max_shift_frac > 1.0)
        throw DataError("augment: max_shift_frac must be in (0, 1]");
      break;
  }
}

AugmentKind augment_kind_from_string(const std::string& s) {
  if (s == "hilbert_fixed") return AugmentKind::HilbertFixed;
  if (s == "hilbert_random_phase") return AugmentKind::HilbertRandomPhase;
  if (s == "rotation") return AugmentKind::Rotation;
  if (s == "permutation") return AugmentKind::Permutation;
  if (s == "circular_shift") return AugmentKind::CircularShift;
  throw DataError("augment: unknown kind '" + s + "'");
}

LabeledDataset hilbert_augment(const LabeledDataset& ds) {
  ds.validate();
  LabeledDataset out = clone_meta(ds);
  for (const TimeSeries& ts : ds.samples) {
    TimeSeries t2;
    t2.sample_rate_hz = ts.sample_rate_hz;
    t2.values.resizeLike(ts.values);
    for (Eigen::Index v = 0; v < ts.variates(); ++v)
      t2.values.row(v) = hilbert(ts.values.row(v).transpose()).transpose();
    out.samples.push_back(std::move(t2));
  }
  return out;
}

LabeledDataset random_phase_augment(const LabeledDataset& ds, const AugmentSpec& spec) {
  ds.validate();
  if (spec.kind != AugmentKind::HilbertRandomPhase)
    throw DataError("random_phase_augment: spec kind mismatch");
  spec.validate(ds.variates(), ds.timesteps());
  LabeledDataset out = clone_meta(ds);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    Rng rng(derive_seed(spec.seed, i));
    const double phi = rng.uniform(spec.phi_lo, spec.phi_hi);
    const double a = std::cos(phi);
    const double b = std::sin(phi);
    const TimeSeries& ts = ds.samples[i];
    TimeSeries t2;
    t2.sample_rate_hz = ts.sample_rate_hz;
    t2.values.resizeLike(ts.values);
    for (Eigen::Index v = 0; v < ts.variates(); ++v) {
      const Eigen::VectorXd ht = hilbert(ts.values.row(v).transpose());
      t2.values.row(v) = a * ts.values.row(v) - b * ht.transpose();
    }
    out.samples.push_back(std::move(t2));
  }
  return out;
}

Eigen::Matrix3d rotation_from_quaternion(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(n > 0.0)) throw NumericError("rotation_from_quaternion: zero quaternion");
  w /= n;
  x /= n;
  y /= n;
  z /= n;
  Eigen::Matrix3d r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

Eigen::Matrix3d sample_rotation(Rng& rng) {
  // Normalized 4D Gaussian is uniform on the quaternion sphere.
  const double w = rng.normal();
  const double x = rng.normal();
  const double y = rng.normal();
  const double z = rng.normal();
  return rotation_from_quaternion(w, x, y, z);
}

Eigen::RowVectorXd circular_shift_series(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                         Eigen::Index shift) {
  const Eigen::Index T = x.size();
  Eigen::RowVectorXd out(T);
  const Eigen::Index s = ((shift % T) + T) % T;
  for (Eigen::Index t = 0; t < T; ++t) out[t] = x[(t - s + T) % T];
  return out;
}

LabeledDataset apply_rotation(const LabeledDataset& ds, const Eigen::Matrix3d& rot) {
  LabeledDataset out = clone_meta(ds);
  for (const TimeSeries& ts : ds.samples) {
    TimeSeries t2;
    t2.sample_rate_hz = ts.sample_rate_hz;
    t2.values = rot * ts.values;
    out.samples.push_back(std::move(t2));
  }
  return out;
}

LabeledDataset baseline_augment(const LabeledDataset& ds, const AugmentSpec& spec) {
  ds.validate();
  spec.validate(ds.variates(), ds.timesteps());
  LabeledDataset out = clone_meta(ds);
  const Eigen::Index T = ds.timesteps();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    Rng rng(derive_seed(spec.seed, i));
    const TimeSeries& ts = ds.samples[i];
    TimeSeries t2;
    t2.sample_rate_hz = ts.sample_rate_hz;
    switch (spec.kind) {
      case AugmentKind::Rotation:
        t2.values = sample_rotation(rng) * ts.values;
        break;
      case AugmentKind::Permutation: {
        const Eigen::Index n_windows = T / spec.window;
        std::vector<Eigen::Index> order(static_cast<std::size_t>(n_windows));
        for (Eigen::Index w = 0; w < n_windows; ++w) order[static_cast<std::size_t>(w)] = w;
        for (Eigen::Index w = n_windows - 1; w > 0; --w)
          std::swap(order[static_cast<std::size_t>(w)],
                    order[rng.uniform_int(static_cast<std::uint64_t>(w + 1))]);
        t2.values.resizeLike(ts.values);
        for (Eigen::Index w = 0; w < n_windows; ++w)
          t2.values.middleCols(w * spec.window, spec.window) =
              ts.values.middleCols(order[static_cast<std::size_t>(w)] * spec.window, spec.window);
        break;
      }
      case AugmentKind::CircularShift: {
        const auto max_shift =
            static_cast<std::uint64_t>(std::floor(spec.max_shift_frac * static_cast<double>(T)));
        const auto s = static_cast<Eigen::Index>(rng.uniform_int(max_shift + 1));
        t2.values.resizeLike(ts.values);
        for (Eigen::Index v = 0; v < ts.variates(); ++v)
          t2.values.row(v) = circular_shift_series(ts.values.row(v), s);
        break;
      }
      default:
        throw DataError("baseline_augment: spec kind is not a baseline augmentation");
    }
    out.samples.push_back(std::move(t2));
  }
  return out;
}

LabeledDataset apply_augment(const LabeledDataset& ds, const AugmentSpec& spec) {
  switch (spec.kind) {
    case AugmentKind::HilbertFixed:
      return hilbert_augment(ds);
    case AugmentKind::HilbertRandomPhase:
      return random_phase_augment(ds, spec);
    default:
      return baseline_augment(ds, spec);
  }
}

LabeledDataset merge(const LabeledDataset& original, const LabeledDataset& augmented) {
  if (original.num_classes != augmented.num_classes)
    throw DataError("merge: class-count mismatch");
  if (!original.samples.empty() && !augmented.samples.empty()) {
    if (original.variates() != augmented.variates() ||
        original.timesteps() != augmented.timesteps() ||
        original.sample_rate_hz() != augmented.sample_rate_hz())
      throw DataError("merge: shape mismatch between datasets");
  }
  LabeledDataset out;
  out.num_classes = original.num_classes;
  out.name = original.name;
  out.samples = original.samples;
  out.samples.insert(out.samples.end(), augmented.samples.begin(), augmented.samples.end());
  out.labels = original.labels;
  out.labels.insert(out.labels.end(), augmented.labels.begin(), augmented.labels.end());
  out.domains = original.domains;
  out.domains.insert(out.domains.end(), augmented.domains.begin(), augmented.domains.end());
  return out;
}

}  // namespace phaser
