#pragma once

#include <Eigen/Dense>

#include "phaser/dataset.hpp"

namespace phaser {

enum class AugmentKind {
  HilbertFixed,
  HilbertRandomPhase,
  Rotation,
  Permutation,
  CircularShift,
};

struct AugmentSpec {
  AugmentKind kind = AugmentKind::HilbertFixed;
  double phi_lo = -kPi / 2;  // random-phase range, subset of [-pi, pi]
  double phi_hi = kPi / 2;
  int window = 0;                // permutation window, must divide T
  double max_shift_frac = 0.2;   // circular shift bound, in (0, 1]
  std::uint64_t seed = 0;

  void validate(Eigen::Index variates, Eigen::Index timesteps) const;
};

AugmentKind augment_kind_from_string(const std::string& s);

// Replaces every variate of every sample by its Hilbert transform. Labels
// and domain ids are copied unchanged.
LabeledDataset hilbert_augment(const LabeledDataset& ds);

// y = cos(phi)*x - sin(phi)*HT(x) with one phi per sample, drawn from
// [phi_lo, phi_hi] and shared across that sample's variates.
LabeledDataset random_phase_augment(const LabeledDataset& ds, const AugmentSpec& spec);

// Rotation (V == 3, uniform over SO(3) via unit quaternions), window
// permutation (intra-window order preserved), or circular time shift.
LabeledDataset baseline_augment(const LabeledDataset& ds, const AugmentSpec& spec);

LabeledDataset apply_augment(const LabeledDataset& ds, const AugmentSpec& spec);

// S' = S u S_hat: plain concatenation, no provenance marker.
LabeledDataset merge(const LabeledDataset& original, const LabeledDataset& augmented);

// Building blocks, exposed so tests can pin the degenerate cases.
Eigen::Matrix3d rotation_from_quaternion(double w, double x, double y, double z);
Eigen::Matrix3d sample_rotation(Rng& rng);
Eigen::RowVectorXd circular_shift_series(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                         Eigen::Index shift);
LabeledDataset apply_rotation(const LabeledDataset& ds, const Eigen::Matrix3d& rot);

}  // namespace phaser
