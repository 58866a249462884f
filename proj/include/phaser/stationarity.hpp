#pragma once

#include <Eigen/Dense>

#include "phaser/dataset.hpp"

namespace phaser {

// Asymptotic 5% critical value of the Dickey-Fuller distribution for the
// constant-only regression.
inline constexpr double kAdfCritical5pct = -2.86;

struct AdfResult {
  double statistic = 0.0;  // gamma_hat / SE(gamma_hat)
  int lag_order = 0;
  int n_obs = 0;
  bool reject_at_5pct = false;
};

// Schwert's lag rule: floor(12 * (n/100)^(1/4)), n the series length.
int schwert_lag(int n);

// Augmented Dickey-Fuller t-statistic from the OLS fit of
//   dy_t = alpha + gamma*y_{t-1} + sum_i delta_i*dy_{t-i} + e_t
// (constant term, no trend). lag_order < 0 selects Schwert's rule.
// The solve goes through column-pivoted QR; rank deficiency is an error.
AdfResult adf_statistic(const Eigen::Ref<const Eigen::VectorXd>& x, int lag_order = -1);

// Mean statistic per variate over all samples. A failing sample raises with
// its index attached.
Eigen::VectorXd dataset_adf_summary(const LabeledDataset& ds, int lag_order = -1);

void write_adf_summary_csv(const Eigen::VectorXd& summary, std::ostream& out);

}  // namespace phaser
