#include "phaser/stationarity.hpp"

#include <cmath>

namespace phaser {

int schwert_lag(int n) {
  return static_cast<int>(std::floor(12.0 * std::pow(n / 100.0, 0.25)));
}

AdfResult adf_statistic(const Eigen::Ref<const Eigen::VectorXd>& x, int lag_order) {
  const int T = static_cast<int>(x.size());
  if (T < 20) throw DataError("adf_statistic: need length >= 20, got " + std::to_string(T));
  if (!x.allFinite()) throw NumericError("adf_statistic: non-finite input");
  const double mean = x.mean();
  if ((x.array() - mean).abs().maxCoeff() == 0.0)
    throw NumericError("adf_statistic: constant series (zero variance)");

  const int p = lag_order >= 0 ? lag_order : schwert_lag(T);
  const int n_obs = T - p - 1;
  const int k = p + 2;  // constant, level, p lagged differences
  if (n_obs <= k)
    throw DataError("adf_statistic: insufficient length after lagging (n_obs=" +
                    std::to_string(n_obs) + ", regressors=" + std::to_string(k) + ")");

  Eigen::VectorXd y(n_obs);
  Eigen::MatrixXd X(n_obs, k);
  for (int r = 0; r < n_obs; ++r) {
    const int t = p + 1 + r;
    y[r] = x[t] - x[t - 1];
    X(r, 0) = 1.0;
    X(r, 1) = x[t - 1];
    for (int i = 1; i <= p; ++i) X(r, 1 + i) = x[t - i] - x[t - i - 1];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < k)
    throw NumericError("adf_statistic: rank-deficient design matrix (rank " +
                       std::to_string(qr.rank()) + " of " + std::to_string(k) + ")");
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd resid = y - X * beta;
  const double s2 = resid.squaredNorm() / static_cast<double>(n_obs - k);

  // (X'X)^-1 = P R^-1 R^-T P' from the pivoted QR factors.
  const Eigen::MatrixXd R = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd xtx_inv =
      qr.colsPermutation() * (Rinv * Rinv.transpose()) * qr.colsPermutation().transpose();

  const double se = std::sqrt(s2 * xtx_inv(1, 1));
  if (!(se > 0.0) || !std::isfinite(se))
    throw NumericError("adf_statistic: degenerate standard error");

  AdfResult res;
  res.statistic = beta[1] / se;
  res.lag_order = p;
  res.n_obs = n_obs;
  res.reject_at_5pct = res.statistic < kAdfCritical5pct;
  return res;
}

Eigen::VectorXd dataset_adf_summary(const LabeledDataset& ds, int lag_order) {
  ds.validate();
  if (ds.samples.empty()) throw DataError("dataset_adf_summary: empty dataset");
  const Eigen::Index V = ds.variates();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(V);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (Eigen::Index v = 0; v < V; ++v) {
      try {
        acc[v] += adf_statistic(ds.samples[i].values.row(v).transpose(), lag_order).statistic;
      } catch (const std::exception& e) {
        throw NumericError("dataset_adf_summary: sample " + std::to_string(i) + ", variate " +
                           std::to_string(v) + ": " + e.what());
      }
    }
  }
  return acc / static_cast<double>(ds.size());
}

void write_adf_summary_csv(const Eigen::VectorXd& summary, std::ostream& out) {
  out << "variate,mean_statistic\n";
  char line[64];
  for (Eigen::Index v = 0; v < summary.size(); ++v) {
    std::snprintf(line, sizeof(line), "%lld,%.9g\n", static_cast<long long>(v), summary[v]);
    out << line;
  }
}

}  // namespace phaser
