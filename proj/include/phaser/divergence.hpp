#pragma once

#include <Eigen/Dense>
#include <functional>
#include <ostream>
#include <vector>

#include "phaser/common.hpp"

namespace phaser {

// Per-timestep Gaussian domain: mu_t with sigma_t > 0.
struct GaussianTrack {
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma;

  Eigen::Index length() const { return mu.size(); }
  void validate() const;
};

struct MixtureSpec {
  Eigen::VectorXd weights;  // on the simplex within 1e-12
  std::vector<GaussianTrack> tracks;

  void validate() const;
};

// Two closed forms for the Renyi divergence between Gaussians. Bound is the
// per-timestep expression the epsilon-bound evaluator conforms to:
//   q*(mu_j-mu_i)^2 / (2(1-q)si^2 + 2sj^2) + ln(sqrt((1-q)si^2+sj^2)
//     / (si^(1-q) sj^q)) / (1-q).
// Its second variance enters unweighted, so it is nonzero for identical
// Gaussians away from q->1 and has a smaller validity region. Standard is
// the usual closed form with variance mixture (1-q)si^2 + q*sj^2; it
// vanishes for identical Gaussians and serves as the independent oracle.
// The two disagree by construction; reports surface the difference instead
// of correcting either side.
enum class RenyiForm { Bound, Standard };

double renyi_gaussian_bound(double mu_i, double sigma_i, double mu_j, double sigma_j, double q);
double renyi_gaussian_standard(double mu_i, double sigma_i, double mu_j, double sigma_j, double q);

struct QuadratureGrid {
  double lo = 0.0;
  double hi = 0.0;
  int points = 20001;
};

// Default grid for Gaussian-like densities: [min mu - 8*sigma_max,
// max mu + 8*sigma_max] with 20001 trapezoid points.
QuadratureGrid default_grid(const std::vector<GaussianTrack>& tracks, int points = 20001);

// (1/(q-1)) * ln integral p^q * r^(1-q) via trapezoid quadrature. Each
// density must carry at least 1 - 1e-10 of its mass on the grid.
double renyi_numeric(const std::function<double(double)>& p_density,
                     const std::function<double(double)>& q_density, double q,
                     const QuadratureGrid& grid);

// beta_q = 2^(((q-1)/q) * rd)
double beta_divergence(double rd, double q);

double gaussian_pdf(double x, double mu, double sigma);
double mixture_pdf(double x, const Eigen::VectorXd& weights,
                   const std::vector<GaussianTrack>& tracks, Eigen::Index t);

struct EpsilonReport {
  double epsilon = 0.0;
  int i = 0, j = 0, t = 0;  // argmax ordered pair and timestep
};

// Max over ordered track pairs and timesteps of beta(renyi(..., q)). Domain
// violations of the chosen form propagate with their (i, j, t) location.
EpsilonReport epsilon_bound(const std::vector<GaussianTrack>& tracks, double q,
                            RenyiForm form = RenyiForm::Bound);

// Exhaustive simplex-grid search for the mixture of `sources` closest to
// `target` in time-averaged quadrature Renyi divergence. grid_resolution is
// the number of grid points per simplex edge (>= 11).
MixtureSpec closest_mixture(const GaussianTrack& target, const std::vector<GaussianTrack>& sources,
                            double q, int grid_resolution, int quad_points = 20001);

// Ensemble estimators over prediction matrices (members x samples).
// d_hat: mean over samples and unordered member pairs of I[h != h'];
// e_hat: mean of I[h != y] * I[h' != y].
double expected_disagreement(const Eigen::MatrixXi& predictions);
double expected_joint_error(const Eigen::MatrixXi& predictions, const Eigen::VectorXi& labels);

struct RiskBoundRhs {
  double value = 0.0;
  bool infinite = false;  // e_hat = 0 with q < 1 makes the bound vacuous
};

// 0.5*d_hat + epsilon * e_hat^(1 - 1/q)
RiskBoundRhs risk_bound_rhs(double d_hat, double e_hat, double epsilon, double q);

struct BoundReport {
  double d_hat = 0.0;
  double e_hat = 0.0;
  double epsilon = 0.0;
  double q = 0.0;
  double rhs = 0.0;
  bool rhs_infinite = false;
  double empirical_risk = 0.0;  // mean member error rate
  bool holds = false;
};

BoundReport make_bound_report(const Eigen::MatrixXi& predictions, const Eigen::VectorXi& labels,
                              double epsilon, double q);

// CSV row: d_hat,e_hat,epsilon,q,rhs,empirical_risk,holds
void write_bound_csv(const BoundReport& r, std::ostream& out);

}  // namespace phaser
