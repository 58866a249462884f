#include "phaser/divergence.hpp"

#include <cmath>
#include <limits>

namespace phaser {

void GaussianTrack::validate() const {
  if (mu.size() != sigma.size()) throw DataError("gaussian track: mu/sigma length mismatch");
  if (mu.size() == 0) throw DataError("gaussian track: empty");
  if (!mu.allFinite() || !sigma.allFinite()) throw NumericError("gaussian track: non-finite");
  if ((sigma.array() <= 0.0).any()) throw DataError("gaussian track: sigma must be positive");
}

void MixtureSpec::validate() const {
  if (static_cast<std::size_t>(weights.size()) != tracks.size())
    throw DataError("mixture: weights/tracks length mismatch");
  if ((weights.array() < 0.0).any()) throw DataError("mixture: negative weight");
  if (std::abs(weights.sum() - 1.0) > 1e-12) throw DataError("mixture: weights must sum to 1");
  for (const auto& t : tracks) t.validate();
}

namespace {

void check_q(double q) {
  if (!(q > 0.0)) throw DataError("renyi: q must be positive");
  if (q == 1.0) throw NumericError("renyi: q = 1 is singular for these closed forms");
}

}  // namespace

double renyi_gaussian_bound(double mu_i, double sigma_i, double mu_j, double sigma_j, double q) {
  check_q(q);
  const double vi = sigma_i * sigma_i;
  const double vj = sigma_j * sigma_j;
  const double mix = (1.0 - q) * vi + vj;
  if (!(mix > 0.0))
    throw NumericError("renyi_gaussian_bound: (1-q)*sigma_i^2 + sigma_j^2 = " +
                       std::to_string(mix) + " is not positive");
  const double dm = mu_j - mu_i;
  const double first = q * dm * dm / (2.0 * (1.0 - q) * vi + 2.0 * vj);
  const double second =
      std::log(std::sqrt(mix) / (std::pow(sigma_i, 1.0 - q) * std::pow(sigma_j, q))) / (1.0 - q);
  return first + second;
}

double renyi_gaussian_standard(double mu_i, double sigma_i, double mu_j, double sigma_j, double q) {
  check_q(q);
  const double vi = sigma_i * sigma_i;
  const double vj = sigma_j * sigma_j;
  const double mix = (1.0 - q) * vi + q * vj;
  if (!(mix > 0.0))
    throw NumericError("renyi_gaussian_standard: variance mixture " + std::to_string(mix) +
                       " is not positive");
  const double dm = mu_i - mu_j;
  return q * dm * dm / (2.0 * mix) +
         std::log(std::sqrt(mix) / (std::pow(sigma_i, 1.0 - q) * std::pow(sigma_j, q))) /
             (1.0 - q);
}

QuadratureGrid default_grid(const std::vector<GaussianTrack>& tracks, int points) {
  if (tracks.empty()) throw DataError("default_grid: no tracks");
  double mu_lo = std::numeric_limits<double>::infinity();
  double mu_hi = -std::numeric_limits<double>::infinity();
  double sigma_max = 0.0;
  for (const auto& t : tracks) {
    t.validate();
    mu_lo = std::min(mu_lo, t.mu.minCoeff());
    mu_hi = std::max(mu_hi, t.mu.maxCoeff());
    sigma_max = std::max(sigma_max, t.sigma.maxCoeff());
  }
  return {mu_lo - 8.0 * sigma_max, mu_hi + 8.0 * sigma_max, points};
}

double renyi_numeric(const std::function<double(double)>& p_density,
                     const std::function<double(double)>& q_density, double q,
                     const QuadratureGrid& grid) {
  check_q(q);
  if (grid.points < 3 || !(grid.hi > grid.lo)) throw DataError("renyi_numeric: bad grid");
  const double h = (grid.hi - grid.lo) / static_cast<double>(grid.points - 1);

  double mass_p = 0.0, mass_q = 0.0, integral = 0.0;
  for (int i = 0; i < grid.points; ++i) {
    const double x = grid.lo + h * i;
    const double pw = (i == 0 || i == grid.points - 1) ? 0.5 : 1.0;
    const double p = p_density(x);
    const double r = q_density(x);
    if (!(p >= 0.0) || !(r >= 0.0)) throw NumericError("renyi_numeric: negative density");
    mass_p += pw * p;
    mass_q += pw * r;
    double term;
    if (p == 0.0 && r == 0.0) {
      term = 0.0;
    } else if (r == 0.0) {
      term = q > 1.0 ? std::numeric_limits<double>::infinity() : 0.0;
    } else {
      term = std::pow(p, q) * std::pow(r, 1.0 - q);
    }
    integral += pw * term;
  }
  mass_p *= h;
  mass_q *= h;
  integral *= h;
  if (mass_p < 1.0 - 1e-10 || mass_q < 1.0 - 1e-10)
    throw NumericError("renyi_numeric: grid mass deficit (p=" + std::to_string(mass_p) +
                       ", q=" + std::to_string(mass_q) + ")");
  if (!(integral > 0.0)) throw NumericError("renyi_numeric: vanishing integral");
  return std::log(integral) / (q - 1.0);
}

double beta_divergence(double rd, double q) {
  if (!(q > 0.0)) throw DataError("beta_divergence: q must be positive");
  return std::exp2((q - 1.0) / q * rd);
}

double gaussian_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * kPi));
}

double mixture_pdf(double x, const Eigen::VectorXd& weights,
                   const std::vector<GaussianTrack>& tracks, Eigen::Index t) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i)
    acc += weights[i] * gaussian_pdf(x, tracks[static_cast<std::size_t>(i)].mu[t],
                                     tracks[static_cast<std::size_t>(i)].sigma[t]);
  return acc;
}

EpsilonReport epsilon_bound(const std::vector<GaussianTrack>& tracks, double q, RenyiForm form) {
  if (tracks.size() < 2) throw DataError("epsilon_bound: need at least 2 tracks");
  const Eigen::Index T = tracks[0].length();
  for (const auto& t : tracks) {
    t.validate();
    if (t.length() != T) throw DataError("epsilon_bound: track length mismatch");
  }
  EpsilonReport best;
  best.epsilon = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tracks.size(); ++i)
    for (std::size_t j = 0; j < tracks.size(); ++j) {
      if (i == j) continue;
      for (Eigen::Index t = 0; t < T; ++t) {
        double rd;
        try {
          rd = form == RenyiForm::Bound
                   ? renyi_gaussian_bound(tracks[i].mu[t], tracks[i].sigma[t], tracks[j].mu[t],
                                          tracks[j].sigma[t], q)
                   : renyi_gaussian_standard(tracks[i].mu[t], tracks[i].sigma[t], tracks[j].mu[t],
                                             tracks[j].sigma[t], q);
        } catch (const NumericError& e) {
          throw NumericError("epsilon_bound: pair (" + std::to_string(i) + ", " +
                             std::to_string(j) + ") at t=" + std::to_string(t) + ": " + e.what());
        }
        const double beta = beta_divergence(rd, q);
        // ties resolve to the lowest (i, j, t) so parallel evaluation orders agree
        if (beta > best.epsilon) {
          best.epsilon = beta;
          best.i = static_cast<int>(i);
          best.j = static_cast<int>(j);
          best.t = static_cast<int>(t);
        }
      }
    }
  return best;
}

namespace {

// All weight vectors with components k/(resolution-1) summing to 1.
void enumerate_simplex(int dims, int resolution, Eigen::VectorXd& current, int pos, int left,
                       const std::function<void(const Eigen::VectorXd&)>& visit) {
  if (pos == dims - 1) {
    current[pos] = static_cast<double>(left) / (resolution - 1);
    visit(current);
    return;
  }
  for (int k = 0; k <= left; ++k) {
    current[pos] = static_cast<double>(k) / (resolution - 1);
    enumerate_simplex(dims, resolution, current, pos + 1, left - k, visit);
  }
}

}  // namespace

MixtureSpec closest_mixture(const GaussianTrack& target, const std::vector<GaussianTrack>& sources,
                            double q, int grid_resolution, int quad_points) {
  target.validate();
  if (sources.empty() || sources.size() > 4)
    throw DataError("closest_mixture: need 1..4 sources");
  if (grid_resolution < 11) throw DataError("closest_mixture: grid resolution must be >= 11");
  const Eigen::Index T = target.length();
  for (const auto& s : sources) {
    s.validate();
    if (s.length() != T) throw DataError("closest_mixture: track length mismatch");
  }

  std::vector<GaussianTrack> all = sources;
  all.push_back(target);
  const QuadratureGrid grid = default_grid(all, quad_points);

  const int n = static_cast<int>(sources.size());
  MixtureSpec best;
  best.tracks = sources;
  double best_score = std::numeric_limits<double>::infinity();
  Eigen::VectorXd w(n);
  enumerate_simplex(n, grid_resolution, w, 0, grid_resolution - 1,
                    [&](const Eigen::VectorXd& weights) {
                      double score = 0.0;
                      for (Eigen::Index t = 0; t < T; ++t) {
                        const auto p = [&](double x) {
                          return gaussian_pdf(x, target.mu[t], target.sigma[t]);
                        };
                        const auto r = [&](double x) {
                          return mixture_pdf(x, weights, sources, t);
                        };
                        score += renyi_numeric(p, r, q, grid);
                      }
                      score /= static_cast<double>(T);
                      if (score < best_score - 1e-15) {  // first-found tie break
                        best_score = score;
                        best.weights = weights;
                      }
                    });
  best.validate();
  return best;
}

double expected_disagreement(const Eigen::MatrixXi& predictions) {
  const Eigen::Index m = predictions.rows();
  const Eigen::Index n = predictions.cols();
  if (m < 2) throw DataError("expected_disagreement: need >= 2 ensemble members");
  if (n < 1) throw DataError("expected_disagreement: empty data");
  double acc = 0.0;
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = a + 1; b < m; ++b)
      for (Eigen::Index s = 0; s < n; ++s)
        if (predictions(a, s) != predictions(b, s)) acc += 1.0;
  const double pairs = static_cast<double>(m) * (m - 1) / 2.0;
  return acc / (pairs * static_cast<double>(n));
}

double expected_joint_error(const Eigen::MatrixXi& predictions, const Eigen::VectorXi& labels) {
  const Eigen::Index m = predictions.rows();
  const Eigen::Index n = predictions.cols();
  if (m < 2) throw DataError("expected_joint_error: need >= 2 ensemble members");
  if (n < 1 || labels.size() != n) throw DataError("expected_joint_error: labels mismatch");
  double acc = 0.0;
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = a + 1; b < m; ++b)
      for (Eigen::Index s = 0; s < n; ++s)
        if (predictions(a, s) != labels[s] && predictions(b, s) != labels[s]) acc += 1.0;
  const double pairs = static_cast<double>(m) * (m - 1) / 2.0;
  return acc / (pairs * static_cast<double>(n));
}

RiskBoundRhs risk_bound_rhs(double d_hat, double e_hat, double epsilon, double q) {
  if (d_hat < 0.0 || d_hat > 1.0 || e_hat < 0.0 || e_hat > 1.0)
    throw DataError("risk_bound_rhs: estimates must lie in [0, 1]");
  if (epsilon < 0.0) throw DataError("risk_bound_rhs: epsilon must be >= 0");
  if (!(q > 0.0)) throw DataError("risk_bound_rhs: q must be positive");
  const double expo = 1.0 - 1.0 / q;
  RiskBoundRhs out;
  if (e_hat == 0.0 && expo < 0.0) {
    out.infinite = true;
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  out.value = 0.5 * d_hat + epsilon * std::pow(e_hat, expo);
  return out;
}

BoundReport make_bound_report(const Eigen::MatrixXi& predictions, const Eigen::VectorXi& labels,
                              double epsilon, double q) {
  BoundReport r;
  r.d_hat = expected_disagreement(predictions);
  r.e_hat = expected_joint_error(predictions, labels);
  r.epsilon = epsilon;
  r.q = q;
  const RiskBoundRhs rhs = risk_bound_rhs(r.d_hat, r.e_hat, epsilon, q);
  r.rhs = rhs.value;
  r.rhs_infinite = rhs.infinite;

  double wrong = 0.0;
  for (Eigen::Index a = 0; a < predictions.rows(); ++a)
    for (Eigen::Index s = 0; s < predictions.cols(); ++s)
      if (predictions(a, s) != labels[s]) wrong += 1.0;
  r.empirical_risk = wrong / (static_cast<double>(predictions.rows()) *
                              static_cast<double>(predictions.cols()));
  r.holds = rhs.infinite || r.rhs >= r.empirical_risk;
  return r;
}

void write_bound_csv(const BoundReport& r, std::ostream& out) {
  out << "d_hat,e_hat,epsilon,q,rhs,empirical_risk,holds\n";
  char line[256];
  if (r.rhs_infinite) {
    std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g,%.9g,inf,%.9g,%d\n", r.d_hat, r.e_hat,
                  r.epsilon, r.q, r.empirical_risk, r.holds ? 1 : 0);
  } else {
    std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%d\n", r.d_hat, r.e_hat,
                  r.epsilon, r.q, r.rhs, r.empirical_risk, r.holds ? 1 : 0);
  }
  out << line;
}

}  // namespace phaser
