#include "qoct/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qoct {

void CmaesConfig::validate() const {
  const auto n = x0.size();
  if (n < 1) throw std::invalid_argument("cmaes: empty start point");
  if (sigma0.size() != n) throw std::invalid_argument("cmaes: sigma0 size mismatch");
  if ((sigma0.array() <= 0.0).any()) throw std::invalid_argument("cmaes: sigma0 must be positive");
  if (lower.size() != upper.size()) throw std::invalid_argument("cmaes: bound size mismatch");
  if (lower.size() != 0 && lower.size() != n)
    throw std::invalid_argument("cmaes: bound size mismatch");
  if (lower.size() == n && (lower.array() > upper.array()).any())
    throw std::invalid_argument("cmaes: empty bound interval");
  if (lambda != 0 && lambda < 4) throw std::invalid_argument("cmaes: lambda must be 0 or >= 4");
}

int CmaesConfig::effective_lambda() const {
  if (lambda > 0) return lambda;
  return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(x0.size()))));
}

CmaesState::CmaesState(const CmaesConfig& config) : rng_(config.seed) {
  config.validate();
  n_ = static_cast<int>(config.x0.size());
  lambda_ = config.effective_lambda();
  mu_ = lambda_ / 2;

  weights_ = Eigen::VectorXd::Zero(lambda_);
  for (int i = 0; i < mu_; ++i)
    weights_(i) = std::log(mu_ + 0.5) - std::log(static_cast<double>(i + 1));
  weights_ /= weights_.head(mu_).sum();
  mu_eff_ = 1.0 / weights_.head(mu_).squaredNorm();

  const double n = n_;
  c_sigma_ = (mu_eff_ + 2.0) / (n + mu_eff_ + 5.0);
  d_sigma_ = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff_ - 1.0) / (n + 1.0)) - 1.0) + c_sigma_;
  c_c_ = (4.0 + mu_eff_ / n) / (n + 4.0 + 2.0 * mu_eff_ / n);
  c_1_ = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff_);
  c_mu_ = std::min(1.0 - c_1_,
                   2.0 * (mu_eff_ - 2.0 + 1.0 / mu_eff_) / ((n + 2.0) * (n + 2.0) + mu_eff_));
  chi_n_ = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

  mean_ = config.x0;
  // Anisotropic initial scales become the initial covariance diagonal; the
  // scalar step size carries their geometric mean.
  sigma_ = std::exp(config.sigma0.array().log().mean());
  cov_ = (config.sigma0.array() / sigma_).square().matrix().asDiagonal();
  path_sigma_ = Eigen::VectorXd::Zero(n_);
  path_c_ = Eigen::VectorXd::Zero(n_);
  lower_ = config.lower;
  upper_ = config.upper;
  best_ = mean_;
  refresh_decomposition();
}

void CmaesState::refresh_decomposition() {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (cov_ + cov_.transpose()));
  eigvec_ = es.eigenvectors();
  eig_sqrt_ = es.eigenvalues().cwiseMax(1e-20).cwiseSqrt();
}

Eigen::VectorXd CmaesState::sample_candidate() {
  Eigen::VectorXd z(n_);
  for (int i = 0; i < n_; ++i) z(i) = rng_.next_normal();
  return mean_ + sigma_ * (eigvec_ * (eig_sqrt_.asDiagonal() * z));
}

std::vector<Eigen::VectorXd> CmaesState::ask() {
  std::vector<Eigen::VectorXd> out;
  out.reserve(lambda_);
  const bool bounded = lower_.size() == n_;
  for (int k = 0; k < lambda_; ++k) {
    Eigen::VectorXd x = sample_candidate();
    if (bounded) {
      for (int attempt = 0; attempt < 100; ++attempt) {
        bool inside = (x.array() >= lower_.array()).all() && (x.array() <= upper_.array()).all();
        if (inside) break;
        x = sample_candidate();
      }
      x = x.cwiseMax(lower_).cwiseMin(upper_);
    }
    out.push_back(std::move(x));
  }
  return out;
}

void CmaesState::tell(const std::vector<Eigen::VectorXd>& candidates,
                      const std::vector<double>& costs) {
  if (static_cast<int>(candidates.size()) != lambda_ || costs.size() != candidates.size())
    throw std::invalid_argument("cmaes: generation size mismatch");

  ++generation_;
  for (std::size_t i = 0; i < costs.size(); ++i)
    if (costs[i] > best_cost_) {
      best_cost_ = costs[i];
      best_ = candidates[i];
    }

  // No ranking signal at all: leave mean, paths and covariance untouched.
  auto [lo, hi] = std::minmax_element(costs.begin(), costs.end());
  if (*hi - *lo == 0.0) return;

  std::vector<int> order(lambda_);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return costs[a] > costs[b]; });

  // Candidates with exactly equal cost share the average of the weights their
  // rank block spans, so the update cannot prefer one of them arbitrarily.
  Eigen::VectorXd w = Eigen::VectorXd::Zero(lambda_);
  int i = 0;
  while (i < lambda_) {
    int j = i;
    double block = 0.0;
    while (j < lambda_ && costs[order[j]] == costs[order[i]]) block += weights_(j), ++j;
    for (int k = i; k < j; ++k) w(k) = block / (j - i);
    i = j;
  }

  const Eigen::VectorXd old_mean = mean_;
  Eigen::VectorXd new_mean = Eigen::VectorXd::Zero(n_);
  for (int k = 0; k < lambda_; ++k)
    if (w(k) != 0.0) new_mean += w(k) * candidates[order[k]];
  mean_ = new_mean;

  const Eigen::VectorXd mean_step = (mean_ - old_mean) / sigma_;

  // C^{-1/2} via the cached eigendecomposition.
  Eigen::VectorXd inv_sqrt = eig_sqrt_.cwiseInverse();
  Eigen::VectorXd whitened = eigvec_ * (inv_sqrt.asDiagonal() * (eigvec_.transpose() * mean_step));

  path_sigma_ = (1.0 - c_sigma_) * path_sigma_ +
                std::sqrt(c_sigma_ * (2.0 - c_sigma_) * mu_eff_) * whitened;

  const double expected_decay =
      std::sqrt(1.0 - std::pow(1.0 - c_sigma_, 2.0 * generation_));
  const bool h_sigma =
      path_sigma_.norm() / expected_decay < (1.4 + 2.0 / (n_ + 1.0)) * chi_n_;

  path_c_ = (1.0 - c_c_) * path_c_;
  if (h_sigma) path_c_ += std::sqrt(c_c_ * (2.0 - c_c_) * mu_eff_) * mean_step;

  Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(n_, n_);
  double w_sum = 0.0;
  for (int k = 0; k < lambda_; ++k) {
    if (w(k) == 0.0) continue;
    Eigen::VectorXd y = (candidates[order[k]] - old_mean) / sigma_;
    rank_mu += w(k) * (y * y.transpose());
    w_sum += w(k);
  }

  const double stall = (1.0 - (h_sigma ? 1.0 : 0.0)) * c_c_ * (2.0 - c_c_);
  cov_ = (1.0 - c_1_ - c_mu_ * w_sum) * cov_ +
         c_1_ * (path_c_ * path_c_.transpose() + stall * cov_) + c_mu_ * rank_mu;

  sigma_ *= std::exp((c_sigma_ / d_sigma_) * (path_sigma_.norm() / chi_n_ - 1.0));

  refresh_decomposition();
}

}  // namespace qoct
