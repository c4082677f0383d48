#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <vector>

#include "qoct/rng.hpp"

namespace qoct {

// Evolution-strategy settings. The cost is maximized. Per-coordinate initial
// scales go into sigma0; bounds are optional (empty means unbounded) and are
// enforced by resampling with a clamp fallback.
struct CmaesConfig {
  Eigen::VectorXd x0;
  Eigen::VectorXd sigma0;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  int lambda = 0;  // 0 selects 4 + floor(3 ln n)
  int max_iterations = 200;
  double target_cost = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;

  void validate() const;
  int effective_lambda() const;
};

// Covariance matrix adaptation with cumulative step-size control and rank-one
// plus rank-mu covariance updates, log-decreasing weights over the better
// half of each generation.
class CmaesState {
 public:
  explicit CmaesState(const CmaesConfig& config);

  // Draws one generation of candidates.
  std::vector<Eigen::VectorXd> ask();

  // Consumes the costs (larger is better) for the candidates returned by the
  // matching ask(). A generation whose costs are all identical carries no
  // ranking information and leaves the distribution untouched.
  void tell(const std::vector<Eigen::VectorXd>& candidates, const std::vector<double>& costs);

  const Eigen::VectorXd& mean() const { return mean_; }
  double sigma() const { return sigma_; }
  int generation() const { return generation_; }
  int lambda() const { return lambda_; }
  double best_cost() const { return best_cost_; }
  const Eigen::VectorXd& best() const { return best_; }
  const Eigen::MatrixXd& covariance() const { return cov_; }

 private:
  void refresh_decomposition();
  Eigen::VectorXd sample_candidate();

  int n_ = 0;
  int lambda_ = 0;
  int mu_ = 0;
  Eigen::VectorXd weights_;
  double mu_eff_ = 0.0;
  double c_sigma_ = 0.0, d_sigma_ = 0.0, c_c_ = 0.0, c_1_ = 0.0, c_mu_ = 0.0;
  double chi_n_ = 0.0;

  Eigen::VectorXd mean_;
  double sigma_ = 0.0;
  Eigen::MatrixXd cov_;
  Eigen::VectorXd path_sigma_, path_c_;
  Eigen::MatrixXd eigvec_;
  Eigen::VectorXd eig_sqrt_;
  Eigen::VectorXd lower_, upper_;
  int generation_ = 0;

  double best_cost_ = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_;

  RngStream rng_;
};

}  // namespace qoct
