#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace qoct {

struct LevMarOptions {
  int max_iterations = 200;
  double ftol = 1e-14;  // relative cost-change stop
  double xtol = 1e-12;  // relative step-size stop
  double lambda0 = 1e-3;
};

struct LevMarResult {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;  // (J^T J)^-1 at the solution, unscaled
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

// Damped least squares on r(p) with analytic Jacobian of the residuals
// (Marquardt diagonal scaling). Returns the best point found even when the
// iteration cap is hit.
LevMarResult levmar(const ResidualFn& residuals, const JacobianFn& jacobian,
                    const Eigen::VectorXd& p0, const LevMarOptions& options = {});

// Decay-curve fit result. `decay` is constrained to (0, 1) internally via a
// logistic reparametrization; its standard error is mapped back by the delta
// method. When no per-point sigmas are given, errors are scaled by the
// reduced chi-square.
struct DecayFitResult {
  double offset = 0.0;     // A (single) or A0 (double)
  double amplitude = 0.0;  // B (single) or C0 (double)
  double decay = 0.0;      // lambda1 or lambda2
  double offset_err = 0.0;
  double amplitude_err = 0.0;
  double decay_err = 0.0;
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  double residual_norm = 0.0;
  bool converged = false;
  bool identifiable = true;
};

// Fits y = A + B * decay^n over the sample points n = lengths[i].
DecayFitResult fit_single_decay(const std::vector<double>& lengths,
                                const std::vector<double>& values,
                                const std::vector<double>& sigmas = {});

// Fits y = A0 + fixed_b * fixed_lambda1^n + C0 * decay^n with the first
// exponential held fixed.
DecayFitResult fit_double_decay(const std::vector<double>& lengths,
                                const std::vector<double>& values, double fixed_b,
                                double fixed_lambda1, const std::vector<double>& sigmas = {});

// Average leakage per Clifford from the invariant-subspace decay fit.
double leakage_per_clifford(double a, double lambda1);

// Average Clifford fidelity from the computational decay and leakage.
double average_fidelity(double lambda2, double l1);

}  // namespace qoct
