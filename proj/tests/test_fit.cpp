#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "qoct/decay_fit.hpp"
#include "qoct/rng.hpp"

using namespace qoct;

namespace {

const std::vector<double> kLengths = {1, 5, 10, 20, 40, 60, 90, 120, 160, 200};

std::vector<double> single_model(const std::vector<double>& n, double a, double b, double lam) {
  std::vector<double> y(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) y[i] = a + b * std::pow(lam, n[i]);
  return y;
}

std::vector<double> double_model(const std::vector<double>& n, double a0, double b, double lam1,
                                 double c0, double lam2) {
  std::vector<double> y(n.size());
  for (std::size_t i = 0; i < n.size(); ++i)
    y[i] = a0 + b * std::pow(lam1, n[i]) + c0 * std::pow(lam2, n[i]);
  return y;
}

// One measured curve point: mean over K sequences of binomial(shots, p)/shots.
double sampled_point(RngStream& rng, double p, int k, int shots) {
  double mean = 0.0;
  std::vector<double> probs = {p, 1.0 - p};
  for (int i = 0; i < k; ++i) {
    auto counts = rng.multinomial(shots, probs);
    mean += static_cast<double>(counts[0]) / shots;
  }
  return mean / k;
}

}  // namespace

TEST_CASE("levmar solves a linear least-squares problem exactly") {
  std::vector<double> x = {0, 1, 2, 3, 4, 5};
  auto residuals = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r(i) = p(0) + p(1) * x[i] - (1.0 + 2.0 * x[i]);
    return r;
  };
  auto jacobian = [&](const Eigen::VectorXd&) {
    Eigen::MatrixXd j(x.size(), 2);
    for (std::size_t i = 0; i < x.size(); ++i) {
      j(i, 0) = 1.0;
      j(i, 1) = x[i];
    }
    return j;
  };
  LevMarResult res = levmar(residuals, jacobian, Eigen::VectorXd::Zero(2));
  CHECK(res.converged);
  CHECK(std::abs(res.params(0) - 1.0) < 1e-10);
  CHECK(std::abs(res.params(1) - 2.0) < 1e-10);
  CHECK(res.residual_norm < 1e-10);
}

TEST_CASE("single decay fit is exact on model data") {
  auto y = single_model(kLengths, 0.98, 0.02, 0.999);
  DecayFitResult fit = fit_single_decay(kLengths, y);
  CHECK(fit.converged);
  CHECK(fit.identifiable);
  CHECK(std::abs(fit.offset - 0.98) < 1e-6);
  CHECK(std::abs(fit.amplitude - 0.02) < 1e-6);
  CHECK(std::abs(fit.decay - 0.999) < 1e-6);
  CHECK(fit.residual_norm < 1e-10);
}

TEST_CASE("single decay fit recovers RB-scale parameters") {
  auto y = single_model(kLengths, 0.5, 0.5, 0.995);
  DecayFitResult fit = fit_single_decay(kLengths, y);
  CHECK(std::abs(fit.offset - 0.5) < 1e-6);
  CHECK(std::abs(fit.amplitude - 0.5) < 1e-6);
  CHECK(std::abs(fit.decay - 0.995) < 1e-6);
}

TEST_CASE("double decay fit is exact with the first exponential held fixed") {
  auto y = double_model(kLengths, 0.45, 0.1, 0.995, 0.45, 0.98);
  DecayFitResult fit = fit_double_decay(kLengths, y, 0.1, 0.995);
  CHECK(fit.converged);
  CHECK(std::abs(fit.offset - 0.45) < 1e-6);
  CHECK(std::abs(fit.amplitude - 0.45) < 1e-6);
  CHECK(std::abs(fit.decay - 0.98) < 1e-6);
  CHECK(fit.residual_norm < 1e-10);
}

TEST_CASE("constant data leaves the decay unidentifiable") {
  std::vector<double> y(kLengths.size(), 0.77);
  DecayFitResult fit = fit_single_decay(kLengths, y);
  CHECK(std::abs(fit.amplitude) < 1e-9);
  CHECK_FALSE(fit.identifiable);
}

TEST_CASE("a vanishing second amplitude is flagged") {
  auto y = double_model(kLengths, 0.45, 0.1, 0.995, 0.0, 0.98);
  DecayFitResult fit = fit_double_decay(kLengths, y, 0.1, 0.995);
  CHECK_FALSE(fit.identifiable);
}

TEST_CASE("the decay stays strictly inside the unit interval") {
  // Rising data pushes the decay toward 1; the logistic bound keeps it legal.
  std::vector<double> y(kLengths.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = 0.2 + 0.001 * kLengths[i];
  DecayFitResult fit = fit_single_decay(kLengths, y);
  CHECK(fit.decay > 0.0);
  CHECK(fit.decay < 1.0);
}

TEST_CASE("fits do not depend on the order of the points") {
  auto y = single_model(kLengths, 0.52, 0.46, 0.991);
  DecayFitResult ref = fit_single_decay(kLengths, y);

  std::vector<std::size_t> perm(kLengths.size());
  std::iota(perm.begin(), perm.end(), 0);
  RngStream rng(5);
  for (std::size_t i = perm.size(); i > 1; --i)
    std::swap(perm[i - 1], perm[rng.next_below(i)]);
  std::vector<double> n2(perm.size()), y2(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    n2[i] = kLengths[perm[i]];
    y2[i] = y[perm[i]];
  }
  DecayFitResult shuffled = fit_single_decay(n2, y2);
  CHECK(std::abs(shuffled.offset - ref.offset) < 1e-8);
  CHECK(std::abs(shuffled.amplitude - ref.amplitude) < 1e-8);
  CHECK(std::abs(shuffled.decay - ref.decay) < 1e-8);
}

TEST_CASE("nonpositive sigmas fall back to the unweighted fit") {
  auto y = single_model(kLengths, 0.5, 0.5, 0.993);
  std::vector<double> bad_sigmas(kLengths.size(), 0.01);
  bad_sigmas[3] = 0.0;
  DecayFitResult a = fit_single_decay(kLengths, y, bad_sigmas);
  DecayFitResult b = fit_single_decay(kLengths, y);
  CHECK(a.offset == b.offset);
  CHECK(a.decay == b.decay);
}

TEST_CASE("input validation rejects malformed series") {
  CHECK_THROWS(fit_single_decay({1, 2}, {0.5, 0.4}));
  CHECK_THROWS(fit_single_decay({1, 2, 3}, {0.5, 0.4}));
  CHECK_THROWS(fit_single_decay({1, 2, 3}, {0.5, 0.4, 0.3}, {0.1, 0.1}));
}

TEST_CASE("monte-carlo noise keeps the decay within its reported errors") {
  // Binomial sampling at the protocol's K = 20, 1000 shots. The acceptance
  // suite runs the full 200-trial calibration; this is a fast regression.
  const double a = 0.5, b = 0.5, lam = 0.99;
  auto p = single_model(kLengths, a, b, lam);
  std::vector<double> sigmas(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    sigmas[i] = std::sqrt(p[i] * (1.0 - p[i]) / (20.0 * 1000.0));

  RngStream rng(2718);
  int trials = 60, hits = 0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> y(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) y[i] = sampled_point(rng, p[i], 20, 1000);
    DecayFitResult fit = fit_single_decay(kLengths, y, sigmas);
    if (fit.converged && std::abs(fit.decay - lam) <= 3.0 * fit.decay_err) ++hits;
  }
  CHECK(hits >= trials * 85 / 100);
}

TEST_CASE("reported errors are positive and scale with the noise level") {
  const double a = 0.5, b = 0.5, lam = 0.99;
  auto p = single_model(kLengths, a, b, lam);
  auto noisy = [&](double scale, std::uint64_t seed) {
    RngStream rng(seed);
    std::vector<double> y(p.size()), s(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      s[i] = scale;
      y[i] = p[i] + scale * rng.next_normal();
    }
    return fit_single_decay(kLengths, y, s);
  };
  DecayFitResult small = noisy(0.001, 1);
  DecayFitResult large = noisy(0.01, 1);
  CHECK(small.decay_err > 0.0);
  CHECK(large.decay_err > 5.0 * small.decay_err);
  CHECK(small.covariance(0, 0) >= 0.0);
  CHECK(small.covariance(1, 1) >= 0.0);
}

TEST_CASE("leakage per clifford follows the closed form") {
  CHECK(leakage_per_clifford(1.0, 0.5) == 0.0);
  CHECK(leakage_per_clifford(0.5, 1.0) == 0.0);
  CHECK(std::abs(leakage_per_clifford(0.9, 0.99) - 0.001) < 1e-15);
}

TEST_CASE("average fidelity reproduces the published operating points") {
  CHECK(std::abs(average_fidelity(1.0, 0.0) - 1.0) < 1e-15);
  CHECK(std::abs(average_fidelity(0.9956, 0.00044) - 0.99758) < 1e-12);
  CHECK(std::abs(average_fidelity(0.9851, 0.0029) - 0.9911) < 1e-12);
}

TEST_CASE("average fidelity is monotone in both arguments") {
  CHECK(average_fidelity(0.999, 0.001) > average_fidelity(0.998, 0.001));
  CHECK(average_fidelity(0.999, 0.001) > average_fidelity(0.999, 0.002));
}
