#include "qoct/decay_fit.hpp"

#include <cmath>
#include <stdexcept>

namespace qoct {

LevMarResult levmar(const ResidualFn& residuals, const JacobianFn& jacobian,
                    const Eigen::VectorXd& p0, const LevMarOptions& options) {
  LevMarResult res;
  Eigen::VectorXd p = p0;
  Eigen::VectorXd r = residuals(p);
  double cost = r.squaredNorm();
  double damping = options.lambda0;

  for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
    Eigen::MatrixXd j = jacobian(p);
    Eigen::MatrixXd jtj = j.transpose() * j;
    Eigen::VectorXd g = j.transpose() * r;

    if (g.lpNorm<Eigen::Infinity>() < 1e-14 * (1.0 + std::sqrt(cost))) {
      res.converged = true;
      break;
    }

    // Marquardt scaling with a floor so exactly-degenerate directions stay
    // solvable (they then simply receive no step).
    Eigen::VectorXd diag = jtj.diagonal();
    const double floor = 1e-12 * std::max(1.0, diag.maxCoeff());
    diag = diag.cwiseMax(floor);

    bool stepped = false;
    for (int tries = 0; tries < 50; ++tries) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += damping * diag;
      Eigen::VectorXd delta = a.ldlt().solve(-g);
      if (!delta.allFinite()) {
        damping *= 2.0;
        continue;
      }
      Eigen::VectorXd p_new = p + delta;
      Eigen::VectorXd r_new = residuals(p_new);
      double cost_new = r_new.squaredNorm();
      if (cost_new < cost) {
        const double rel_drop = (cost - cost_new) / std::max(cost, 1e-300);
        const double rel_step = delta.norm() / (p.norm() + options.xtol);
        p = p_new;
        r = r_new;
        cost = cost_new;
        damping = std::max(damping / 3.0, 1e-12);
        stepped = true;
        if (rel_drop < options.ftol || rel_step < options.xtol) res.converged = true;
        break;
      }
      damping *= 2.0;
    }
    if (!stepped) {
      res.converged = true;  // no descent direction left at any damping
      break;
    }
    if (res.converged) break;
  }

  res.params = p;
  res.residual_norm = std::sqrt(cost);

  Eigen::MatrixXd j = jacobian(p);
  Eigen::MatrixXd jtj = j.transpose() * j;
  // Pseudo-inverse so degenerate fits report huge-but-finite variances.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jtj, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double tol = 1e-14 * std::max(1.0, svd.singularValues().maxCoeff());
  Eigen::VectorXd inv_sv = svd.singularValues();
  for (int i = 0; i < inv_sv.size(); ++i)
    inv_sv(i) = inv_sv(i) > tol ? 1.0 / inv_sv(i) : 1.0 / tol;
  res.covariance = svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
  return res;
}

namespace {

double logit(double x) { return std::log(x / (1.0 - x)); }
double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }

struct WeightedData {
  std::vector<double> n;
  std::vector<double> y;
  std::vector<double> w;  // 1/sigma, or 1 when unweighted
  bool weighted = false;
};

WeightedData prepare(const std::vector<double>& lengths, const std::vector<double>& values,
                     const std::vector<double>& sigmas) {
  if (lengths.size() != values.size())
    throw std::invalid_argument("decay fit: lengths/values size mismatch");
  if (lengths.size() < 3) throw std::invalid_argument("decay fit: need at least 3 points");
  if (!sigmas.empty() && sigmas.size() != lengths.size())
    throw std::invalid_argument("decay fit: sigma size mismatch");

  WeightedData d;
  d.n = lengths;
  d.y = values;
  d.w.assign(lengths.size(), 1.0);
  if (!sigmas.empty()) {
    bool all_positive = true;
    for (double s : sigmas)
      if (!(s > 0.0)) all_positive = false;
    if (all_positive) {
      d.weighted = true;
      for (std::size_t i = 0; i < sigmas.size(); ++i) d.w[i] = 1.0 / sigmas[i];
    }
  }
  return d;
}

// Shared tail of both decay fits: run LM on (offset, amplitude, logit decay),
// then map the result and its covariance back to the bounded parametrization.
DecayFitResult finish_decay_fit(const WeightedData& d, const ResidualFn& residuals,
                                const JacobianFn& jacobian, const Eigen::VectorXd& p0) {
  LevMarResult lm = levmar(residuals, jacobian, p0);

  DecayFitResult out;
  out.offset = lm.params(0);
  out.amplitude = lm.params(1);
  out.decay = logistic(lm.params(2));
  out.residual_norm = lm.residual_norm;
  out.converged = lm.converged;

  Eigen::Matrix3d cov = lm.covariance;
  if (!d.weighted) {
    const int dof = static_cast<int>(d.n.size()) - 3;
    const double s2 = dof > 0 ? lm.residual_norm * lm.residual_norm / dof : 0.0;
    cov *= s2;
  }
  // Delta method for the logistic-transformed decay row/column.
  const double dslope = out.decay * (1.0 - out.decay);
  cov.row(2) *= dslope;
  cov.col(2) *= dslope;
  out.covariance = cov;
  out.offset_err = std::sqrt(std::max(0.0, cov(0, 0)));
  out.amplitude_err = std::sqrt(std::max(0.0, cov(1, 1)));
  out.decay_err = std::sqrt(std::max(0.0, cov(2, 2)));

  // An unidentifiable decay shows up as a variance blown up to the
  // pseudo-inverse ceiling or a vanishing amplitude.
  const double rel_decay_err = out.decay_err / std::max(1e-12, dslope);
  out.identifiable = lm.converged && rel_decay_err < 1e3 && std::abs(out.amplitude) > 1e-12;
  return out;
}

}  // namespace

DecayFitResult fit_single_decay(const std::vector<double>& lengths,
                                const std::vector<double>& values,
                                const std::vector<double>& sigmas) {
  WeightedData d = prepare(lengths, values, sigmas);
  const std::size_t m = d.n.size();

  auto residuals = [d, m](const Eigen::VectorXd& p) {
    const double a = p(0), b = p(1), lam = logistic(p(2));
    Eigen::VectorXd r(m);
    for (std::size_t i = 0; i < m; ++i)
      r(i) = d.w[i] * (a + b * std::pow(lam, d.n[i]) - d.y[i]);
    return r;
  };
  auto jac = [d, m](const Eigen::VectorXd& p) {
    const double b = p(1), lam = logistic(p(2));
    Eigen::MatrixXd j(m, 3);
    for (std::size_t i = 0; i < m; ++i) {
      const double ln = std::pow(lam, d.n[i]);
      j(i, 0) = d.w[i];
      j(i, 1) = d.w[i] * ln;
      j(i, 2) = d.w[i] * b * d.n[i] * ln * (1.0 - lam);  // d/du with lam = logistic(u)
    }
    return j;
  };

  Eigen::VectorXd p0(3);
  p0 << 0.5 * (d.y[m - 1] + d.y[m - 2]), d.y[0] - d.y[m - 1], logit(0.99);
  return finish_decay_fit(d, residuals, jac, p0);
}

DecayFitResult fit_double_decay(const std::vector<double>& lengths,
                                const std::vector<double>& values, double fixed_b,
                                double fixed_lambda1, const std::vector<double>& sigmas) {
  WeightedData d = prepare(lengths, values, sigmas);
  const std::size_t m = d.n.size();

  auto fixed_term = [fixed_b, fixed_lambda1](double n) {
    return fixed_b * std::pow(fixed_lambda1, n);
  };

  auto residuals = [d, m, fixed_term](const Eigen::VectorXd& p) {
    const double a0 = p(0), c0 = p(1), lam = logistic(p(2));
    Eigen::VectorXd r(m);
    for (std::size_t i = 0; i < m; ++i)
      r(i) = d.w[i] * (a0 + fixed_term(d.n[i]) + c0 * std::pow(lam, d.n[i]) - d.y[i]);
    return r;
  };
  auto jac = [d, m](const Eigen::VectorXd& p) {
    const double c0 = p(1), lam = logistic(p(2));
    Eigen::MatrixXd j(m, 3);
    for (std::size_t i = 0; i < m; ++i) {
      const double ln = std::pow(lam, d.n[i]);
      j(i, 0) = d.w[i];
      j(i, 1) = d.w[i] * ln;
      j(i, 2) = d.w[i] * c0 * d.n[i] * ln * (1.0 - lam);
    }
    return j;
  };

  std::vector<double> detrended(m);
  for (std::size_t i = 0; i < m; ++i) detrended[i] = d.y[i] - fixed_term(d.n[i]);
  Eigen::VectorXd p0(3);
  p0 << 0.5 * (detrended[m - 1] + detrended[m - 2]), detrended[0] - detrended[m - 1],
      logit(0.99);
  return finish_decay_fit(d, residuals, jac, p0);
}

double leakage_per_clifford(double a, double lambda1) { return (1.0 - a) * (1.0 - lambda1); }

double average_fidelity(double lambda2, double l1) { return 0.5 * (lambda2 + 1.0 - l1); }

}  // namespace qoct
