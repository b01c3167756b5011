#include "cpc/biexp_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include <Eigen/Dense>

#include "cpc/errors.hpp"

namespace cpc {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Parameters are (a_j, ln tau_j) pairs, one pair per exponential.
struct Problem {
  const std::vector<double>& t;
  const std::vector<double>& y;

  std::size_t n() const { return t.size(); }

  VectorXd residuals(const VectorXd& p) const {
    VectorXd r(static_cast<Eigen::Index>(n()));
    const Eigen::Index comps = p.size() / 2;
    for (std::size_t i = 0; i < n(); ++i) {
      double m = 0.0;
      for (Eigen::Index j = 0; j < comps; ++j)
        m += p[2 * j] * std::exp(-t[i] * std::exp(-p[2 * j + 1]));
      r[static_cast<Eigen::Index>(i)] = m - y[i];
    }
    return r;
  }

  MatrixXd jacobian(const VectorXd& p) const {
    MatrixXd J(static_cast<Eigen::Index>(n()), p.size());
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      const double h = 1e-6 * std::max(1.0, std::abs(p[k]));
      VectorXd hi = p, lo = p;
      hi[k] += h;
      lo[k] -= h;
      J.col(k) = (residuals(hi) - residuals(lo)) / (2.0 * h);
    }
    return J;
  }
};

struct LmResult {
  VectorXd p;
  double cost = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

bool finite(const VectorXd& v) { return v.allFinite(); }

// Hessian of the cost by central differences of the gradient J^T r. Falls
// back to J^T J when that is not positive definite.
template <class P>
MatrixXd curvature(const P& prob, const VectorXd& p, const MatrixXd& gauss_newton) {
  MatrixXd H(p.size(), p.size());
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double h = 1e-4 * std::max(1.0, std::abs(p[k]));
    VectorXd hi = p, lo = p;
    hi[k] += h;
    lo[k] -= h;
    const VectorXd g_hi = prob.jacobian(hi).transpose() * prob.residuals(hi);
    const VectorXd g_lo = prob.jacobian(lo).transpose() * prob.residuals(lo);
    H.col(k) = (g_hi - g_lo) / (2.0 * h);
  }
  H = 0.5 * (H + H.transpose()).eval();
  if (!H.allFinite() || H.llt().info() != Eigen::Success) return gauss_newton;
  return H;
}

template <class P>
LmResult levenberg_marquardt(const P& prob, VectorXd p, const FitOptions& opt) {
  LmResult res;
  VectorXd r = prob.residuals(p);
  double cost = 0.5 * r.squaredNorm();
  double lambda = 1e-3;
  std::size_t it = 0;
  bool converged = cost == 0.0;
  while (!converged && it < opt.max_iterations) {
    ++it;
    const MatrixXd J = prob.jacobian(p);
    const MatrixXd A = J.transpose() * J;
    const VectorXd g = J.transpose() * r;
    const MatrixXd H = curvature(prob, p, A);
    bool accepted = false;
    while (!accepted) {
      MatrixXd M = H;
      for (Eigen::Index k = 0; k < M.rows(); ++k)
        M(k, k) += lambda * std::max(A(k, k), 1e-12);
      const VectorXd step = M.ldlt().solve(-g);
      const VectorXd trial = p + step;
      VectorXd r_trial;
      double cost_trial = std::numeric_limits<double>::infinity();
      if (finite(step) && finite(trial)) {
        r_trial = prob.residuals(trial);
        if (finite(r_trial)) cost_trial = 0.5 * r_trial.squaredNorm();
      }
      if (cost_trial < cost) {
        const double drop = cost - cost_trial;
        p = trial;
        r = std::move(r_trial);
        accepted = true;
        if (drop <= opt.relative_tolerance * cost || cost_trial == 0.0) converged = true;
        cost = cost_trial;
        lambda = std::max(lambda / 10.0, 1e-12);
      } else {
        lambda *= 10.0;
        if (lambda > 1e12) {
          // No direction lowers the cost any further: a minimum to precision.
          converged = true;
          break;
        }
      }
    }
  }
  res.p = p;
  res.cost = cost;
  res.iterations = it;
  res.converged = converged;
  return res;
}

// Amplitudes by linear least squares for fixed time constants.
VectorXd linear_amplitudes(const Problem& prob, const std::vector<double>& taus) {
  MatrixXd B(static_cast<Eigen::Index>(prob.n()), static_cast<Eigen::Index>(taus.size()));
  VectorXd y(static_cast<Eigen::Index>(prob.n()));
  for (std::size_t i = 0; i < prob.n(); ++i) {
    y[static_cast<Eigen::Index>(i)] = prob.y[i];
    for (std::size_t j = 0; j < taus.size(); ++j)
      B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::exp(-prob.t[i] / taus[j]);
  }
  return B.colPivHouseholderQr().solve(y);
}

// Variable projection: parameters are the ln tau_j alone, amplitudes follow
// by linear least squares at every evaluation.
struct Projected {
  const Problem& full;

  std::vector<double> taus(const VectorXd& q) const {
    std::vector<double> out;
    for (Eigen::Index j = 0; j < q.size(); ++j) out.push_back(std::exp(q[j]));
    return out;
  }

  VectorXd expand(const VectorXd& q) const {
    const VectorXd a = linear_amplitudes(full, taus(q));
    VectorXd p(2 * q.size());
    for (Eigen::Index j = 0; j < q.size(); ++j) {
      p[2 * j] = a[j];
      p[2 * j + 1] = q[j];
    }
    return p;
  }

  VectorXd residuals(const VectorXd& q) const {
    if (!finite(q)) return VectorXd::Constant(static_cast<Eigen::Index>(full.n()), NAN);
    return full.residuals(expand(q));
  }

  MatrixXd jacobian(const VectorXd& q) const {
    MatrixXd J(static_cast<Eigen::Index>(full.n()), q.size());
    for (Eigen::Index k = 0; k < q.size(); ++k) {
      const double h = 1e-6 * std::max(1.0, std::abs(q[k]));
      VectorXd hi = q, lo = q;
      hi[k] += h;
      lo[k] -= h;
      J.col(k) = (residuals(hi) - residuals(lo)) / (2.0 * h);
    }
    return J;
  }
};

// Covariance s^2 (J^T J)^-1, or nothing when J is rank-deficient.
std::optional<MatrixXd> covariance(const Problem& prob, const VectorXd& p, double cost) {
  MatrixXd J = prob.jacobian(p);
  VectorXd scale(J.cols());
  for (Eigen::Index k = 0; k < J.cols(); ++k) {
    scale[k] = J.col(k).norm();
    if (!(scale[k] > 0.0) || !std::isfinite(scale[k])) return std::nullopt;
    J.col(k) /= scale[k];
  }
  Eigen::ColPivHouseholderQR<MatrixXd> qr(J);
  qr.setThreshold(1e-10);
  if (qr.rank() < J.cols()) return std::nullopt;
  const double dof = static_cast<double>(prob.n()) - static_cast<double>(p.size());
  const double s2 = dof > 0.0 ? 2.0 * cost / dof : 0.0;
  const MatrixXd JtJ = J.transpose() * J;
  MatrixXd inv = JtJ.inverse();
  for (Eigen::Index a = 0; a < inv.rows(); ++a)
    for (Eigen::Index b = 0; b < inv.cols(); ++b) inv(a, b) /= scale[a] * scale[b];
  return MatrixXd(s2 * inv);
}

void fill_residuals(BiExpFit& fit, const Problem& prob, const VectorXd& p) {
  const VectorXd r = prob.residuals(p);
  fit.residuals.assign(r.data(), r.data() + r.size());
  fit.residual_norm = r.norm();
}

struct SingleCandidate {
  LmResult lm;
  MatrixXd cov;
};

std::optional<SingleCandidate> single_from(const Problem& prob, double a0, double tau0,
                                           const FitOptions& opt) {
  if (!std::isfinite(a0) || !(tau0 > 0.0) || !std::isfinite(tau0)) return std::nullopt;
  VectorXd p(2);
  p << a0, std::log(tau0);
  LmResult lm = levenberg_marquardt(prob, p, opt);
  if (!finite(lm.p)) return std::nullopt;
  auto cov = covariance(prob, lm.p, lm.cost);
  if (!cov) return std::nullopt;
  return SingleCandidate{std::move(lm), std::move(*cov)};
}

// One-exponential fit started from the dominant component (when usable) and
// from a linear least-squares guess at tau = span/3; the lower cost wins.
BiExpFit single_exponential(const Problem& prob, double a0, double tau0, double span,
                            const FitOptions& opt, std::size_t prior_iterations) {
  const double tau_guess = span / 3.0;
  const double a_guess = linear_amplitudes(prob, {tau_guess})[0];
  auto best = single_from(prob, a0, tau0, opt);
  if (auto alt = single_from(prob, a_guess, tau_guess, opt);
      alt && (!best || alt->lm.cost < best->lm.cost))
    best = std::move(alt);
  if (!best)
    throw DegenerateFitError("rank-deficient Jacobian: the data do not constrain an exponential");
  const LmResult& lm = best->lm;
  const MatrixXd& cov = best->cov;
  BiExpFit fit;
  fit.single_exponential = true;
  fit.a1 = 0.0;
  fit.a2 = lm.p[0];
  fit.tau1_s = fit.tau2_s = std::exp(lm.p[1]);
  fit.se_a2 = std::sqrt(cov(0, 0));
  fit.se_tau1_s = fit.se_tau2_s = fit.tau2_s * std::sqrt(cov(1, 1));
  fit.points = prob.n();
  fit.iterations = prior_iterations + lm.iterations;
  fit.converged = lm.converged;
  fill_residuals(fit, prob, lm.p);
  return fit;
}

}  // namespace

double BiExpFit::evaluate(double t_s) const {
  double v = a2 * std::exp(-t_s / tau2_s);
  if (a1 != 0.0) v += a1 * std::exp(-t_s / tau1_s);
  return v;
}

BiExpFit fit_biexponential(std::span<const double> t_s, std::span<const double> y,
                           const FitOptions& opt) {
  if (t_s.size() != y.size()) throw std::invalid_argument("t and y differ in length");
  std::vector<double> t, v;
  for (std::size_t i = 0; i < t_s.size(); ++i) {
    if (t_s[i] < opt.exclude_before_s) continue;
    if (!std::isfinite(t_s[i]) || !std::isfinite(y[i]))
      throw std::domain_error("fit input must be finite");
    t.push_back(t_s[i]);
    v.push_back(y[i]);
  }
  if (t.size() < 8) throw std::domain_error("bi-exponential fit needs >= 8 points");
  const auto [tmin, tmax] = std::minmax_element(t.begin(), t.end());
  const double span = *tmax - *tmin;
  if (!(span > 0.0)) throw DegenerateFitError("all sample times coincide");

  const Problem prob{t, v};
  const double s = span / 3.0;
  const Projected projected{prob};
  VectorXd q(2);
  q << std::log(0.3 * s), std::log(3.0 * s);
  LmResult lm = levenberg_marquardt(projected, q, opt);
  lm.p = finite(lm.p) ? projected.expand(lm.p) : VectorXd::Constant(4, NAN);

  const double a1 = lm.p[0], a2 = lm.p[2];
  const double tau1 = std::exp(lm.p[1]), tau2 = std::exp(lm.p[3]);
  // Component size over the fitted span, largest at the first point.
  auto size_of = [&](double a, double tau) { return std::abs(a) * std::exp(-*tmin / tau); };
  const double c1 = size_of(a1, tau1), c2 = size_of(a2, tau2);
  // Time constants shorter than the point spacing or far beyond the span are
  // not resolved by the data.
  const double spacing = span / static_cast<double>(t.size() - 1);
  auto resolved = [&](double tau) { return tau >= spacing && tau <= 10.0 * span; };
  const bool usable = finite(lm.p) && resolved(tau1) && resolved(tau2) &&
                      std::isfinite(c1) && std::isfinite(c2);
  const bool first = !(c2 > c1);
  const double a_dom = first ? a1 : a2, tau_dom = first ? tau1 : tau2;
  if (!usable) return single_exponential(prob, a_dom, tau_dom, span, opt, lm.iterations);
  const bool close = std::abs(tau1 - tau2) <= opt.degenerate_tau_fraction * std::max(tau1, tau2);
  if (close) return single_exponential(prob, a1 + a2, 0.5 * (tau1 + tau2), span, opt, lm.iterations);
  const bool vanished = std::max(c1, c2) == 0.0 ||
                        std::min(c1, c2) <= opt.vanishing_amplitude_fraction * std::max(c1, c2);
  if (vanished) return single_exponential(prob, a_dom, tau_dom, span, opt, lm.iterations);
  const auto cov = covariance(prob, lm.p, lm.cost);
  if (!cov) return single_exponential(prob, a_dom, tau_dom, span, opt, lm.iterations);

  BiExpFit fit;
  int i1 = 0, i2 = 1;  // component order after sorting by tau
  if (tau1 > tau2) std::swap(i1, i2);
  fit.a1 = lm.p[2 * i1];
  fit.tau1_s = std::exp(lm.p[2 * i1 + 1]);
  fit.a2 = lm.p[2 * i2];
  fit.tau2_s = std::exp(lm.p[2 * i2 + 1]);
  const MatrixXd& c = *cov;
  fit.se_a1 = std::sqrt(c(2 * i1, 2 * i1));
  fit.se_a2 = std::sqrt(c(2 * i2, 2 * i2));
  fit.se_tau1_s = fit.tau1_s * std::sqrt(c(2 * i1 + 1, 2 * i1 + 1));
  fit.se_tau2_s = fit.tau2_s * std::sqrt(c(2 * i2 + 1, 2 * i2 + 1));
  fit.cov_a1_a2 = c(2 * i1, 2 * i2);
  fit.points = prob.n();
  fit.iterations = lm.iterations;
  fit.converged = lm.converged;
  fill_residuals(fit, prob, lm.p);
  return fit;
}

BiExpFit fit_biexponential(const std::vector<DeltaPPoint>& series, const FitOptions& opt) {
  std::vector<double> t, y;
  for (const auto& pt : series) {
    if (!pt.delta_p_db) continue;
    t.push_back(pt.time_s);
    y.push_back(*pt.delta_p_db);
  }
  return fit_biexponential(t, y, opt);
}

DepthEstimate cooling_depth_from_fit(const BiExpFit& fit) {
  if (!fit.converged) throw NotConvergedError("bi-exponential fit did not converge");
  const double var = fit.se_a1 * fit.se_a1 + fit.se_a2 * fit.se_a2 + 2.0 * fit.cov_a1_a2;
  return {fit.a1 + fit.a2, std::sqrt(std::max(0.0, var))};
}

}  // namespace cpc
