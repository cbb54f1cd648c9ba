#pragma once

// Levenberg-Marquardt for box-constrained curve fits of a scalar model
// y = f(x; p) to a SweepDataset.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "femtoemit/dataset.hpp"
#include "femtoemit/errors.hpp"

namespace femtoemit {

/// y = value(x, p), with an optional analytic gradient dy/dp.
struct ParametricModel {
  std::string id;
  std::vector<std::string> param_names;
  std::function<double(double x, std::span<const double> p)> value;
  std::function<void(double x, std::span<const double> p, std::span<double> grad)> gradient;

  std::size_t n_params() const { return param_names.size(); }
};

struct ParameterBounds {
  std::vector<double> lower;
  std::vector<double> upper;
};

enum class ResidualSpace { kLinear, kLog };

enum class SingularPolicy {
  kThrow,          // rank-deficient Jacobian at the optimum is a NumericalError
  kPseudoInverse,  // report covariance from the pseudo-inverse, add a diagnostic
};

struct LeastSquaresOptions {
  std::size_t max_iterations = 200;
  double cost_rtol = 1e-10;
  double grad_tol = 1e-10;
  double initial_damping = 1e-3;
  double damping_factor = 10.0;
  double max_damping = 1e16;
  double fd_step = 1e-6;
  /// Unweighted data only; when unset: log for I-V, linear for polarization.
  std::optional<ResidualSpace> residual_space;
  /// Characteristic magnitude of each parameter. Empty: |init| (or 1).
  std::vector<double> scales;
  SingularPolicy singular = SingularPolicy::kThrow;
};

struct FitResult {
  std::string model_id;
  std::vector<std::string> param_names;
  std::vector<double> params;
  Eigen::MatrixXd covariance;
  std::vector<double> residuals;  // weighted residuals at the optimum
  double cost = 0.0;              // 0.5 * sum(residual^2)
  double chi2_reduced = 0.0;
  std::size_t n_iterations = 0;
  bool converged = false;
  /// max_j |J_j . r| / (|J_j| |r|) at the optimum (0 when r = 0).
  double gradient_norm = 0.0;
  std::vector<double> cost_history;  // cost after every accepted step, initial first
  std::vector<std::string> diagnostics;
  /// Model curves evaluated at the data abscissae.
  std::map<std::string, std::vector<double>> curves;

  std::size_t index_of(const std::string& name) const {
    const auto it = std::find(param_names.begin(), param_names.end(), name);
    if (it == param_names.end()) throw std::out_of_range("FitResult: no parameter " + name);
    return static_cast<std::size_t>(it - param_names.begin());
  }
  double param(const std::string& name) const { return params[index_of(name)]; }
  double sigma(const std::string& name) const {
    const auto i = static_cast<Eigen::Index>(index_of(name));
    return std::sqrt(std::max(0.0, covariance(i, i)));
  }
  double correlation(const std::string& a, const std::string& b) const {
    const auto i = static_cast<Eigen::Index>(index_of(a));
    const auto j = static_cast<Eigen::Index>(index_of(b));
    const double d = std::sqrt(covariance(i, i) * covariance(j, j));
    return d > 0.0 ? covariance(i, j) / d : 0.0;
  }
};

namespace detail {

class LsqProblem {
 public:
  LsqProblem(const ParametricModel& model, const SweepDataset& data, std::vector<double> scales,
             ResidualSpace space, double fd_step)
      : model_(model), data_(data), scales_(std::move(scales)), space_(space), fd_step_(fd_step) {}

  std::size_t n_data() const { return data_.size(); }
  std::size_t n_params() const { return scales_.size(); }

  std::vector<double> unscale(const Eigen::VectorXd& q) const {
    std::vector<double> p(n_params());
    for (std::size_t j = 0; j < p.size(); ++j) p[j] = q[static_cast<Eigen::Index>(j)] * scales_[j];
    return p;
  }

  Eigen::VectorXd residuals(const Eigen::VectorXd& q) const {
    const auto p = unscale(q);
    Eigen::VectorXd r(static_cast<Eigen::Index>(n_data()));
    for (std::size_t i = 0; i < n_data(); ++i) r[static_cast<Eigen::Index>(i)] = residual(i, p);
    return r;
  }

  // Jacobian of the residuals with respect to the scaled parameters.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& q) const {
    const auto n = static_cast<Eigen::Index>(n_data());
    const auto m = static_cast<Eigen::Index>(n_params());
    Eigen::MatrixXd jac(n, m);
    const auto p = unscale(q);
    if (model_.gradient) {
      std::vector<double> grad(n_params());
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        model_.gradient(data_.x[ui], p, grad);
        const double dres_dy = residual_slope(ui, p);
        for (Eigen::Index j = 0; j < m; ++j) {
          const auto uj = static_cast<std::size_t>(j);
          jac(i, j) = dres_dy * grad[uj] * scales_[uj];
        }
      }
      return jac;
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      const double hstep = fd_step_ * std::max(1.0, std::abs(q[j]));
      Eigen::VectorXd qp = q, qm = q;
      qp[j] += hstep;
      qm[j] -= hstep;
      jac.col(j) = (residuals(qp) - residuals(qm)) / (2.0 * hstep);
    }
    return jac;
  }

 private:
  double weight(std::size_t i) const { return data_.has_sigma() ? 1.0 / data_.sigma_y[i] : 1.0; }

  double residual(std::size_t i, const std::vector<double>& p) const {
    const double y_model = model_.value(data_.x[i], p);
    if (space_ == ResidualSpace::kLog) {
      return std::log(std::max(y_model, std::numeric_limits<double>::min())) - std::log(data_.y[i]);
    }
    return (y_model - data_.y[i]) * weight(i);
  }

  // d residual / d model value
  double residual_slope(std::size_t i, const std::vector<double>& p) const {
    if (space_ == ResidualSpace::kLog) {
      return 1.0 / std::max(model_.value(data_.x[i], p), std::numeric_limits<double>::min());
    }
    return weight(i);
  }

  const ParametricModel& model_;
  const SweepDataset& data_;
  std::vector<double> scales_;
  ResidualSpace space_;
  double fd_step_;
};

inline double stationarity(const Eigen::MatrixXd& jac, const Eigen::VectorXd& r) {
  const double rn = r.norm();
  if (rn == 0.0) return 0.0;
  double g = 0.0;
  for (Eigen::Index j = 0; j < jac.cols(); ++j) {
    const double cn = jac.col(j).norm();
    if (cn > 0.0) g = std::max(g, std::abs(jac.col(j).dot(r)) / (cn * rn));
  }
  return g;
}

}  // namespace detail

/// Weighted nonlinear least squares. Residuals are (f - y)/sigma when the
/// dataset carries uncertainties, otherwise log- or linear-space
/// differences. Deterministic for identical inputs.
inline FitResult least_squares(const ParametricModel& model, const SweepDataset& data,
                               std::vector<double> init,
                               const std::optional<ParameterBounds>& bounds = std::nullopt,
                               const LeastSquaresOptions& opt = {}) {
  const std::size_t np = model.n_params();
  if (init.size() != np) throw std::invalid_argument("least_squares: init has wrong length");
  if (data.size() < np) throw DataError("least_squares: fewer data points than parameters");
  data.validate();

  ResidualSpace space = ResidualSpace::kLinear;
  if (!data.has_sigma()) {
    space = opt.residual_space.value_or(data.kind == SweepKind::kIv ? ResidualSpace::kLog
                                                                    : ResidualSpace::kLinear);
  }
  if (space == ResidualSpace::kLog) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!(data.y[i] > 0.0)) {
        throw DataError("least_squares: log residuals need y > 0 at row " +
                            std::to_string(data.row_of(i)),
                        data.row_of(i));
      }
    }
  }

  std::vector<double> scales = opt.scales;
  if (scales.empty()) {
    for (double v : init) scales.push_back(v != 0.0 ? std::abs(v) : 1.0);
  }
  if (scales.size() != np) throw std::invalid_argument("least_squares: scales have wrong length");

  Eigen::VectorXd lo = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(np),
                                                 -std::numeric_limits<double>::infinity());
  Eigen::VectorXd hi = -lo;
  if (bounds) {
    for (std::size_t j = 0; j < np; ++j) {
      const auto ej = static_cast<Eigen::Index>(j);
      if (j < bounds->lower.size()) lo[ej] = bounds->lower[j] / scales[j];
      if (j < bounds->upper.size()) hi[ej] = bounds->upper[j] / scales[j];
      if (init[j] < bounds->lower.at(j) || init[j] > bounds->upper.at(j)) {
        throw std::invalid_argument("least_squares: init outside bounds for " + model.param_names[j]);
      }
    }
  }
  const auto project = [&](Eigen::VectorXd q) { return q.cwiseMax(lo).cwiseMin(hi); };

  detail::LsqProblem problem(model, data, scales, space, opt.fd_step);
  Eigen::VectorXd q(static_cast<Eigen::Index>(np));
  for (std::size_t j = 0; j < np; ++j) q[static_cast<Eigen::Index>(j)] = init[j] / scales[j];

  Eigen::VectorXd r = problem.residuals(q);
  double cost = 0.5 * r.squaredNorm();
  if (!std::isfinite(cost)) throw NumericalError("least_squares: non-finite cost at the initial point");

  FitResult out;
  out.model_id = model.id;
  out.param_names = model.param_names;
  out.cost_history.push_back(cost);

  double damping = opt.initial_damping;
  Eigen::MatrixXd jac = problem.jacobian(q);
  std::size_t it = 0;
  for (; it < opt.max_iterations; ++it) {
    if (detail::stationarity(jac, r) <= opt.grad_tol) {
      out.converged = true;
      break;
    }
    const Eigen::VectorXd g = jac.transpose() * r;
    const Eigen::MatrixXd a = jac.transpose() * jac;
    Eigen::VectorXd diag = a.diagonal();
    const double diag_floor = std::max(1e-12 * diag.maxCoeff(), std::numeric_limits<double>::min());
    diag = diag.cwiseMax(diag_floor);

    bool accepted = false;
    while (damping <= opt.max_damping) {
      Eigen::MatrixXd damped = a;
      damped.diagonal() += damping * diag;
      const Eigen::VectorXd step = damped.ldlt().solve(-g);
      const Eigen::VectorXd q_new = project(q + step);
      const Eigen::VectorXd r_new = problem.residuals(q_new);
      const double cost_new = 0.5 * r_new.squaredNorm();
      if (std::isfinite(cost_new) && cost_new < cost) {
        const double rel_change = (cost - cost_new) / cost;
        q = q_new;
        r = r_new;
        cost = cost_new;
        jac = problem.jacobian(q);
        damping = std::max(damping / opt.damping_factor, 1e-15);
        out.cost_history.push_back(cost);
        accepted = true;
        if (rel_change < opt.cost_rtol || cost == 0.0) out.converged = true;
        break;
      }
      damping *= opt.damping_factor;
    }
    if (out.converged) {
      ++it;
      break;
    }
    if (!accepted) {
      // No downhill step at any damping: q is a (constrained) stationary point
      // to working precision.
      out.diagnostics.push_back("damping limit reached without a cost decrease");
      out.converged = true;
      break;
    }
  }
  if (!out.converged) {
    out.diagnostics.push_back("no convergence after " + std::to_string(opt.max_iterations) +
                              " iterations");
  }

  out.n_iterations = it;
  out.params = problem.unscale(q);
  out.cost = cost;
  out.residuals.assign(r.data(), r.data() + r.size());
  out.gradient_norm = detail::stationarity(jac, r);
  const auto dof = data.size() > np ? data.size() - np : std::size_t{1};
  out.chi2_reduced = 2.0 * cost / static_cast<double>(dof);

  // Covariance (J^T J)^-1 * chi2_red in scaled coordinates, then unscaled.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double smax = s.size() > 0 ? s[0] : 0.0;
  const double cutoff = 1e-12 * smax;
  Eigen::VectorXd inv_s2 = Eigen::VectorXd::Zero(s.size());
  bool singular = !(smax > 0.0);
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s[k] > cutoff && smax > 0.0) {
      inv_s2[k] = 1.0 / (s[k] * s[k]);
    } else {
      singular = true;
    }
  }
  if (singular) {
    if (opt.singular == SingularPolicy::kThrow) {
      throw NumericalError("least_squares: singular Jacobian at the optimum of model " + model.id);
    }
    out.diagnostics.push_back("singular Jacobian: covariance from pseudo-inverse");
  }
  const Eigen::MatrixXd& v = svd.matrixV();
  Eigen::MatrixXd cov = v * inv_s2.asDiagonal() * v.transpose() * out.chi2_reduced;
  for (Eigen::Index i = 0; i < cov.rows(); ++i) {
    for (Eigen::Index j = 0; j < cov.cols(); ++j) {
      cov(i, j) *= scales[static_cast<std::size_t>(i)] * scales[static_cast<std::size_t>(j)];
    }
  }
  out.covariance = 0.5 * (cov + cov.transpose());
  return out;
}

}  // namespace femtoemit
