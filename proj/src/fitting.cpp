#include "rdb/fitting.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace rdb {

namespace {

struct XY {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

XY to_logs(const std::vector<std::pair<double, double>>& dim_error) {
  if (dim_error.size() < 4)
    throw InvalidParameter("fit requires at least 4 points");
  XY xy;
  xy.x.resize(static_cast<Eigen::Index>(dim_error.size()));
  xy.y.resize(static_cast<Eigen::Index>(dim_error.size()));
  for (size_t i = 0; i < dim_error.size(); ++i) {
    const auto& [dim, err] = dim_error[i];
    if (dim <= 0 || err <= 0)
      throw InvalidParameter("fit requires positive dimensions and errors");
    xy.x[static_cast<Eigen::Index>(i)] = std::log(dim);
    xy.y[static_cast<Eigen::Index>(i)] = std::log(err);
  }
  return xy;
}

// Least squares with design matrix A, residual covariance for uncertainties.
void linear_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                  Eigen::VectorXd& params, Eigen::VectorXd& sigmas,
                  double& rss) {
  const Eigen::MatrixXd ata = A.transpose() * A;
  if (std::abs(ata.determinant()) < 1e-300)
    throw InvalidParameter("degenerate design matrix");
  params = ata.ldlt().solve(A.transpose() * y);
  const Eigen::VectorXd r = y - A * params;
  rss = r.squaredNorm();
  const Eigen::Index dof = std::max<Eigen::Index>(1, y.size() - A.cols());
  const double s2 = rss / static_cast<double>(dof);
  const Eigen::MatrixXd cov = s2 * ata.inverse();
  sigmas = cov.diagonal().cwiseSqrt();
}

// RSS of Y = c - a X^b at fixed b with the optimal (a, c).
double power_log_rss(const XY& xy, double b, double& a, double& c) {
  Eigen::MatrixXd A(xy.x.size(), 2);
  A.col(0) = -xy.x.array().pow(b);
  A.col(1).setOnes();
  Eigen::VectorXd params, sigmas;
  double rss;
  linear_solve(A, xy.y, params, sigmas, rss);
  a = params[0];
  c = params[1];
  return rss;
}

}  // namespace

FitResult fit_scaling(const std::vector<std::pair<double, double>>& dim_error,
                      FitModel model) {
  const XY xy = to_logs(dim_error);
  FitResult fit;
  fit.model = model;

  if (model == FitModel::Linear) {
    Eigen::MatrixXd A(xy.x.size(), 2);
    A.col(0) = xy.x;
    A.col(1).setOnes();
    Eigen::VectorXd params, sigmas;
    linear_solve(A, xy.y, params, sigmas, fit.rss);
    fit.a = params[0];
    fit.c = params[1];
    fit.da = sigmas[0];
    fit.dc = sigmas[1];
    return fit;
  }

  // Outer scan over the exponent, then golden-section refinement.
  double best_b = 0.5, best_rss = std::numeric_limits<double>::infinity();
  double a = 0.0, c = 0.0;
  for (double b = 0.5; b <= 5.0 + 1e-12; b += 0.01) {
    const double rss = power_log_rss(xy, b, a, c);
    if (rss < best_rss) {
      best_rss = rss;
      best_b = b;
    }
  }
  double lo = std::max(0.5, best_b - 0.01), hi = std::min(5.0, best_b + 0.01);
  const double inv_phi = 0.6180339887498949;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = power_log_rss(xy, x1, a, c), f2 = power_log_rss(xy, x2, a, c);
  while (hi - lo > 1e-9) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = power_log_rss(xy, x1, a, c);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = power_log_rss(xy, x2, a, c);
    }
  }
  fit.b = 0.5 * (lo + hi);
  fit.rss = power_log_rss(xy, fit.b, fit.a, fit.c);

  // Uncertainties from the local Jacobian of (a, b, c).
  Eigen::MatrixXd J(xy.x.size(), 3);
  for (Eigen::Index i = 0; i < xy.x.size(); ++i) {
    const double xb = std::pow(xy.x[i], fit.b);
    J(i, 0) = -xb;
    J(i, 1) = -fit.a * xb * std::log(std::max(xy.x[i], 1e-300));
    J(i, 2) = 1.0;
  }
  const Eigen::MatrixXd jtj = J.transpose() * J;
  const Eigen::Index dof = std::max<Eigen::Index>(1, xy.x.size() - 3);
  const double s2 = fit.rss / static_cast<double>(dof);
  const Eigen::VectorXd sig =
      (s2 * jtj.inverse()).diagonal().cwiseSqrt();
  fit.da = sig[0];
  fit.db = sig[1];
  fit.dc = sig[2];
  return fit;
}

std::string fit_result_to_json(const FitResult& fit) {
  nlohmann::json j;
  j["model"] = fit.model == FitModel::Linear ? "linear" : "power_log";
  j["a"] = fit.a;
  j["b"] = fit.b;
  j["c"] = fit.c;
  j["da"] = fit.da;
  j["db"] = fit.db;
  j["dc"] = fit.dc;
  j["rss"] = fit.rss;
  return j.dump(2);
}

}  // namespace rdb
