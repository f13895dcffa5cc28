#include "rdb/solver.hpp"

#include <cmath>
#include <random>

#include <Eigen/Dense>

namespace rdb {

namespace {

Eigen::VectorXcd start_vector(int dim, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXcd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = Complex(u(rng), u(rng));
  v.normalize();
  return v;
}

void probe_hermiticity(const SparseMatrixXcd& h, uint64_t seed) {
  const int dim = static_cast<int>(h.rows());
  Eigen::VectorXcd x = start_vector(dim, seed ^ 0x9E3779B97F4A7C15ull);
  Eigen::VectorXcd y = start_vector(dim, seed ^ 0xD1B54A32D192ED03ull);
  const Complex a = x.dot(h * y);
  const Complex b = y.dot(h * x);
  const double scale = std::max(1.0, std::max(std::abs(a), std::abs(b)));
  if (std::abs(a - std::conj(b)) > 1e-10 * scale)
    throw NonHermitianError("matrix fails the random-vector Hermiticity probe");
}

GroundStateResult dense_solve(const SparseMatrixXcd& h) {
  Eigen::MatrixXcd dense(h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
  GroundStateResult r;
  r.energy = es.eigenvalues()[0];
  r.vector = es.eigenvectors().col(0);
  r.residual = (dense * r.vector - r.energy * r.vector).norm();
  r.iterations = 0;
  r.first_gap = dense.rows() > 1 ? es.eigenvalues()[1] - es.eigenvalues()[0]
                                 : std::numeric_limits<double>::infinity();
  r.method = "dense";
  return r;
}

GroundStateResult lanczos_solve(const SparseMatrixXcd& h,
                                const SolverOptions& opts) {
  const int dim = static_cast<int>(h.rows());
  const int m = std::min(dim, 50);
  Eigen::VectorXcd v = start_vector(dim, opts.seed);
  GroundStateResult r;
  r.method = "lanczos";
  int matvecs = 0;
  double prev_ritz = std::numeric_limits<double>::infinity();

  while (matvecs < opts.max_matvecs) {
    std::vector<Eigen::VectorXcd> basis;
    basis.reserve(static_cast<size_t>(m));
    Eigen::VectorXd alpha(m), beta(m);
    basis.push_back(v);
    int k = 0;
    for (; k < m && matvecs < opts.max_matvecs; ++k) {
      Eigen::VectorXcd w = h * basis[static_cast<size_t>(k)];
      ++matvecs;
      alpha[k] = std::real(basis[static_cast<size_t>(k)].dot(w));
      // Full reorthogonalization, two passes.
      for (int pass = 0; pass < 2; ++pass)
        for (const Eigen::VectorXcd& q : basis) w -= q.dot(w) * q;
      beta[k] = w.norm();
      if (beta[k] < 1e-13 || k + 1 == m) {
        ++k;
        break;
      }
      basis.push_back(w / beta[k]);
    }

    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      tri(i, i) = alpha[i];
      if (i + 1 < k) tri(i, i + 1) = tri(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    Eigen::VectorXcd ritz = Eigen::VectorXcd::Zero(dim);
    for (int i = 0; i < k; ++i)
      ritz += es.eigenvectors()(i, 0) * basis[static_cast<size_t>(i)];
    ritz.normalize();
    const double theta = es.eigenvalues()[0];
    const double resid = (h * ritz - theta * ritz).norm();
    ++matvecs;
    if (resid <= opts.tol * std::max(1.0, std::abs(theta)) ||
        std::abs(theta - prev_ritz) < 1e-16 * std::max(1.0, std::abs(theta))) {
      r.energy = theta;
      r.vector = ritz;
      r.residual = resid;
      r.iterations = matvecs;
      r.first_gap = k > 1 ? es.eigenvalues()[1] - es.eigenvalues()[0]
                          : std::numeric_limits<double>::infinity();
      if (resid > opts.tol * std::max(1.0, std::abs(theta)))
        throw NoConvergenceError("Lanczos stagnated above tolerance");
      return r;
    }
    prev_ritz = theta;
    v = ritz;
  }
  throw NoConvergenceError("Lanczos did not converge within the matvec budget");
}

}  // namespace

GroundStateResult ground_state(const SparseMatrixXcd& h,
                               const SolverOptions& opts) {
  if (h.rows() != h.cols()) throw InvalidParameter("matrix must be square");
  probe_hermiticity(h, opts.seed);
  SparseMatrixXcd ht = h.adjoint();
  SparseMatrixXcd hs = Complex(0.5, 0.0) * (h + ht);
  const double correction = 0.5 * SparseMatrixXcd(h - ht).norm();

  GroundStateResult r;
  const bool dense = !opts.force_lanczos &&
                     (opts.force_dense || h.rows() < opts.dense_threshold);
  r = dense ? dense_solve(hs) : lanczos_solve(hs, opts);
  r.hermiticity_correction = correction;
  r.degenerate_flag = r.first_gap < 1e-8 * std::abs(r.energy);
  return r;
}

}  // namespace rdb
