#ifndef RDB_SOLVER_HPP
#define RDB_SOLVER_HPP

#include <string>

#include "rdb/state_space.hpp"

namespace rdb {

struct NonHermitianError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverOptions {
  uint64_t seed = 0x5EED;
  int max_matvecs = 5000;
  int dense_threshold = 512;   // dense eigensolve below this dimension
  double tol = 1e-10;          // residual <= tol * max(1, |E|)
  bool force_dense = false;
  bool force_lanczos = false;
};

struct GroundStateResult {
  double energy = 0.0;
  Eigen::VectorXcd vector;
  double residual = 0.0;
  int iterations = 0;
  double hermiticity_correction = 0.0;
  double first_gap = 0.0;
  bool degenerate_flag = false;
  std::string method;
};

/// Lowest eigenpair of a sparse Hermitian matrix: dense eigensolve for
/// small dimensions, restarted Lanczos with full reorthogonalization
/// otherwise. Deterministic given the seed in opts. The input is averaged
/// with its adjoint before solving; the correction norm is recorded.
GroundStateResult ground_state(const SparseMatrixXcd& h,
                               const SolverOptions& opts = {});

}  // namespace rdb

#endif
