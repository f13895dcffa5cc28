#ifndef RDB_VARIATIONAL_HPP
#define RDB_VARIATIONAL_HPP

#include <map>
#include <memory>

#include "rdb/dual_hamiltonians.hpp"
#include "rdb/solver.hpp"

namespace rdb {

/// Shared cache of single-plaquette solves. Operator tables are immutable
/// once built; recomputation at each requested g_basis is exact (no grid
/// interpolation) and cheap.
class Workspace {
 public:
  /// Table at basis parameter g_basis (margin-rule n_trunc). An infinite
  /// g_basis selects the electric basis member of the family.
  std::shared_ptr<const OperatorTable> table(double g_basis, int l_max);

 private:
  std::map<std::pair<double, int>, std::shared_ptr<const OperatorTable>> cache_;
};

/// Sentinel basis parameter for the electric basis.
inline double electric_basis_parameter() {
  return std::numeric_limits<double>::infinity();
}

struct SolveOutput {
  GroundStateResult gs;
  double energy = 0.0;
  double plaquette = 0.0;
  int dim = 0;
  std::string label;
};

/// Project the model Hamiltonian onto the tensor-product basis at the given
/// per-slot basis parameters (a single entry is shared across slots) and
/// compute ground energy plus plaquette expectation.
SolveOutput solve_model(const LatticeModel& model,
                        const TruncationScheme& scheme,
                        const std::vector<double>& g_vec, Workspace& ws,
                        bool qed_charge_zero = true,
                        const SolverOptions& opts = {});

double evaluate_energy(const LatticeModel& model,
                       const TruncationScheme& scheme,
                       const std::vector<double>& g_vec, Workspace& ws);

enum class OptMode { Shared, PerSlot };

struct VariationalResult {
  std::vector<double> g_opt;
  double energy = 0.0;
  int evaluations = 0;
  std::vector<std::pair<std::vector<double>, double>> trace;
  bool converged = false;
  bool boundary_hit = false;
};

/// Minimize the truncated ground energy over the basis parameters.
/// Shared mode: coarse log grid then golden-section search; per-slot mode:
/// coordinate descent from the shared optimum with simplex refinement.
/// The dual point g_vec = g is always evaluated and kept in the trace.
VariationalResult optimize(const LatticeModel& model,
                           const TruncationScheme& scheme, OptMode mode,
                           Workspace& ws, int coarse_points = 13);

}  // namespace rdb

#endif
