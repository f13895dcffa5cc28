#ifndef RDB_OBSERVABLES_HPP
#define RDB_OBSERVABLES_HPP

#include <iosfwd>

#include "rdb/variational.hpp"

namespace rdb {

enum class BasisMode { Electric, Dual, Rdb, ImprovedRdb };

const char* basis_mode_name(BasisMode mode);

/// One scan result: coupling, truncation label, basis mode, dimension,
/// ground energy, plaquette expectation and (when a reference is set)
/// the relative plaquette error.
struct ScanRow {
  double beta = 0.0;
  double g = 0.0;
  std::string scheme;
  std::string mode;
  int dim = 0;
  double energy = 0.0;
  double plaquette = 0.0;
  std::optional<double> rel_error;
  std::vector<double> g_opt;
  bool is_reference = false;
};

/// Solve one (model, scheme, basis-mode) point. Rdb optimizes a shared
/// basis parameter; ImprovedRdb additionally enforces the even joint-parity
/// sector (and any n_max already present in the scheme).
ScanRow run_point(const LatticeModel& model, TruncationScheme scheme,
                  BasisMode mode, Workspace& ws,
                  OptMode opt_mode = OptMode::Shared);

enum class ReferenceRule { FixedLmax, EnergyMin };

/// Relative-precision scan: for every beta, every scheme and every basis
/// mode, compute the plaquette error against a per-beta reference computed
/// at ref_l_max with the RDB (FixedLmax) or against the energy-minimizing
/// row among all runs at that beta (EnergyMin).
std::vector<ScanRow> relative_precision_scan(
    LatticeModel model, const std::vector<double>& betas,
    const std::vector<TruncationScheme>& schemes,
    const std::vector<BasisMode>& modes, ReferenceRule rule, int ref_l_max,
    Workspace& ws);

/// QED sweep over (beta, m, kappa): optimize the RDB at l_max_test and
/// l_max_ref and record the relative plaquette error between them.
struct QedSweepRow {
  double beta = 0.0;
  double m = 0.0;
  double kappa = 0.0;
  int l_max_test = 0;
  int l_max_ref = 0;
  double plaquette_test = 0.0;
  double plaquette_ref = 0.0;
  double rel_error = 0.0;
};

std::vector<QedSweepRow> qed_parameter_sweep(
    const LatticeModel& model_template, const std::vector<double>& betas,
    const std::vector<double>& masses, const std::vector<double>& kappas,
    int l_max_test, int l_max_ref, Workspace& ws);

/// Fixed-header CSV: beta,g,scheme,mode,dim,energy,plaquette,rel_error,g_opt
void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows);
void write_qed_csv(std::ostream& os, const std::vector<QedSweepRow>& rows);

/// Reproducible shortest-round-trip double formatting for all text output.
std::string format_double(double v);

}  // namespace rdb

#endif
