#include "rdb/observables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace rdb {

const char* basis_mode_name(BasisMode mode) {
  switch (mode) {
    case BasisMode::Electric: return "electric";
    case BasisMode::Dual: return "dual";
    case BasisMode::Rdb: return "rdb";
    case BasisMode::ImprovedRdb: return "improved_rdb";
  }
  return "?";
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

ScanRow run_point(const LatticeModel& model, TruncationScheme scheme,
                  BasisMode mode, Workspace& ws, OptMode opt_mode) {
  if (mode == BasisMode::ImprovedRdb) scheme.parity = ParitySector::Even;

  ScanRow row;
  row.beta = beta_from_g(model.g);
  row.g = model.g;
  row.mode = basis_mode_name(mode);

  SolveOutput out;
  switch (mode) {
    case BasisMode::Electric:
      out = solve_model(model, scheme, {electric_basis_parameter()}, ws);
      break;
    case BasisMode::Dual:
      out = solve_model(model, scheme, {model.g}, ws);
      break;
    case BasisMode::Rdb:
    case BasisMode::ImprovedRdb: {
      VariationalResult opt = optimize(model, scheme, opt_mode, ws);
      out = solve_model(model, scheme, opt.g_opt, ws);
      row.g_opt = opt.g_opt;
      break;
    }
  }
  row.scheme = out.label;
  row.dim = out.dim;
  row.energy = out.energy;
  row.plaquette = out.plaquette;
  return row;
}

std::vector<ScanRow> relative_precision_scan(
    LatticeModel model, const std::vector<double>& betas,
    const std::vector<TruncationScheme>& schemes,
    const std::vector<BasisMode>& modes, ReferenceRule rule, int ref_l_max,
    Workspace& ws) {
  std::vector<ScanRow> rows;
  for (double beta : betas) {
    model.g = g_from_beta(beta);
    std::vector<ScanRow> at_beta;
    for (const TruncationScheme& scheme : schemes)
      for (BasisMode mode : modes)
        at_beta.push_back(run_point(model, scheme, mode, ws));

    ScanRow reference;
    if (rule == ReferenceRule::FixedLmax) {
      reference = run_point(model, TruncationScheme{ref_l_max, {}, ParitySector::Both},
                            BasisMode::Rdb, ws);
      reference.is_reference = true;
    } else {
      // Lowest energy among the available runs wins.
      const auto it = std::min_element(
          at_beta.begin(), at_beta.end(),
          [](const ScanRow& a, const ScanRow& b) { return a.energy < b.energy; });
      reference = *it;
      reference.is_reference = true;
    }
    for (ScanRow& row : at_beta) {
      row.rel_error = std::abs(row.plaquette - reference.plaquette) /
                      std::abs(reference.plaquette);
      if (rule == ReferenceRule::EnergyMin && row.scheme == reference.scheme &&
          row.mode == reference.mode)
        row.is_reference = true;
    }
    if (rule == ReferenceRule::FixedLmax) {
      reference.rel_error = 0.0;
      at_beta.push_back(reference);
    }
    rows.insert(rows.end(), at_beta.begin(), at_beta.end());
  }
  // Deterministic output order.
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ScanRow& a, const ScanRow& b) {
                     if (a.beta != b.beta) return a.beta < b.beta;
                     if (a.scheme != b.scheme) return a.scheme < b.scheme;
                     return a.mode < b.mode;
                   });
  return rows;
}

std::vector<QedSweepRow> qed_parameter_sweep(
    const LatticeModel& model_template, const std::vector<double>& betas,
    const std::vector<double>& masses, const std::vector<double>& kappas,
    int l_max_test, int l_max_ref, Workspace& ws) {
  if (model_template.matter != Matter::Staggered)
    throw UnsupportedModel("qed sweep requires the staggered 2x2 model");
  std::vector<QedSweepRow> rows;
  for (double beta : betas)
    for (double m : masses)
      for (double kappa : kappas) {
        LatticeModel model = model_template;
        model.g = g_from_beta(beta);
        model.m = m;
        model.kappa = kappa;
        QedSweepRow row;
        row.beta = beta;
        row.m = m;
        row.kappa = kappa;
        row.l_max_test = l_max_test;
        row.l_max_ref = l_max_ref;
        ScanRow test = run_point(model, TruncationScheme{l_max_test, {}, ParitySector::Both},
                                 BasisMode::Rdb, ws);
        ScanRow ref = run_point(model, TruncationScheme{l_max_ref, {}, ParitySector::Both},
                                BasisMode::Rdb, ws);
        row.plaquette_test = test.plaquette;
        row.plaquette_ref = ref.plaquette;
        row.rel_error = std::abs(test.plaquette - ref.plaquette) /
                        std::abs(ref.plaquette);
        rows.push_back(row);
      }
  return rows;
}

void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows) {
  os << "beta,g,scheme,mode,dim,energy,plaquette,rel_error,g_opt\n";
  for (const ScanRow& row : rows) {
    os << format_double(row.beta) << ',' << format_double(row.g) << ','
       << row.scheme << ',' << row.mode << ',' << row.dim << ','
       << format_double(row.energy) << ',' << format_double(row.plaquette)
       << ',';
    if (row.rel_error) os << format_double(*row.rel_error);
    os << ',';
    for (size_t i = 0; i < row.g_opt.size(); ++i) {
      if (i) os << ';';
      os << format_double(row.g_opt[i]);
    }
    os << '\n';
  }
}

void write_qed_csv(std::ostream& os, const std::vector<QedSweepRow>& rows) {
  os << "beta,m,kappa,l_max_test,l_max_ref,plaquette_test,plaquette_ref,rel_error\n";
  for (const QedSweepRow& row : rows) {
    os << format_double(row.beta) << ',' << format_double(row.m) << ','
       << format_double(row.kappa) << ',' << row.l_max_test << ','
       << row.l_max_ref << ',' << format_double(row.plaquette_test) << ','
       << format_double(row.plaquette_ref) << ','
       << format_double(row.rel_error) << '\n';
  }
}

}  // namespace rdb
