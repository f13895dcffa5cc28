// rdb: command-line surface for the renormalized-dual-basis pipelines.
//
// Subcommands: spb, torus-scan, obc-run, qed-run, qed-sweep, fit.
// Every run writes its fully resolved configuration next to the output
// (<out>.config.json); a JSON config file can preset any flag, with
// explicit flags winning. Outputs are byte-identical across repeated runs.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rdb/fitting.hpp"
#include "rdb/observables.hpp"

using json = nlohmann::ordered_json;

namespace {

constexpr int kExitParam = 2;
constexpr int kExitNumeric = 3;

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw rdb::InvalidParameter("config file not readable: " + path);
  json cfg;
  in >> cfg;
  return cfg;
}

// Config value fills in any flag the user did not pass explicitly.
template <typename T>
void merge(const CLI::App* cmd, const std::string& flag, const json& cfg,
           const std::string& key, T& var) {
  if (cmd->count(flag) == 0 && cfg.contains(key)) var = cfg.at(key).get<T>();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void write_resolved_config(const std::string& out_path, const json& cfg) {
  write_text(out_path + ".config.json", cfg.dump(2) + "\n");
}

rdb::BasisMode parse_mode(const std::string& name) {
  if (name == "electric") return rdb::BasisMode::Electric;
  if (name == "dual") return rdb::BasisMode::Dual;
  if (name == "rdb") return rdb::BasisMode::Rdb;
  if (name == "improved_rdb") return rdb::BasisMode::ImprovedRdb;
  throw rdb::InvalidParameter("unknown basis mode: " + name);
}

rdb::ParitySector parse_parity(const std::string& name) {
  if (name == "both") return rdb::ParitySector::Both;
  if (name == "even") return rdb::ParitySector::Even;
  if (name == "odd") return rdb::ParitySector::Odd;
  throw rdb::InvalidParameter("unknown parity sector: " + name);
}

rdb::TruncationScheme make_scheme(int l_max, int n_max,
                                  const std::string& parity) {
  rdb::TruncationScheme scheme;
  scheme.l_max = l_max;
  if (n_max >= 0) scheme.n_max = n_max;
  scheme.parity = parse_parity(parity);
  return scheme;
}

json row_to_json(const rdb::ScanRow& row) {
  json j;
  j["beta"] = row.beta;
  j["g"] = row.g;
  j["scheme"] = row.scheme;
  j["mode"] = row.mode;
  j["dim"] = row.dim;
  j["energy"] = row.energy;
  j["plaquette"] = row.plaquette;
  if (row.rel_error) j["rel_error"] = *row.rel_error;
  if (!row.g_opt.empty()) j["g_opt"] = row.g_opt;
  return j;
}

// ---------------------------------------------------------------- spb ----

int cmd_spb(const CLI::App* cmd, double g, int l_max, int n_trunc,
            const std::string& config_path, std::string out, int threads) {
  const json cfg_in = load_config(config_path);
  merge(cmd, "--g", cfg_in, "g", g);
  merge(cmd, "--l-max", cfg_in, "l_max", l_max);
  merge(cmd, "--n-trunc", cfg_in, "n_trunc", n_trunc);
  merge(cmd, "--out", cfg_in, "out", out);

  if (g < 1e-3 || g > 1e3)
    throw rdb::InvalidParameter("g out of bounds [1e-3, 1e3]");
  rdb::PlaquetteEigenbasis basis =
      n_trunc > 0 ? rdb::solve_single_plaquette(
                        g, rdb::FourierTruncation{n_trunc}, l_max)
                  : rdb::solve_single_plaquette(g, l_max);
  rdb::OperatorTable table = rdb::build_operator_table(basis);

  json j;
  j["g"] = g;
  j["l_max"] = l_max;
  j["n_trunc"] = basis.fourier_truncation.n_trunc;
  j["energies"] = basis.energies;
  json parities = json::array();
  for (rdb::Parity p : basis.parities)
    parities.push_back(p == rdb::Parity::Even ? "even" : "odd");
  j["parities"] = parities;
  json coeffs = json::array();
  for (const auto& v : basis.coefficients)
    coeffs.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  j["coefficients"] = coeffs;
  auto real_matrix = [](const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      std::vector<double> row(m.cols());
      for (Eigen::Index k = 0; k < m.cols(); ++k)
        row[static_cast<size_t>(k)] = m(i, k);
      rows.push_back(row);
    }
    return rows;
  };
  j["tables"]["e2"] = real_matrix(table.e2);
  j["tables"]["cos"] = real_matrix(table.cos_m);
  j["tables"]["sin"] = real_matrix(table.sin_m);
  j["tables"]["e_imag"] = real_matrix(table.e.imag());
  write_text(out, j.dump(2) + "\n");

  json cfg;
  cfg["command"] = "spb";
  cfg["g"] = g;
  cfg["l_max"] = l_max;
  cfg["n_trunc"] = n_trunc;
  cfg["out"] = out;
  cfg["threads"] = threads;
  write_resolved_config(out, cfg);
  return 0;
}

// --------------------------------------------------------- torus-scan ----

int cmd_torus_scan(const CLI::App* cmd, std::vector<double> betas,
                   std::vector<int> l_max, int n_max, std::string parity,
                   std::vector<std::string> modes, std::string reference,
                   int ref_l_max, const std::string& config_path,
                   std::string out, int threads) {
  const json cfg_in = load_config(config_path);
  merge(cmd, "--beta", cfg_in, "beta", betas);
  merge(cmd, "--l-max", cfg_in, "l_max", l_max);
  merge(cmd, "--n-max", cfg_in, "n_max", n_max);
  merge(cmd, "--parity", cfg_in, "parity", parity);
  merge(cmd, "--mode", cfg_in, "mode", modes);
  merge(cmd, "--reference", cfg_in, "reference", reference);
  merge(cmd, "--ref-l-max", cfg_in, "ref_l_max", ref_l_max);
  merge(cmd, "--out", cfg_in, "out", out);

  if (betas.empty()) throw rdb::InvalidParameter("empty beta grid");
  if (l_max.empty()) throw rdb::InvalidParameter("empty l_max list");
  if (modes.empty()) throw rdb::InvalidParameter("empty mode list");
  rdb::ReferenceRule rule;
  if (reference == "fixed")
    rule = rdb::ReferenceRule::FixedLmax;
  else if (reference == "energy-min")
    rule = rdb::ReferenceRule::EnergyMin;
  else
    throw rdb::InvalidParameter("unknown reference rule: " + reference);

  std::vector<rdb::TruncationScheme> schemes;
  for (int l : l_max) schemes.push_back(make_scheme(l, n_max, parity));
  std::vector<rdb::BasisMode> mode_list;
  for (const std::string& m : modes) mode_list.push_back(parse_mode(m));

  rdb::LatticeModel model;  // 2x2 periodic torus
  rdb::Workspace ws;
  std::vector<rdb::ScanRow> rows = rdb::relative_precision_scan(
      model, betas, schemes, mode_list, rule, ref_l_max, ws);
  std::ostringstream csv;
  rdb::write_scan_csv(csv, rows);
  write_text(out, csv.str());

  json cfg;
  cfg["command"] = "torus-scan";
  cfg["beta"] = betas;
  cfg["l_max"] = l_max;
  cfg["n_max"] = n_max;
  cfg["parity"] = parity;
  cfg["mode"] = modes;
  cfg["reference"] = reference;
  cfg["ref_l_max"] = ref_l_max;
  cfg["out"] = out;
  cfg["threads"] = threads;
  write_resolved_config(out, cfg);
  return 0;
}

// ------------------------------------------------------------ obc-run ----

int cmd_obc_run(const CLI::App* cmd, int nx, int ny, double beta, int l_max,
                std::string mode, const std::string& config_path,
                std::string out, int threads) {
  const json cfg_in = load_config(config_path);
  merge(cmd, "--nx", cfg_in, "nx", nx);
  merge(cmd, "--ny", cfg_in, "ny", ny);
  merge(cmd, "--beta", cfg_in, "beta", beta);
  merge(cmd, "--l-max", cfg_in, "l_max", l_max);
  merge(cmd, "--mode", cfg_in, "mode", mode);
  merge(cmd, "--out", cfg_in, "out", out);

  if (beta <= 0) throw rdb::InvalidParameter("beta must be positive");
  rdb::LatticeModel model;
  model.nx = nx;
  model.ny = ny;
  model.boundary = rdb::Boundary::Open;
  model.g = rdb::g_from_beta(beta);
  rdb::build_model(model);  // geometry guard before any heavy work
  rdb::Workspace ws;
  rdb::ScanRow row = rdb::run_point(
      model, make_scheme(l_max, -1, "both"), parse_mode(mode), ws);
  write_text(out, row_to_json(row).dump(2) + "\n");

  json cfg;
  cfg["command"] = "obc-run";
  cfg["nx"] = nx;
  cfg["ny"] = ny;
  cfg["beta"] = beta;
  cfg["l_max"] = l_max;
  cfg["mode"] = mode;
  cfg["out"] = out;
  cfg["threads"] = threads;
  write_resolved_config(out, cfg);
  return 0;
}

// ------------------------------------------------------------ qed-run ----

int cmd_qed_run(const CLI::App* cmd, double beta, double m, double kappa,
                int l_max, std::string mode, const std::string& config_path,
                std::string out, int threads) {
  const json cfg_in = load_config(config_path);
  merge(cmd, "--beta", cfg_in, "beta", beta);
  merge(cmd, "--m", cfg_in, "m", m);
  merge(cmd, "--kappa", cfg_in, "kappa", kappa);
  merge(cmd, "--l-max", cfg_in, "l_max", l_max);
  merge(cmd, "--mode", cfg_in, "mode", mode);
  merge(cmd, "--out", cfg_in, "out", out);

  if (beta <= 0) throw rdb::InvalidParameter("beta must be positive");
  rdb::LatticeModel model;
  model.boundary = rdb::Boundary::Open;
  model.matter = rdb::Matter::Staggered;
  model.g = rdb::g_from_beta(beta);
  model.m = m;
  model.kappa = kappa;
  rdb::Workspace ws;
  rdb::ScanRow row = rdb::run_point(
      model, make_scheme(l_max, -1, "both"), parse_mode(mode), ws);
  json j = row_to_json(row);
  j["m"] = m;
  j["kappa"] = kappa;
  write_text(out, j.dump(2) + "\n");

  json cfg;
  cfg["command"] = "qed-run";
  cfg["beta"] = beta;
  cfg["m"] = m;
  cfg["kappa"] = kappa;
  cfg["l_max"] = l_max;
  cfg["mode"] = mode;
  cfg["out"] = out;
  cfg["threads"] = threads;
  write_resolved_config(out, cfg);
  return 0;
}

// ---------------------------------------------------------- qed-sweep ----

int cmd_qed_sweep(const CLI::App* cmd, std::vector<double> betas,
                  std::vector<double> masses, std::vector<double> kappas,
                  int l_max_test, int l_max_ref,
                  const std::string& config_path, std::string out,
                  int threads) {
  const json cfg_in = load_config(config_path);
  merge(cmd, "--beta", cfg_in, "beta", betas);
  merge(cmd, "--m", cfg_in, "m", masses);
  merge(cmd, "--kappa", cfg_in, "kappa", kappas);
  merge(cmd, "--l-max-test", cfg_in, "l_max_test", l_max_test);
  merge(cmd, "--l-max-ref", cfg_in, "l_max_ref", l_max_ref);
  merge(cmd, "--out", cfg_in, "out", out);

  if (betas.empty() || masses.empty() || kappas.empty())
    throw rdb::InvalidParameter("empty sweep grid");
  rdb::LatticeModel model;
  model.boundary = rdb::Boundary::Open;
  model.matter = rdb::Matter::Staggered;
  rdb::Workspace ws;
  std::vector<rdb::QedSweepRow> rows = rdb::qed_parameter_sweep(
      model, betas, masses, kappas, l_max_test, l_max_ref, ws);
  std::ostringstream csv;
  rdb::write_qed_csv(csv, rows);
  write_text(out, csv.str());

  json cfg;
  cfg["command"] = "qed-sweep";
  cfg["beta"] = betas;
  cfg["m"] = masses;
  cfg["kappa"] = kappas;
  cfg["l_max_test"] = l_max_test;
  cfg["l_max_ref"] = l_max_ref;
  cfg["out"] = out;
  cfg["threads"] = threads;
  write_resolved_config(out, cfg);
  return 0;
}

// ---------------------------------------------------------------- fit ----

// Accepts either the scan CSV (columns dim and rel_error located by header)
// or a plain two-column dim,error file.
std::vector<std::pair<double, double>> read_fit_points(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw rdb::InvalidParameter("input not readable: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw rdb::InvalidParameter("empty input: " + path);
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  std::vector<std::string> header = split(line);
  int dim_col = 0, err_col = 1;
  bool has_header = false;
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "dim") {
      dim_col = static_cast<int>(i);
      has_header = true;
    }
    if (header[i] == "rel_error") err_col = static_cast<int>(i);
  }
  std::vector<std::pair<double, double>> points;
  auto take = [&](const std::string& row) {
    std::vector<std::string> cells = split(row);
    const size_t need = static_cast<size_t>(std::max(dim_col, err_col));
    if (cells.size() <= need) return;
    const std::string& err = cells[static_cast<size_t>(err_col)];
    if (err.empty()) return;
    const double e = std::stod(err);
    if (e <= 0) return;  // reference rows carry zero error
    points.emplace_back(std::stod(cells[static_cast<size_t>(dim_col)]), e);
  };
  if (!has_header) take(line);
  while (std::getline(in, line))
    if (!line.empty()) take(line);
  return points;
}

int cmd_fit(const CLI::App* cmd, std::string input, std::string model_name,
            const std::string& config_path, std::string out, int threads) {
  const json cfg_in = load_config(config_path);
  merge(cmd, "--input", cfg_in, "input", input);
  merge(cmd, "--model", cfg_in, "model", model_name);
  merge(cmd, "--out", cfg_in, "out", out);

  rdb::FitModel model;
  if (model_name == "linear")
    model = rdb::FitModel::Linear;
  else if (model_name == "power_log")
    model = rdb::FitModel::PowerLog;
  else
    throw rdb::InvalidParameter("unknown fit model: " + model_name);
  rdb::FitResult fit = rdb::fit_scaling(read_fit_points(input), model);
  write_text(out, rdb::fit_result_to_json(fit) + "\n");

  json cfg;
  cfg["command"] = "fit";
  cfg["input"] = input;
  cfg["model"] = model_name;
  cfg["out"] = out;
  cfg["threads"] = threads;
  write_resolved_config(out, cfg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"renormalized dual basis pipelines for 2+1D compact QED"};
  app.require_subcommand(1);
  int threads = 0;  // 0 = all available; results are thread-count independent
  app.add_option("--threads", threads,
                 "worker threads for scans (output is independent of this)");

  // spb
  double spb_g = 1.0;
  int spb_l_max = 2, spb_n_trunc = 0;
  std::string spb_config, spb_out = "spb.json";
  CLI::App* spb = app.add_subcommand(
      "spb", "single-plaquette eigenbasis and operator tables");
  spb->fallthrough();
  spb->add_option("--g", spb_g, "basis coupling g, in [1e-3, 1e3]")
      ->capture_default_str();
  spb->add_option("--l-max", spb_l_max, "retained states minus one")
      ->capture_default_str();
  spb->add_option("--n-trunc", spb_n_trunc,
                  "Fourier truncation (0 = margin rule)")
      ->capture_default_str();
  spb->add_option("--config", spb_config, "JSON config file (flags win)");
  spb->add_option("--out", spb_out, "output JSON path")->capture_default_str();

  // torus-scan
  std::vector<double> ts_beta;
  std::vector<int> ts_l_max{2};
  int ts_n_max = -1, ts_ref_l_max = 8;
  std::string ts_parity = "both", ts_reference = "fixed";
  std::vector<std::string> ts_modes{"rdb"};
  std::string ts_config, ts_out = "torus_scan.csv";
  CLI::App* ts = app.add_subcommand(
      "torus-scan", "2x2 torus relative-precision scan over beta");
  ts->fallthrough();
  ts->add_option("--beta", ts_beta, "beta grid, beta = 1/(2 g^2)");
  ts->add_option("--l-max", ts_l_max, "truncation levels")->capture_default_str();
  ts->add_option("--n-max", ts_n_max, "global excitation cap (-1 = none)")
      ->capture_default_str();
  ts->add_option("--parity", ts_parity, "joint parity sector: both|even|odd")
      ->capture_default_str();
  ts->add_option("--mode", ts_modes,
                 "basis modes: electric|dual|rdb|improved_rdb")
      ->capture_default_str();
  ts->add_option("--reference", ts_reference,
                 "reference rule: fixed|energy-min")
      ->capture_default_str();
  ts->add_option("--ref-l-max", ts_ref_l_max, "l_max of the fixed reference")
      ->capture_default_str();
  ts->add_option("--config", ts_config, "JSON config file (flags win)");
  ts->add_option("--out", ts_out, "output CSV path")->capture_default_str();

  // obc-run
  int obc_nx = 2, obc_ny = 2, obc_l_max = 2;
  double obc_beta = 1.0;
  std::string obc_mode = "rdb", obc_config, obc_out = "obc_run.json";
  CLI::App* obc = app.add_subcommand(
      "obc-run", "open-boundary pure-gauge ground-state run");
  obc->fallthrough();
  obc->add_option("--nx", obc_nx, "plaquette columns")->capture_default_str();
  obc->add_option("--ny", obc_ny, "plaquette rows")->capture_default_str();
  obc->add_option("--beta", obc_beta, "coupling beta")->capture_default_str();
  obc->add_option("--l-max", obc_l_max, "truncation level")->capture_default_str();
  obc->add_option("--mode", obc_mode, "basis mode")->capture_default_str();
  obc->add_option("--config", obc_config, "JSON config file (flags win)");
  obc->add_option("--out", obc_out, "output JSON path")->capture_default_str();

  // qed-run
  double qr_beta = 1.0, qr_m = 0.0, qr_kappa = 0.0;
  int qr_l_max = 2;
  std::string qr_mode = "rdb", qr_config, qr_out = "qed_run.json";
  CLI::App* qr = app.add_subcommand(
      "qed-run", "2x2 staggered-matter single-plaquette run");
  qr->fallthrough();
  qr->add_option("--beta", qr_beta, "coupling beta")->capture_default_str();
  qr->add_option("--m", qr_m, "staggered mass")->capture_default_str();
  qr->add_option("--kappa", qr_kappa, "hopping strength")->capture_default_str();
  qr->add_option("--l-max", qr_l_max, "gauge truncation level")
      ->capture_default_str();
  qr->add_option("--mode", qr_mode, "basis mode")->capture_default_str();
  qr->add_option("--config", qr_config, "JSON config file (flags win)");
  qr->add_option("--out", qr_out, "output JSON path")->capture_default_str();

  // qed-sweep
  std::vector<double> qs_beta, qs_m, qs_kappa;
  int qs_l_max_test = 2, qs_l_max_ref = 10;
  std::string qs_config, qs_out = "qed_sweep.csv";
  CLI::App* qs = app.add_subcommand(
      "qed-sweep", "QED (m, kappa) sweep of RDB truncation errors");
  qs->fallthrough();
  qs->add_option("--beta", qs_beta, "beta grid");
  qs->add_option("--m", qs_m, "mass grid");
  qs->add_option("--kappa", qs_kappa, "hopping grid");
  qs->add_option("--l-max-test", qs_l_max_test, "tested truncation")
      ->capture_default_str();
  qs->add_option("--l-max-ref", qs_l_max_ref, "reference truncation")
      ->capture_default_str();
  qs->add_option("--config", qs_config, "JSON config file (flags win)");
  qs->add_option("--out", qs_out, "output CSV path")->capture_default_str();

  // fit
  std::string fit_input, fit_model = "power_log", fit_config,
              fit_out = "fit.json";
  CLI::App* fit = app.add_subcommand(
      "fit", "fit log-error vs log-dimension scaling data");
  fit->fallthrough();
  fit->add_option("--input", fit_input, "scan CSV or dim,error CSV");
  fit->add_option("--model", fit_model, "linear|power_log")
      ->capture_default_str();
  fit->add_option("--config", fit_config, "JSON config file (flags win)");
  fit->add_option("--out", fit_out, "output JSON path")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParam;
  }

  try {
    if (spb->parsed())
      return cmd_spb(spb, spb_g, spb_l_max, spb_n_trunc, spb_config, spb_out,
                     threads);
    if (ts->parsed())
      return cmd_torus_scan(ts, ts_beta, ts_l_max, ts_n_max, ts_parity,
                            ts_modes, ts_reference, ts_ref_l_max, ts_config,
                            ts_out, threads);
    if (obc->parsed())
      return cmd_obc_run(obc, obc_nx, obc_ny, obc_beta, obc_l_max, obc_mode,
                         obc_config, obc_out, threads);
    if (qr->parsed())
      return cmd_qed_run(qr, qr_beta, qr_m, qr_kappa, qr_l_max, qr_mode,
                         qr_config, qr_out, threads);
    if (qs->parsed())
      return cmd_qed_sweep(qs, qs_beta, qs_m, qs_kappa, qs_l_max_test,
                           qs_l_max_ref, qs_config, qs_out, threads);
    if (fit->parsed())
      return cmd_fit(fit, fit_input, fit_model, fit_config, fit_out, threads);
  } catch (const rdb::InvalidParameter& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return kExitParam;
  } catch (const rdb::UnsupportedModel& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return kExitParam;
  } catch (const rdb::EmptyBasisError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return kExitParam;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitParam;
}
