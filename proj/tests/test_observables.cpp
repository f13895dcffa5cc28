#include <doctest.h>

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "rdb/fitting.hpp"
#include "rdb/observables.hpp"

using namespace rdb;

namespace {

LatticeModel torus(double beta) {
  LatticeModel model;
  model.g = g_from_beta(beta);
  return model;
}

}  // namespace

TEST_CASE("plaquette limits on the torus") {
  Workspace ws;
  // Strong coupling: electric vacuum, <box> -> 1/2.
  ScanRow strong = run_point(torus(1e-3), {2, {}, ParitySector::Both},
                             BasisMode::Dual, ws);
  CHECK(strong.plaquette == doctest::Approx(0.5).epsilon(1e-2));
  // Weak coupling: magnetic vacuum, <box> -> 0.
  ScanRow weak = run_point(torus(100.0), {6, {}, ParitySector::Both},
                           BasisMode::Dual, ws);
  CHECK(weak.plaquette < 0.05);
  CHECK(weak.plaquette >= 0.0);
}

TEST_CASE("plaquette against an explicit dense expectation") {
  Workspace ws;
  LatticeModel model = torus(1.0);
  TruncationScheme scheme{6, {}, ParitySector::Both};
  ScanRow row = run_point(model, scheme, BasisMode::Dual, ws);

  PlaquetteEigenbasis pb = solve_single_plaquette(model.g, 6);
  OperatorTable t = build_operator_table(pb);
  ManyBodyBasis basis =
      enumerate_basis(3, 0, {6, {}, ParitySector::Both}, pb.parities);
  ModelTerms mt = build_model(model);
  Eigen::MatrixXcd h(assemble(mt.h, {&t, &t, &t}, basis));
  Eigen::MatrixXcd hb(assemble(mt.h_b, {&t, &t, &t}, basis));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  Eigen::VectorXcd v0 = es.eigenvectors().col(0);
  const double hb_exp = (v0.adjoint() * hb * v0)(0, 0).real();
  const double want = model.g * model.g / (2.0 * mt.n_plaq) * hb_exp;
  CHECK(row.plaquette == doctest::Approx(want).epsilon(1e-9));
  CHECK(row.energy == doctest::Approx(es.eigenvalues()[0]).epsilon(1e-9));
}

TEST_CASE("plaquette monotone across the coupling range") {
  Workspace ws;
  std::vector<double> betas{0.01, 0.1, 1.0, 10.0, 100.0};
  std::vector<double> values;
  for (double beta : betas)
    values.push_back(run_point(torus(beta), {10, {}, ParitySector::Both},
                               BasisMode::Dual, ws)
                         .plaquette);
  for (size_t i = 1; i < values.size(); ++i)
    CHECK(values[i] <= values[i - 1] + 1e-10);
  CHECK(values.front() == doctest::Approx(0.5).epsilon(1e-2));
  CHECK(values.back() < 0.05);
}

TEST_CASE("scan rows, reference rules and csv shape") {
  Workspace ws;
  std::vector<TruncationScheme> schemes{{2, {}, ParitySector::Both}};
  std::vector<BasisMode> modes{BasisMode::Electric, BasisMode::Dual,
                               BasisMode::Rdb};
  std::vector<ScanRow> rows = relative_precision_scan(
      torus(10.0), {10.0}, schemes, modes, ReferenceRule::FixedLmax, 8, ws);
  REQUIRE(rows.size() == 4);  // three runs + reference row

  double err_electric = -1.0, err_dual = -1.0, err_rdb = -1.0;
  for (const ScanRow& row : rows) {
    CHECK(row.beta == doctest::Approx(1.0 / (2.0 * row.g * row.g)).epsilon(1e-12));
    REQUIRE(row.rel_error.has_value());
    if (row.is_reference) CHECK(*row.rel_error == 0.0);
    if (row.mode == "electric" && !row.is_reference) err_electric = *row.rel_error;
    if (row.mode == "dual") err_dual = *row.rel_error;
    if (row.mode == "rdb" && !row.is_reference) err_rdb = *row.rel_error;
  }
  // Fig-2-style qualitative ordering at dim 27, weak coupling.
  CHECK(err_rdb < err_dual);
  CHECK(err_dual < err_electric);

  std::ostringstream a, b;
  write_scan_csv(a, rows);
  write_scan_csv(b, rows);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("beta,g,scheme,mode,dim,energy,plaquette,rel_error,g_opt\n",
                      0) == 0);
}

TEST_CASE("dual error non-increasing in l_max") {
  Workspace ws;
  for (double beta : {0.1, 1.0, 10.0}) {
    const double ref = run_point(torus(beta), {10, {}, ParitySector::Both},
                                 BasisMode::Dual, ws)
                           .plaquette;
    double prev = std::numeric_limits<double>::infinity();
    for (int l_max = 2; l_max <= 6; ++l_max) {
      const double val = run_point(torus(beta), {l_max, {}, ParitySector::Both},
                                   BasisMode::Dual, ws)
                             .plaquette;
      const double err = std::abs(val - ref) / std::abs(ref);
      CHECK(err <= prev + 1e-12);
      prev = err;
    }
  }
}

TEST_CASE("improved rdb restricts to the even sector") {
  Workspace ws;
  ScanRow plain = run_point(torus(1.0), {3, {}, ParitySector::Both},
                            BasisMode::Rdb, ws);
  ScanRow improved = run_point(torus(1.0), {3, {}, ParitySector::Both},
                               BasisMode::ImprovedRdb, ws);
  CHECK(plain.dim == 64);
  CHECK(improved.dim == 32);
  // The torus ground state is parity even: same physics, smaller space.
  CHECK(improved.energy == doctest::Approx(plain.energy).epsilon(1e-6));
}

TEST_CASE("qed sweep") {
  Workspace ws;
  LatticeModel model;
  model.boundary = Boundary::Open;
  model.matter = Matter::Staggered;
  std::vector<QedSweepRow> rows =
      qed_parameter_sweep(model, {1.0}, {0.1}, {0.0, 5.0}, 2, 6, ws);
  REQUIRE(rows.size() == 2);
  for (const QedSweepRow& row : rows) {
    CHECK(std::isfinite(row.rel_error));
    CHECK(row.rel_error >= 0.0);
  }
  // kappa = 0: the gauge sector decouples and the optimized single-plaquette
  // basis is exact at any l_max, so the test/reference error collapses.
  CHECK(rows[0].kappa == 0.0);
  CHECK(rows[0].rel_error < 1e-6);
  CHECK(rows[1].rel_error < 0.1);
}

TEST_CASE("fit inverts synthetic data") {
  SUBCASE("noiseless power_log") {
    std::vector<std::pair<double, double>> pts;
    for (double x : {1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5}) {
      const double y = -0.8 - 0.42 * std::pow(x, 2.5);
      pts.emplace_back(std::exp(x), std::exp(y));
    }
    FitResult fit = fit_scaling(pts, FitModel::PowerLog);
    CHECK(fit.a == doctest::Approx(0.42).epsilon(1e-6));
    CHECK(fit.b == doctest::Approx(2.5).epsilon(1e-6));
    CHECK(fit.c == doctest::Approx(-0.8).epsilon(1e-6));
    CHECK(fit.rss < 1e-12);
  }
  SUBCASE("noiseless linear") {
    std::vector<std::pair<double, double>> pts;
    for (double x : {1.0, 2.0, 3.0, 4.0, 5.0})
      pts.emplace_back(std::exp(x), std::exp(-1.3 * x + 0.2));
    FitResult fit = fit_scaling(pts, FitModel::Linear);
    CHECK(fit.a == doctest::Approx(-1.3).epsilon(1e-10));
    CHECK(fit.c == doctest::Approx(0.2).epsilon(1e-10));
  }
  SUBCASE("too few points rejected") {
    std::vector<std::pair<double, double>> pts{{2.0, 0.1}, {3.0, 0.05}};
    CHECK_THROWS_AS(fit_scaling(pts, FitModel::Linear), InvalidParameter);
  }
}

TEST_CASE("format_double is stable") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1.0 / 3.0) == format_double(1.0 / 3.0));
  CHECK(format_double(1e-12) == "1e-12");
}
