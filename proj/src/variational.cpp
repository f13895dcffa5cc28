#include "rdb/variational.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

namespace rdb {

namespace {

double round_sig(double x, int digits = 12) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*e", digits - 1, x);
  return std::atof(buf);
}

constexpr double kLogLo = -3.0;
constexpr double kLogHi = 3.0;
constexpr double kInvPhi = 0.6180339887498949;

}  // namespace

std::shared_ptr<const OperatorTable> Workspace::table(double g_basis,
                                                      int l_max) {
  const std::pair<double, int> key{round_sig(g_basis), l_max};
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  std::shared_ptr<const OperatorTable> t;
  if (std::isinf(g_basis)) {
    const FourierTruncation trunc{std::max(32, l_max + 4)};
    t = std::make_shared<OperatorTable>(
        build_operator_table(electric_eigenbasis(l_max, trunc)));
  } else {
    t = std::make_shared<OperatorTable>(
        build_operator_table(solve_single_plaquette(g_basis, l_max)));
  }
  cache_.emplace(key, t);
  return t;
}

SolveOutput solve_model(const LatticeModel& model,
                        const TruncationScheme& scheme,
                        const std::vector<double>& g_vec, Workspace& ws,
                        bool qed_charge_zero, const SolverOptions& opts) {
  ModelTerms terms = build_model(model);
  if (g_vec.empty() ||
      (g_vec.size() != 1 &&
       static_cast<int>(g_vec.size()) != terms.n_gauge_slots))
    throw InvalidParameter("g_vec must have one entry or one per gauge slot");

  std::vector<std::shared_ptr<const OperatorTable>> owned;
  std::vector<const OperatorTable*> tables;
  for (int s = 0; s < terms.n_gauge_slots; ++s) {
    const double gb = g_vec.size() == 1 ? g_vec[0] : g_vec[static_cast<size_t>(s)];
    owned.push_back(ws.table(gb, scheme.l_max));
    tables.push_back(owned.back().get());
  }

  const std::vector<Parity>& parities = owned.front()->basis.parities;
  if (scheme.parity != ParitySector::Both) {
    for (const auto& t : owned)
      if (t->basis.parities != parities)
        throw InvalidParameter(
            "parity filter requires a shared basis across slots");
  }

  const std::vector<int> offsets =
      (terms.n_fermion_sites > 0 && qed_charge_zero)
          ? terms.fermion_charge_offsets
          : std::vector<int>{};
  ManyBodyBasis basis = enumerate_basis(terms.n_gauge_slots,
                                        terms.n_fermion_sites, scheme,
                                        parities, offsets);

  SparseMatrixXcd h = assemble(terms.h, tables, basis);
  SolveOutput out;
  out.gs = ground_state(h, opts);
  out.energy = out.gs.energy;
  out.dim = basis.dim();
  out.label = truncation_label(scheme, basis.dim());

  SparseMatrixXcd hb = assemble(terms.h_b, tables, basis);
  const double hb_exp = std::real(out.gs.vector.dot(hb * out.gs.vector));
  out.plaquette = model.g * model.g / (2.0 * terms.n_plaq) * hb_exp;
  return out;
}

double evaluate_energy(const LatticeModel& model,
                       const TruncationScheme& scheme,
                       const std::vector<double>& g_vec, Workspace& ws) {
  for (double gb : g_vec)
    if (!(gb >= 1e-3 && gb <= 1e3))
      throw InvalidParameter("basis parameters must lie in [1e-3, 1e3]");
  return solve_model(model, scheme, g_vec, ws).energy;
}

namespace {

class CostFunction {
 public:
  CostFunction(const LatticeModel& model, const TruncationScheme& scheme,
               Workspace& ws, VariationalResult& result)
      : model_(model), scheme_(scheme), ws_(ws), result_(result) {}

  double operator()(const std::vector<double>& g_vec) {
    std::vector<double> key(g_vec.size());
    std::transform(g_vec.begin(), g_vec.end(), key.begin(),
                   [](double g) { return round_sig(g); });
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    const double e = evaluate_energy(model_, scheme_, key, ws_);
    memo_.emplace(key, e);
    ++result_.evaluations;
    result_.trace.emplace_back(key, e);
    if (e < best_energy_) {
      best_energy_ = e;
      best_ = key;
    }
    return e;
  }

  double log_cost(const std::vector<double>& x) {
    std::vector<double> g(x.size());
    std::transform(x.begin(), x.end(), g.begin(), [](double v) {
      return std::pow(10.0, std::clamp(v, kLogLo, kLogHi));
    });
    return (*this)(g);
  }

  const std::vector<double>& best() const { return best_; }
  double best_energy() const { return best_energy_; }

 private:
  const LatticeModel& model_;
  const TruncationScheme& scheme_;
  Workspace& ws_;
  VariationalResult& result_;
  std::map<std::vector<double>, double> memo_;
  std::vector<double> best_;
  double best_energy_ = std::numeric_limits<double>::infinity();
};

// Golden-section minimization of f over [a, b] down to interval width tol.
double golden_section(const std::function<double(double)>& f, double a,
                      double b, double tol) {
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 < f2 ? x1 : x2;
}

void nelder_mead(CostFunction& cost, std::vector<double>& x, double step,
                 int max_evals) {
  const size_t n = x.size();
  std::vector<std::vector<double>> simplex(n + 1, x);
  for (size_t i = 0; i < n; ++i) simplex[i + 1][i] += step;
  std::vector<double> f(n + 1);
  for (size_t i = 0; i <= n; ++i) f[i] = cost.log_cost(simplex[i]);
  int evals = static_cast<int>(n) + 1;
  while (evals < max_evals) {
    std::vector<size_t> order(n + 1);
    for (size_t i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return f[a] < f[b]; });
    const size_t lo = order[0], hi = order[n];
    const double scale = std::max(1.0, std::abs(f[lo]));
    if (std::abs(f[hi] - f[lo]) < 1e-12 * scale) break;

    std::vector<double> centroid(n, 0.0);
    for (size_t i = 0; i <= n; ++i)
      if (i != hi)
        for (size_t d = 0; d < n; ++d) centroid[d] += simplex[i][d] / n;
    auto blend = [&](double t) {
      std::vector<double> p(n);
      for (size_t d = 0; d < n; ++d)
        p[d] = centroid[d] + t * (simplex[hi][d] - centroid[d]);
      return p;
    };
    std::vector<double> refl = blend(-1.0);
    double fr = cost.log_cost(refl);
    ++evals;
    if (fr < f[lo]) {
      std::vector<double> exp_p = blend(-2.0);
      double fe = cost.log_cost(exp_p);
      ++evals;
      if (fe < fr) {
        simplex[hi] = exp_p;
        f[hi] = fe;
      } else {
        simplex[hi] = refl;
        f[hi] = fr;
      }
    } else if (fr < f[order[n - 1]]) {
      simplex[hi] = refl;
      f[hi] = fr;
    } else {
      std::vector<double> con = blend(0.5);
      double fc = cost.log_cost(con);
      ++evals;
      if (fc < f[hi]) {
        simplex[hi] = con;
        f[hi] = fc;
      } else {
        for (size_t i = 0; i <= n; ++i) {
          if (i == lo) continue;
          for (size_t d = 0; d < n; ++d)
            simplex[i][d] = simplex[lo][d] + 0.5 * (simplex[i][d] - simplex[lo][d]);
          f[i] = cost.log_cost(simplex[i]);
          ++evals;
        }
      }
    }
  }
  size_t lo = 0;
  for (size_t i = 1; i <= n; ++i)
    if (f[i] < f[lo]) lo = i;
  x = simplex[lo];
}

}  // namespace

VariationalResult optimize(const LatticeModel& model,
                           const TruncationScheme& scheme, OptMode mode,
                           Workspace& ws, int coarse_points) {
  VariationalResult result;
  CostFunction cost(model, scheme, ws, result);

  const double g_dual = std::clamp(model.g, 1e-3, 1e3);
  const double e_dual = cost({g_dual});

  // Coarse grid on log10 g_basis, then golden section around the best point.
  std::vector<double> xs(static_cast<size_t>(coarse_points));
  std::vector<double> es(static_cast<size_t>(coarse_points));
  for (int i = 0; i < coarse_points; ++i) {
    xs[static_cast<size_t>(i)] =
        kLogLo + (kLogHi - kLogLo) * i / (coarse_points - 1);
    es[static_cast<size_t>(i)] = cost.log_cost({xs[static_cast<size_t>(i)]});
  }
  const size_t best_i =
      static_cast<size_t>(std::min_element(es.begin(), es.end()) - es.begin());
  if (best_i == 0 || best_i + 1 == xs.size()) result.boundary_hit = true;
  // Refine every coarse local minimum plus the dual-point neighbourhood; a
  // single bracket around the grid best can miss a narrow basin that sits
  // between two coarse points above a broad shallow plateau.
  const double half_step = (kLogHi - kLogLo) / (coarse_points - 1);
  auto refine = [&](double center) {
    const double a = std::max(kLogLo, center - half_step);
    const double b = std::min(kLogHi, center + half_step);
    golden_section([&](double x) { return cost.log_cost({x}); }, a, b,
                   1e-4 * (kLogHi - kLogLo));
  };
  for (size_t i = 0; i < xs.size(); ++i) {
    const bool left_ok = i == 0 || es[i] <= es[i - 1];
    const bool right_ok = i + 1 == xs.size() || es[i] <= es[i + 1];
    if (left_ok && right_ok) refine(xs[i]);
  }
  refine(std::log10(g_dual));

  double x_shared = std::log10(cost.best()[0]);
  result.converged = true;

  if (mode == OptMode::PerSlot) {
    const int n_slots = build_model(model).n_gauge_slots;
    std::vector<double> x(static_cast<size_t>(n_slots), x_shared);
    double prev = cost.log_cost(x);
    for (int sweep = 0; sweep < 50; ++sweep) {
      for (size_t s = 0; s < x.size(); ++s) {
        const double lo = std::max(kLogLo, x[s] - 0.5);
        const double hi = std::min(kLogHi, x[s] + 0.5);
        x[s] = golden_section(
            [&](double v) {
              std::vector<double> p = x;
              p[s] = v;
              return cost.log_cost(p);
            },
            lo, hi, 1e-5);
      }
      const double now = cost.log_cost(x);
      if (prev - now < 1e-10 * std::max(1.0, std::abs(now))) {
        result.converged = true;
        break;
      }
      result.converged = sweep + 1 < 50;
      prev = now;
    }
    nelder_mead(cost, x, 0.02, 300);
  }

  result.energy = cost.best_energy();
  result.g_opt = cost.best();
  if (mode == OptMode::PerSlot && result.g_opt.size() == 1) {
    const int n_slots = build_model(model).n_gauge_slots;
    result.g_opt.assign(static_cast<size_t>(n_slots), result.g_opt[0]);
  }

  // Flat-landscape tie break: prefer the dual point when it is equivalent.
  const double scale = std::max(1.0, std::abs(e_dual));
  if (mode == OptMode::Shared &&
      std::abs(result.energy - e_dual) <= 1e-8 * scale) {
    result.energy = e_dual;
    result.g_opt = {g_dual};
  }
  return result;
}

}  // namespace rdb
