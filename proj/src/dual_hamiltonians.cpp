#include "rdb/dual_hamiltonians.hpp"

#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

namespace rdb {

namespace {

Term gauge_term(Complex coeff, std::vector<std::pair<int, LocalOp>> factors) {
  Term t;
  t.coeff = coeff;
  t.gauge_factors = std::move(factors);
  return t;
}

void add_p_pdag_pair(HamiltonianTermList& list, double coeff, int slot) {
  list.terms.push_back(gauge_term(coeff, {{slot, LocalOp::P}}));
  list.terms.push_back(gauge_term(coeff, {{slot, LocalOp::Pdag}}));
}

void require(bool ok, const char* what) {
  if (!ok) throw UnsupportedModel(what);
}

// Magnetic part of the minimal torus / PBC lattice, Kogut-Susskind sign
// convention: sum_n (2 - P - P^dag)/(2g^2) plus the reference-plaquette
// product term.
HamiltonianTermList pbc_magnetic(int n_slots, double g) {
  const double mag = 1.0 / (2.0 * g * g);
  HamiltonianTermList hb;
  hb.constant_offset = 2.0 * (n_slots + 1) * mag;  // 2 N^2 / (2 g^2)
  for (int s = 0; s < n_slots; ++s) add_p_pdag_pair(hb, -mag, s);
  std::vector<std::pair<int, LocalOp>> prod, prod_dag;
  for (int s = 0; s < n_slots; ++s) {
    prod.emplace_back(s, LocalOp::P);
    prod_dag.emplace_back(s, LocalOp::Pdag);
  }
  hb.terms.push_back(gauge_term(-mag, prod));
  hb.terms.push_back(gauge_term(-mag, prod_dag));
  return hb;
}

void append(HamiltonianTermList& dst, const HamiltonianTermList& src) {
  dst.terms.insert(dst.terms.end(), src.terms.begin(), src.terms.end());
  dst.constant_offset += src.constant_offset;
}

// (g^2/2) sum over links of (R_a - R_b)^2 with absent neighbours zero.
// Cross terms are emitted once per shared link; E^2 coefficients are
// accumulated per slot.
void obc_electric(HamiltonianTermList& list, int nx, int ny, double g) {
  const double el = g * g / 2.0;
  auto slot = [&](int x, int y) -> int {
    if (x < 0 || x >= nx || y < 0 || y >= ny) return -1;
    return x + nx * y;
  };
  std::vector<double> e2(static_cast<size_t>(nx * ny), 0.0);
  auto add_link = [&](int a, int b) {
    if (a >= 0) e2[static_cast<size_t>(a)] += el;
    if (b >= 0) e2[static_cast<size_t>(b)] += el;
    if (a >= 0 && b >= 0)
      list.terms.push_back(
          gauge_term(-2.0 * el, {{a, LocalOp::E}, {b, LocalOp::E}}));
  };
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y <= ny; ++y) add_link(slot(x, y), slot(x, y - 1));
  for (int x = 0; x <= nx; ++x)
    for (int y = 0; y < ny; ++y) add_link(slot(x - 1, y), slot(x, y));
  for (int s = 0; s < nx * ny; ++s)
    list.terms.push_back(gauge_term(e2[static_cast<size_t>(s)], {{s, LocalOp::E2}}));
}

// Linear combination a*E + sum_s b_s n_s + c used to expand the squared
// electric terms of the matter model.
struct LinOp {
  double e = 0.0;
  std::map<int, double> n;
  double c = 0.0;
};

void add_product(HamiltonianTermList& list, double coeff, const LinOp& a,
                 const LinOp& b) {
  auto number_factors = [](std::initializer_list<int> sites) {
    std::vector<FermiFactor> f;
    for (int s : sites) {
      f.push_back({true, s});
      f.push_back({false, s});
    }
    return f;
  };
  // E * E
  if (a.e != 0.0 && b.e != 0.0)
    list.terms.push_back(gauge_term(coeff * a.e * b.e, {{0, LocalOp::E2}}));
  // E * n and n * E (E commutes with the number operators)
  for (const auto& [s, w] : b.n)
    if (a.e != 0.0) {
      Term t = gauge_term(coeff * a.e * w, {{0, LocalOp::E}});
      t.fermi_factors = number_factors({s});
      list.terms.push_back(t);
    }
  for (const auto& [s, w] : a.n)
    if (b.e != 0.0) {
      Term t = gauge_term(coeff * w * b.e, {{0, LocalOp::E}});
      t.fermi_factors = number_factors({s});
      list.terms.push_back(t);
    }
  // E * const
  if (a.e != 0.0 && b.c != 0.0)
    list.terms.push_back(gauge_term(coeff * a.e * b.c, {{0, LocalOp::E}}));
  if (b.e != 0.0 && a.c != 0.0)
    list.terms.push_back(gauge_term(coeff * b.e * a.c, {{0, LocalOp::E}}));
  // n * n, n * const
  for (const auto& [s, ws] : a.n)
    for (const auto& [t, wt] : b.n) {
      Term term;
      term.coeff = coeff * ws * wt;
      term.fermi_factors =
          (s == t) ? number_factors({s}) : number_factors({s, t});
      list.terms.push_back(term);
    }
  for (const auto& [s, w] : a.n)
    if (b.c != 0.0) {
      Term term;
      term.coeff = coeff * w * b.c;
      term.fermi_factors = number_factors({s});
      list.terms.push_back(term);
    }
  for (const auto& [s, w] : b.n)
    if (a.c != 0.0) {
      Term term;
      term.coeff = coeff * w * a.c;
      term.fermi_factors = number_factors({s});
      list.terms.push_back(term);
    }
  list.constant_offset += coeff * a.c * b.c;
}

}  // namespace

HamiltonianTermList build_minimal_torus(const LatticeModel& model) {
  require(model.boundary == Boundary::Periodic && model.nx == 2 &&
              model.ny == 2 && model.matter == Matter::None,
          "minimal torus requires periodic 2x2 pure gauge");
  const double g = model.g;
  const double el = 2.0 * g * g;
  const double mag = 1.0 / (2.0 * g * g);

  // Slots 0 = (0,0), 1 = (1,0), 2 = (1,1); reference plaquette (0,1) removed.
  HamiltonianTermList h;
  for (int s = 0; s < 3; ++s)
    h.terms.push_back(gauge_term(el, {{s, LocalOp::E2}}));
  for (int s = 0; s < 3; ++s) add_p_pdag_pair(h, -mag, s);
  h.terms.push_back(gauge_term(-el, {{1, LocalOp::E}, {0, LocalOp::E}}));
  h.terms.push_back(gauge_term(-el, {{1, LocalOp::E}, {2, LocalOp::E}}));
  h.terms.push_back(gauge_term(
      -mag, {{0, LocalOp::P}, {1, LocalOp::P}, {2, LocalOp::P}}));
  h.terms.push_back(gauge_term(
      -mag, {{0, LocalOp::Pdag}, {1, LocalOp::Pdag}, {2, LocalOp::Pdag}}));
  h.constant_offset = 8.0 * mag;
  return h;
}

HamiltonianTermList build_obc_pure_gauge(const LatticeModel& model) {
  require(model.boundary == Boundary::Open && model.matter == Matter::None &&
              model.nx >= 1 && model.ny >= 1,
          "open pure gauge requires open boundary, no matter");
  const double mag = 1.0 / (2.0 * model.g * model.g);
  HamiltonianTermList h;
  obc_electric(h, model.nx, model.ny, model.g);
  const int n_slots = model.nx * model.ny;
  h.constant_offset += 2.0 * n_slots * mag;
  for (int s = 0; s < n_slots; ++s) add_p_pdag_pair(h, -mag, s);
  return h;
}

HamiltonianTermList build_pbc_pure_gauge_nn(const LatticeModel& model) {
  require(model.boundary == Boundary::Periodic && model.nx == model.ny &&
              model.nx >= 2 && model.matter == Matter::None,
          "periodic pure gauge requires N x N, no matter");
  const int N = model.nx;
  const double g = model.g;
  const double el = g * g / 2.0;

  // Reference site (0, N-1) carries no rotator; global rotators are zero.
  auto slot = [&](int x, int y) -> int {
    x = (x % N + N) % N;
    y = (y % N + N) % N;
    if (x == 0 && y == N - 1) return -1;
    const int idx = x + N * y;
    return idx > N * (N - 1) ? idx - 1 : idx;
  };
  const int n_slots = N * N - 1;
  std::vector<double> e2(static_cast<size_t>(n_slots), 0.0);
  HamiltonianTermList h;
  auto add_square = [&](int a, int b) {
    if (a >= 0) e2[static_cast<size_t>(a)] += el;
    if (b >= 0) e2[static_cast<size_t>(b)] += el;
    if (a >= 0 && b >= 0)
      h.terms.push_back(
          gauge_term(-2.0 * el, {{a, LocalOp::E}, {b, LocalOp::E}}));
  };
  for (int x = 0; x < N; ++x)
    for (int y = 0; y < N; ++y) {
      add_square(slot(x, y), slot(x, y - 1));
      add_square(slot(x - 1, y), slot(x, y));
    }
  for (int s = 0; s < n_slots; ++s)
    h.terms.push_back(gauge_term(e2[static_cast<size_t>(s)], {{s, LocalOp::E2}}));
  append(h, pbc_magnetic(n_slots, g));
  return h;
}

HamiltonianTermList build_obc_qed_2x2(const LatticeModel& model) {
  require(model.boundary == Boundary::Open && model.nx == 2 && model.ny == 2 &&
              model.matter == Matter::Staggered,
          "staggered matter requires the open 2x2 site lattice");
  const double g = model.g;
  const double el = g * g / 2.0;
  const double mag = 1.0 / (2.0 * g * g);

  // Site order (0,0), (1,0), (0,1), (1,1); charges q_n = n_n - offset with
  // offsets {0, 1, 1, 0} (odd sites filled in the bare Dirac vacuum).
  const LinOp q0{0.0, {{0, 1.0}}, 0.0};
  const LinOp q2{0.0, {{2, 1.0}}, -1.0};
  const LinOp q3{0.0, {{3, 1.0}}, 0.0};
  const LinOp E{1.0, {}, 0.0};
  auto minus = [](const LinOp& a, const LinOp& b) {
    LinOp r = a;
    r.e -= b.e;
    r.c -= b.c;
    for (const auto& [s, w] : b.n) r.n[s] -= w;
    return r;
  };
  auto plus = [](const LinOp& a, const LinOp& b) {
    LinOp r = a;
    r.e += b.e;
    r.c += b.c;
    for (const auto& [s, w] : b.n) r.n[s] += w;
    return r;
  };

  HamiltonianTermList h;
  add_product(h, el, E, E);
  const LinOp t2 = minus(E, q2);
  const LinOp t3 = minus(E, q3);
  const LinOp t4 = plus(E, plus(q0, q2));
  add_product(h, el, t2, t2);
  add_product(h, el, t3, t3);
  add_product(h, el, t4, t4);
  add_p_pdag_pair(h, -mag, 0);

  // Staggered mass term.
  const double stag[4] = {1.0, -1.0, -1.0, 1.0};
  for (int s = 0; s < 4; ++s) {
    Term t;
    t.coeff = model.m * stag[s];
    t.fermi_factors = {{true, s}, {false, s}};
    h.terms.push_back(t);
  }

  // Hoppings of Eq-type psi^dag_a (U) psi_b plus conjugates.
  auto hop = [&](int a, int b, std::optional<LocalOp> u) {
    Term t;
    t.coeff = model.kappa;
    if (u) t.gauge_factors = {{0, *u}};
    t.fermi_factors = {{true, a}, {false, b}};
    h.terms.push_back(t);
  };
  hop(0, 2, std::nullopt);
  hop(2, 0, std::nullopt);
  hop(0, 1, std::nullopt);
  hop(1, 0, std::nullopt);
  hop(1, 3, std::nullopt);
  hop(3, 1, std::nullopt);
  hop(3, 2, LocalOp::P);
  hop(2, 3, LocalOp::Pdag);
  return h;
}

ModelTerms build_model(const LatticeModel& model) {
  ModelTerms out;
  const double mag = 1.0 / (2.0 * model.g * model.g);
  if (model.boundary == Boundary::Periodic) {
    require(model.nx == 2 && model.ny == 2,
            "periodic solving is limited to the 2x2 torus");
    out.h = build_minimal_torus(model);
    out.h_b = pbc_magnetic(3, model.g);
    out.n_gauge_slots = 3;
    out.n_plaq = 4.0;
    return out;
  }
  if (model.matter == Matter::None) {
    require((model.nx <= 3 && model.ny <= 3) ||
                (std::min(model.nx, model.ny) <= 2 &&
                 std::max(model.nx, model.ny) <= 4),
            "open pure-gauge exact diagonalization is limited to 3x3 and 2xN strips with N <= 4");
    out.h = build_obc_pure_gauge(model);
    out.n_gauge_slots = model.nx * model.ny;
    out.n_plaq = static_cast<double>(out.n_gauge_slots);
    out.h_b.constant_offset = 2.0 * out.n_gauge_slots * mag;
    for (int s = 0; s < out.n_gauge_slots; ++s)
      add_p_pdag_pair(out.h_b, -mag, s);
    return out;
  }
  out.h = build_obc_qed_2x2(model);
  out.n_gauge_slots = 1;
  out.n_fermion_sites = 4;
  out.n_plaq = 1.0;
  out.fermion_charge_offsets = {0, 1, 1, 0};
  out.h_b.constant_offset = 2.0 * mag;
  add_p_pdag_pair(out.h_b, -mag, 0);
  return out;
}

std::string term_list_to_json(const HamiltonianTermList& list) {
  nlohmann::json j;
  j["constant_offset"] = list.constant_offset;
  j["terms"] = nlohmann::json::array();
  auto tag = [](LocalOp op) -> const char* {
    switch (op) {
      case LocalOp::Identity: return "I";
      case LocalOp::E: return "E";
      case LocalOp::E2: return "E2";
      case LocalOp::Cos: return "cos";
      case LocalOp::Sin: return "sin";
      case LocalOp::P: return "P";
      case LocalOp::Pdag: return "Pdag";
    }
    return "?";
  };
  for (const Term& t : list.terms) {
    nlohmann::json jt;
    jt["coeff"] = {t.coeff.real(), t.coeff.imag()};
    nlohmann::json slots = nlohmann::json::object();
    for (const auto& [slot, op] : t.gauge_factors)
      slots[std::to_string(slot)] = tag(op);
    jt["slots"] = slots;
    if (!t.fermi_factors.empty()) {
      nlohmann::json f = nlohmann::json::array();
      for (const FermiFactor& ff : t.fermi_factors)
        f.push_back({{"dagger", ff.dagger}, {"site", ff.site}});
      jt["fermi"] = f;
    }
    j["terms"].push_back(jt);
  }
  return j.dump(2);
}

}  // namespace rdb
