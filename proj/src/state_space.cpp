#include "rdb/state_space.hpp"

#include <algorithm>
#include <cmath>

namespace rdb {

namespace {
constexpr double kDropTol = 1e-15;
}

ManyBodyBasis::ManyBodyBasis(int n_gauge_slots, int n_fermion_sites,
                             int levels_per_slot, std::vector<uint64_t> states)
    : n_gauge_(n_gauge_slots),
      n_fermion_(n_fermion_sites),
      levels_(levels_per_slot),
      states_(std::move(states)) {
  index_.reserve(states_.size());
  for (size_t i = 0; i < states_.size(); ++i)
    index_[states_[i]] = static_cast<int>(i);
}

uint64_t ManyBodyBasis::pack(const std::vector<int>& comps) {
  uint64_t key = 0;
  for (size_t i = 0; i < comps.size(); ++i)
    key |= static_cast<uint64_t>(comps[i] & 0x3f) << (6 * i);
  return key;
}

ManyBodyBasis enumerate_basis(int n_gauge_slots, int n_fermion_sites,
                              const TruncationScheme& scheme,
                              const std::vector<Parity>& level_parities,
                              const std::vector<int>& fermion_charge_offsets) {
  const int levels = scheme.l_max + 1;
  if (scheme.parity != ParitySector::Both &&
      static_cast<int>(level_parities.size()) < levels)
    throw InvalidParameter("parity filter requires per-level parity labels");
  const bool charge_filter = !fermion_charge_offsets.empty();
  int charge_target = 0;
  if (charge_filter) {
    for (int s = 0; s < n_fermion_sites; ++s)
      charge_target += fermion_charge_offsets[static_cast<size_t>(s)];
  }

  std::vector<uint64_t> states;
  std::vector<int> comps(static_cast<size_t>(n_gauge_slots + n_fermion_sites), 0);
  // Lexicographic enumeration with the last component fastest.
  const int n_comp = n_gauge_slots + n_fermion_sites;
  auto limit = [&](int pos) {
    return pos < n_gauge_slots ? levels : 2;
  };
  while (true) {
    int excitation = 0;
    for (int i = 0; i < n_gauge_slots; ++i) excitation += comps[static_cast<size_t>(i)];
    bool keep = !scheme.n_max || excitation <= *scheme.n_max;
    if (keep && scheme.parity != ParitySector::Both) {
      int odd_count = 0;
      for (int i = 0; i < n_gauge_slots; ++i)
        if (level_parities[static_cast<size_t>(comps[static_cast<size_t>(i)])] == Parity::Odd)
          ++odd_count;
      const bool even = odd_count % 2 == 0;
      keep = (scheme.parity == ParitySector::Even) ? even : !even;
    }
    if (keep && charge_filter) {
      int occ = 0;
      for (int s = 0; s < n_fermion_sites; ++s)
        occ += comps[static_cast<size_t>(n_gauge_slots + s)];
      keep = occ == charge_target;
    }
    if (keep) states.push_back(ManyBodyBasis::pack(comps));

    int pos = n_comp - 1;
    while (pos >= 0) {
      if (++comps[static_cast<size_t>(pos)] < limit(pos)) break;
      comps[static_cast<size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  std::sort(states.begin(), states.end());
  if (states.empty())
    throw EmptyBasisError("truncation filters eliminated every state");
  return ManyBodyBasis(n_gauge_slots, n_fermion_sites, levels,
                       std::move(states));
}

std::string truncation_label(const TruncationScheme& scheme, int dim) {
  std::string out = std::to_string(scheme.l_max);
  if (scheme.n_max) out += "_" + std::to_string(*scheme.n_max);
  out += "(" + std::to_string(dim) + ")";
  return out;
}

namespace {

const Eigen::MatrixXcd* table_matrix_c(const OperatorTable& t, LocalOp op) {
  switch (op) {
    case LocalOp::E: return &t.e;
    case LocalOp::P: return &t.p;
    case LocalOp::Pdag: return &t.p_dag;
    default: return nullptr;
  }
}

Eigen::MatrixXcd local_matrix(const OperatorTable& t, LocalOp op) {
  if (const Eigen::MatrixXcd* m = table_matrix_c(t, op)) return *m;
  switch (op) {
    case LocalOp::E2: return t.e2.cast<Complex>();
    case LocalOp::Cos: return t.cos_m.cast<Complex>();
    case LocalOp::Sin: return t.sin_m.cast<Complex>();
    case LocalOp::Identity:
      return Eigen::MatrixXcd::Identity(t.dim(), t.dim());
    default: throw std::logic_error("unreachable");
  }
}

// Apply the fermionic factor string (rightmost first) to an occupation
// pattern; returns false when the state is annihilated.
bool apply_fermi(const std::vector<FermiFactor>& factors, uint64_t& occ_bits,
                 int n_sites, double& sign) {
  for (auto it = factors.rbegin(); it != factors.rend(); ++it) {
    const uint64_t bit = uint64_t{1} << it->site;
    const bool occupied = occ_bits & bit;
    if (it->dagger == occupied) return false;
    int before = 0;
    for (int j = 0; j < it->site; ++j)
      if (occ_bits & (uint64_t{1} << j)) ++before;
    if (before % 2 == 1) sign = -sign;
    occ_bits ^= bit;
  }
  (void)n_sites;
  return true;
}

void project_term_into(const Term& term,
                       const std::vector<const OperatorTable*>& tables,
                       const ManyBodyBasis& basis,
                       std::vector<Eigen::Triplet<Complex>>& triplets) {
  const int dim = basis.dim();
  const int ng = basis.n_gauge_slots();
  const int nf = basis.n_fermion_sites();
  const int levels = basis.levels_per_slot();
  for (const auto& [slot, op] : term.gauge_factors) {
    if (slot < 0 || slot >= ng) throw InvalidParameter("gauge slot out of range");
    if (tables[static_cast<size_t>(slot)]->dim() < levels)
      throw InvalidParameter("operator table smaller than the truncation");
    (void)op;
  }

  std::vector<Eigen::MatrixXcd> mats;
  mats.reserve(term.gauge_factors.size());
  for (const auto& [slot, op] : term.gauge_factors)
    mats.push_back(local_matrix(*tables[static_cast<size_t>(slot)], op));

  const size_t nfac = term.gauge_factors.size();
  std::vector<int> rows(nfac, 0);
  for (int col = 0; col < dim; ++col) {
    // Fermionic part first: at most one output occupation pattern.
    double fsign = 1.0;
    uint64_t occ = 0;
    for (int s = 0; s < nf; ++s)
      if (basis.component(col, ng + s)) occ |= uint64_t{1} << s;
    if (!term.fermi_factors.empty() &&
        !apply_fermi(term.fermi_factors, occ, nf, fsign))
      continue;

    std::fill(rows.begin(), rows.end(), 0);
    while (true) {
      Complex amp = term.coeff * fsign;
      for (size_t f = 0; f < nfac; ++f) {
        const int slot = term.gauge_factors[f].first;
        amp *= mats[f](rows[f], basis.component(col, slot));
        if (amp == Complex{0.0, 0.0}) break;
      }
      if (std::abs(amp) > kDropTol) {
        std::vector<int> comps(static_cast<size_t>(ng + nf));
        for (int i = 0; i < ng; ++i) comps[static_cast<size_t>(i)] = basis.component(col, i);
        for (size_t f = 0; f < nfac; ++f)
          comps[static_cast<size_t>(term.gauge_factors[f].first)] = rows[f];
        for (int s = 0; s < nf; ++s)
          comps[static_cast<size_t>(ng + s)] = (occ >> s) & 1;
        const int row = basis.index_of(ManyBodyBasis::pack(comps));
        if (row >= 0) triplets.emplace_back(row, col, amp);
      }
      // Advance the multi-row counter over the acting slots.
      size_t f = 0;
      for (; f < nfac; ++f) {
        if (++rows[f] < levels) break;
        rows[f] = 0;
      }
      if (f == nfac) break;
    }
  }
}

}  // namespace

SparseMatrixXcd project_term(const Term& term,
                             const std::vector<const OperatorTable*>& tables,
                             const ManyBodyBasis& basis) {
  std::vector<Eigen::Triplet<Complex>> triplets;
  project_term_into(term, tables, basis, triplets);
  SparseMatrixXcd m(basis.dim(), basis.dim());
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.prune([](int, int, const Complex& v) { return std::abs(v) > kDropTol; });
  return m;
}

SparseMatrixXcd assemble(const HamiltonianTermList& list,
                         const std::vector<const OperatorTable*>& tables,
                         const ManyBodyBasis& basis) {
  std::vector<Eigen::Triplet<Complex>> triplets;
  for (const Term& term : list.terms)
    project_term_into(term, tables, basis, triplets);
  if (list.constant_offset != 0.0)
    for (int i = 0; i < basis.dim(); ++i)
      triplets.emplace_back(i, i, Complex(list.constant_offset, 0.0));
  SparseMatrixXcd m(basis.dim(), basis.dim());
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.prune([](int, int, const Complex& v) { return std::abs(v) > kDropTol; });
  return m;
}

}  // namespace rdb
