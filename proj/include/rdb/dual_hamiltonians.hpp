#ifndef RDB_DUAL_HAMILTONIANS_HPP
#define RDB_DUAL_HAMILTONIANS_HPP

#include <string>

#include "rdb/state_space.hpp"

namespace rdb {

struct UnsupportedModel : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Boundary { Periodic, Open };
enum class Matter { None, Staggered };

/// Lattice geometry, boundary conditions and couplings. For open pure-gauge
/// lattices nx, ny count plaquettes; the staggered-matter model is the
/// single-plaquette system on a 2x2 site lattice.
struct LatticeModel {
  int nx = 2;
  int ny = 2;
  Boundary boundary = Boundary::Periodic;
  double g = 1.0;
  Matter matter = Matter::None;
  double m = 0.0;
  double kappa = 0.0;
};

inline double beta_from_g(double g) { return 1.0 / (2.0 * g * g); }
inline double g_from_beta(double beta) { return 1.0 / std::sqrt(2.0 * beta); }

/// Minimal torus (2x2 periodic, pure gauge): three plaquette slots
/// (0,0), (1,0), (1,1); wrapping loops fixed to zero.
HamiltonianTermList build_minimal_torus(const LatticeModel& model);

/// Open pure-gauge lattice with nx*ny plaquette slots.
HamiltonianTermList build_obc_pure_gauge(const LatticeModel& model);

/// Periodic N x N pure gauge with the reference plaquette eliminated
/// (N^2 - 1 slots, one N^2-1-fold product term). Solving is restricted to
/// N = 2 elsewhere; the term list itself builds for any N.
HamiltonianTermList build_pbc_pure_gauge_nn(const LatticeModel& model);

/// Single-plaquette cQED on a 2x2 site lattice: one gauge slot plus four
/// staggered fermion sites ordered (0,0), (1,0), (0,1), (1,1).
HamiltonianTermList build_obc_qed_2x2(const LatticeModel& model);

/// Assembled model: full Hamiltonian, the magnetic part retained for the
/// plaquette observable, slot counts and the fermion charge offsets
/// (q_n = psi^dag psi - offset_n).
struct ModelTerms {
  HamiltonianTermList h;
  HamiltonianTermList h_b;
  int n_gauge_slots = 0;
  int n_fermion_sites = 0;
  double n_plaq = 0.0;
  std::vector<int> fermion_charge_offsets;
};

ModelTerms build_model(const LatticeModel& model);

/// Term-list JSON (coefficients plus slot -> operator-tag maps), for
/// debugging and cross-implementation diffing.
std::string term_list_to_json(const HamiltonianTermList& list);

}  // namespace rdb

#endif
