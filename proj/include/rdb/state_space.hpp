#ifndef RDB_STATE_SPACE_HPP
#define RDB_STATE_SPACE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Sparse>

#include "rdb/plaquette_basis.hpp"

namespace rdb {

struct EmptyBasisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ParitySector { Both, Even, Odd };

/// Local cut l_max, optional global excitation cap n_max and joint-parity
/// sector selection.
struct TruncationScheme {
  int l_max = 0;
  std::optional<int> n_max;
  ParitySector parity = ParitySector::Both;
};

/// Enumerated tensor-product multi-indices: one level index per gauge slot
/// (0..l_max) followed by one occupation bit per fermion site. States are
/// packed 6 bits per component, sorted lexicographically.
class ManyBodyBasis {
 public:
  ManyBodyBasis(int n_gauge_slots, int n_fermion_sites, int levels_per_slot,
                std::vector<uint64_t> states);

  int dim() const { return static_cast<int>(states_.size()); }
  int n_gauge_slots() const { return n_gauge_; }
  int n_fermion_sites() const { return n_fermion_; }
  int levels_per_slot() const { return levels_; }

  int component(int state, int pos) const {
    return static_cast<int>((states_[static_cast<size_t>(state)] >> (6 * pos)) & 0x3f);
  }
  uint64_t packed(int state) const { return states_[static_cast<size_t>(state)]; }
  /// Position of a packed multi-index, or -1 when it was truncated away.
  int index_of(uint64_t packed) const {
    auto it = index_.find(packed);
    return it == index_.end() ? -1 : it->second;
  }

  static uint64_t pack(const std::vector<int>& comps);

 private:
  int n_gauge_;
  int n_fermion_;
  int levels_;
  std::vector<uint64_t> states_;
  std::unordered_map<uint64_t, int> index_;
};

/// Enumerate all multi-indices passing the truncation filters. The joint
/// parity of a state is the product of the per-level parity labels.
/// fermion_charge_offsets, when non-empty, restricts to total charge zero:
/// sum_i (occ_i - offset_i) = 0.
ManyBodyBasis enumerate_basis(int n_gauge_slots, int n_fermion_sites,
                              const TruncationScheme& scheme,
                              const std::vector<Parity>& level_parities,
                              const std::vector<int>& fermion_charge_offsets = {});

/// Truncation label "L_N(dim)" (or "L(dim)" without n_max).
std::string truncation_label(const TruncationScheme& scheme, int dim);

enum class LocalOp { Identity, E, E2, Cos, Sin, P, Pdag };

/// One elementary fermionic factor; factors in a term are applied
/// right-to-left with ordered sign strings over the fixed site order.
struct FermiFactor {
  bool dagger;
  int site;
};

struct Term {
  Complex coeff;
  std::vector<std::pair<int, LocalOp>> gauge_factors;  // (slot, operator)
  std::vector<FermiFactor> fermi_factors;
};

struct HamiltonianTermList {
  std::vector<Term> terms;
  double constant_offset = 0.0;
};

using SparseMatrixXcd = Eigen::SparseMatrix<Complex>;

/// Project a single term onto the basis: products of single-slot matrix
/// elements times fermionic sign factors, entries below 1e-15 dropped.
SparseMatrixXcd project_term(const Term& term,
                             const std::vector<const OperatorTable*>& tables,
                             const ManyBodyBasis& basis);

/// Full projection of a term list, including the constant offset.
SparseMatrixXcd assemble(const HamiltonianTermList& list,
                         const std::vector<const OperatorTable*>& tables,
                         const ManyBodyBasis& basis);

}  // namespace rdb

#endif
