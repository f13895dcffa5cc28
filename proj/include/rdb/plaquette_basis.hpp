#ifndef RDB_PLAQUETTE_BASIS_HPP
#define RDB_PLAQUETTE_BASIS_HPP

#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace rdb {

using Complex = std::complex<double>;

struct InvalidParameter : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConvergenceMarginError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Parity { Even, Odd };

/// Cut on the Fourier-mode expansion of the single-plaquette problem.
/// The even sector spans cos(k theta) for k = 0..n_trunc, the odd sector
/// sin(k theta) for k = 1..n_trunc.
struct FourierTruncation {
  int n_trunc;
};

/// Margin rule: n_trunc = max(32, ceil(8/g) + 4*l_max), capped at 4096.
/// Weak coupling needs ~1/g modes to resolve a Gaussian of width ~g.
int default_n_trunc(double g, int l_max);

/// Lowest l_max+1 eigenstates of the single-plaquette Hamiltonian
///   H_SP(g) = 2 g^2 R^2 + (1 - cos theta) / g^2
/// at basis parameter g, expanded in parity-resolved Fourier modes.
/// Each coefficient vector lives in its own parity sector (size n_trunc+1
/// for even states, n_trunc for odd ones, modes k = 1..n_trunc).
struct PlaquetteEigenbasis {
  double g_basis = 0.0;
  int l_max = 0;
  Eigen::VectorXd energies;
  std::vector<Parity> parities;
  std::vector<Eigen::VectorXd> coefficients;
  FourierTruncation fourier_truncation{0};

  int n_states() const { return static_cast<int>(energies.size()); }
};

/// Truncated matrices of the plaquette operators in a PlaquetteEigenbasis.
/// e is the rotator R = -i d/dtheta (Hermitian, purely imaginary entries),
/// e2 its square, cos_m / sin_m the real trigonometric operators and
/// p = cos_m + i sin_m the plaquette raising operator.
struct OperatorTable {
  Eigen::MatrixXcd e;
  Eigen::MatrixXd e2;
  Eigen::MatrixXd cos_m;
  Eigen::MatrixXd sin_m;
  Eigen::MatrixXcd p;
  Eigen::MatrixXcd p_dag;
  PlaquetteEigenbasis basis;

  int dim() const { return static_cast<int>(e2.rows()); }
};

/// Fourier-space matrices of H_SP(g), split by parity sector.
/// Both sectors are symmetric tridiagonal: diagonal 2 g^2 k^2 + 1/g^2,
/// cos-theta couplings -1/(2 g^2) between neighbouring modes, with the
/// k=0 <-> k=1 coupling in the even sector carrying the 1/sqrt(2)
/// normalization of the constant mode.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd>
build_fourier_hamiltonian(double g, FourierTruncation trunc);

PlaquetteEigenbasis solve_single_plaquette(double g, FourierTruncation trunc,
                                           int l_max,
                                           bool check_margin = true);

/// Convenience overload using the default n_trunc margin rule.
PlaquetteEigenbasis solve_single_plaquette(double g, int l_max);

/// The g_basis -> infinity member of the family: pure Fourier modes ordered
/// by |k|, with the +k/-k pair resolved into the (even, odd) cos/sin states.
PlaquetteEigenbasis electric_eigenbasis(int l_max, FourierTruncation trunc);

enum class AsymptoticRegime { Weak, Strong };

/// Closed-form limits: harmonic oscillator (n + 1/2)/(sqrt(2) g^2) at weak
/// coupling, particle on a ring 2 g^2 ceil(n/2)^2 at strong coupling.
double asymptotic_oracle(double g, AsymptoticRegime regime, int n);

OperatorTable build_operator_table(const PlaquetteEigenbasis& basis);

}  // namespace rdb

#endif
