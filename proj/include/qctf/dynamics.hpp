#pragma once

// Exact time evolution and single-spin entanglement in the time domain.

#include "qctf/chain.hpp"
#include "qctf/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <iosfwd>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qctf {

using StateVector = Eigen::VectorXcd;
// Basis order (up, down) for the selected spin.
using ReducedDensity = Eigen::Matrix2cd;

StateVector basis_vector(const BasisState& state);

// Eigenvectors of one total-S_z sector. Columns of `vectors` are expressed in
// the sector's own basis, listed by `words`.
struct SectorEigen {
  int population = 0;
  std::vector<std::uint64_t> words;
  Eigen::VectorXd energies;
  Eigen::MatrixXd vectors;
};

// Full spectral decomposition, stored sector by sector. Merged indices n run
// over all 2^N eigenpairs in ascending energy.
class EigenSystem {
 public:
  EigenSystem(ChainSpec spec, std::vector<SectorEigen> sectors);

  const ChainSpec& spec() const { return spec_; }
  Eigen::Index dimension() const { return static_cast<Eigen::Index>(order_.size()); }
  const Eigen::VectorXd& energies() const { return energies_; }
  const std::vector<SectorEigen>& sectors() const { return sectors_; }

  // (sector, column) of merged eigenpair n.
  std::pair<int, Eigen::Index> locate(Eigen::Index n) const { return order_.at(static_cast<std::size_t>(n)); }
  StateVector vector(Eigen::Index n) const;
  // Sector holding basis word w, and w's row within it.
  std::pair<int, Eigen::Index> sector_of(std::uint64_t word) const;

 private:
  ChainSpec spec_;
  std::vector<SectorEigen> sectors_;
  std::vector<std::pair<int, Eigen::Index>> order_;
  Eigen::VectorXd energies_;
  std::vector<int> sector_by_population_;
  std::vector<Eigen::Index> row_in_sector_;
};

inline constexpr Eigen::Index kDenseDimensionCap = Eigen::Index{1} << 12;

// Dense diagonalization of every S_z sector. Throws std::length_error beyond
// `max_dimension`; use evolve_krylov there.
EigenSystem diagonalize(const HamiltonianMatrix& h, Eigen::Index max_dimension = kDenseDimensionCap);

// Caches <n|psi0> so repeated evaluations cost one matrix-vector product per
// occupied sector.
class SpectralPropagator {
 public:
  SpectralPropagator(const EigenSystem& eig, const StateVector& psi0);
  StateVector at(double t) const;
  // <n|psi0> for each sector, in the sector's eigenbasis.
  const std::vector<Eigen::VectorXcd>& overlaps() const { return overlaps_; }

 private:
  const EigenSystem* eig_;
  std::vector<Eigen::VectorXcd> overlaps_;
};

StateVector evolve(const EigenSystem& eig, const StateVector& psi0, double t);

struct KrylovOptions {
  double tolerance = 1e-12;  // a-posteriori local error per step
  int max_subspace = 64;
};

// Lanczos propagator for e^{-iH dt}; the subspace grows until the residual
// estimate beta_m |[e^{-i T_m dt}]_{m,1}| is below tolerance.
class KrylovPropagator {
 public:
  explicit KrylovPropagator(const HamiltonianMatrix& h, KrylovOptions opts = {});
  // Advances psi in place by dt. Returns the subspace dimension used.
  int step(StateVector& psi, double dt) const;

 private:
  const HamiltonianMatrix* h_;
  KrylovOptions opts_;
};

// Returns psi0 followed by `steps` states spaced dt apart. Non-convergence
// raises NumericContractError naming the step.
std::vector<StateVector> evolve_krylov(const HamiltonianMatrix& h, const StateVector& psi0, double dt, int steps,
                                       KrylovOptions opts = {});

namespace detail {
inline void check_site(Eigen::Index dim, int site) {
  if (dim < 2 || (dim & (dim - 1)) != 0) throw std::invalid_argument("state dimension is not a power of two");
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if (site < 1 || site > n) throw std::out_of_range("site " + std::to_string(site) + " outside 1..N");
}
}  // namespace detail

// Partial trace over every site except `site`.
template <typename Derived>
ReducedDensity reduced_density(const Eigen::MatrixBase<Derived>& psi, int site) {
  detail::check_site(psi.size(), site);
  const Eigen::Index mask = Eigen::Index{1} << (site - 1);
  std::complex<double> up_up = 0.0, down_down = 0.0, up_down = 0.0;
  for (Eigen::Index w = 0; w < psi.size(); ++w) {
    if (!(w & mask)) continue;
    const std::complex<double> u = psi(w);
    const std::complex<double> d = psi(w ^ mask);
    up_up += std::norm(u);
    down_down += std::norm(d);
    up_down += u * std::conj(d);
  }
  ReducedDensity rho;
  rho << up_up, up_down, std::conj(up_down), down_down;
  return rho;
}

// det rho = ad - |b|^2 for the Hermitian 2x2.
inline double q_measure(const ReducedDensity& rho) {
  return rho(0, 0).real() * rho(1, 1).real() - std::norm(rho(0, 1));
}

// Sum over column pairs of |det M^{ij}|^2 for the 2 x d coefficient matrix
// M(a, l) = <a l|psi>.
template <typename Derived>
double q_minors(const Eigen::MatrixBase<Derived>& psi, int site) {
  detail::check_site(psi.size(), site);
  const Eigen::Index d = psi.size() / 2;
  Eigen::Matrix<std::complex<double>, 2, Eigen::Dynamic> m(2, d);
  for (Eigen::Index l = 0; l < d; ++l) {
    const auto ul = static_cast<std::uint64_t>(l);
    m(0, l) = psi(static_cast<Eigen::Index>(insert_site(ul, site, true)));
    m(1, l) = psi(static_cast<Eigen::Index>(insert_site(ul, site, false)));
  }
  double q = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      q += std::norm(m(0, i) * m(1, j) - m(0, j) * m(1, i));
    }
  }
  return q;
}

// S_2 = -ln(1 - 2q). Throws std::domain_error for q >= 1/2 or q < 0.
double renyi2(double q);

struct EntanglementTrace {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<double> values;
};

inline constexpr double kQTolerance = 1e-12;

// Validates a Q sample against [-1e-12, 1/4 + 1e-12]; values are stored as
// computed, never clamped.
double checked_q(double q, double t);

EntanglementTrace trace_q(const EigenSystem& eig, const StateVector& psi0, int site, double t_max, double dt);
EntanglementTrace trace_q_krylov(const HamiltonianMatrix& h, const StateVector& psi0, int site, double t_max,
                                 double dt, KrylovOptions opts = {});

// Header `t,q`.
void write_trace_csv(const EntanglementTrace& trace, std::ostream& out);
EntanglementTrace read_trace_csv(std::istream& in);

}  // namespace qctf
