#pragma once

// Frequency-domain entanglement via pole sums. Every contour integral over the
// structural variables reduces to selecting a coefficient, and every contour
// integral over s to reading off residues at the poles -i w; nothing here
// integrates numerically.
//
// Notation: for the selected spin M (site r) and a complement basis index l,
// c_{a l}(s) = sum_n <a l|n><n|psi0> / (s + i E_n), a in {up, down}.

#include "qctf/chain.hpp"
#include "qctf/dynamics.hpp"
#include "qctf/polesum.hpp"

#include <cstdint>
#include <map>
#include <utility>

namespace qctf {

struct QctfOptions {
  ConsolidationPolicy policy;
  int max_sites = 6;                            // pole budget for entanglement_polesum
  std::size_t max_bytes = std::size_t{1} << 30;  // qctf_block memory cap
};

// freq_tol = 1e-9 J, pruning off.
QctfOptions default_qctf_options(const ChainSpec& spec);

PoleSum amplitude_polesum(const EigenSystem& eig, const StateVector& psi0, int site, bool up, std::uint64_t l,
                          const ConsolidationPolicy& policy = {});

// <+l| rho(s) |-k> for all (l, k): the off-diagonal block of the transformed
// density matrix. The coefficient of z_d^{l-k} z_a^{l+k} is entries.at({l, k});
// absent pairs are identically zero.
struct QctfBlock {
  int site = 0;
  std::uint64_t complement_dim = 0;
  std::map<std::pair<std::uint64_t, std::uint64_t>, PoleSum> entries;

  const PoleSum* find(std::uint64_t l, std::uint64_t k) const;
};

// Throws std::length_error with a size estimate above options.max_bytes.
QctfBlock qctf_block(const EigenSystem& eig, const StateVector& psi0, int site, const QctfOptions& options);

std::complex<double> reconstruct_element(const QctfBlock& block, std::uint64_t l, std::uint64_t k, double t);

// Q(s) = rho_{++} * rho_{--} - rho_{+-} * rho_{-+}, where
// rho_{ab} = sum_l c_{a l} * conj(c_{b l}). The result is checked for the
// pairing (w, c) <-> (-w, c*) and flagged real-valued. `dropped_mass` bounds
// max_t |Q_exact(t) - Q_returned(t)| when pruning is enabled.
Consolidated entanglement_polesum_budgeted(const EigenSystem& eig, const StateVector& psi0, int site,
                                           const QctfOptions& options);
PoleSum entanglement_polesum(const EigenSystem& eig, const StateVector& psi0, int site, const QctfOptions& options);

struct EigenstateSplit {
  std::complex<double> alpha_plus;
  std::complex<double> alpha_minus;
  Eigen::VectorXcd a_plus;   // unit vector over the complement, empty if alpha_plus == 0
  Eigen::VectorXcd a_minus;  // likewise
  std::complex<double> overlap;  // <A-|A+>, 0 when undefined
  bool swapped = false;          // roles exchanged because the up component vanished
};

struct StaticMeasure {
  EigenstateSplit split;
  double q = 0.0;  // |alpha+ alpha-|^2 (1 - |<A-|A+>|^2)
};

StaticMeasure static_measure(const StateVector& vector, int site);

// |<A-|A+>| in [0, 1]: 1 for a product state, 0 for a maximally non-local
// split. Throws std::domain_error when either alpha vanishes.
double nonlocality_overlap(const EigenstateSplit& split);

}  // namespace qctf
