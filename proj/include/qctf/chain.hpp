#pragma once

// Disordered spin-1/2 Heisenberg chain with open boundaries:
//
//   H = J sum_{k=1}^{N-1} S_k . S_{k+1} + sum_k h_k S_k^z,   S = sigma / 2,
//
// expressed in the 2^N product basis. Sites are numbered 1..N. A basis word
// stores site k in bit (k-1), 1 meaning spin-up; the integer value of the word
// is the basis index.

#include <Eigen/SparseCore>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qctf {

struct ChainSpec {
  int n_sites = 2;
  double coupling = 1.0;        // J
  double disorder_bound = 0.0;  // W

  // Throws std::invalid_argument on N < 2, N > 30, J <= 0 or W < 0.
  void validate() const;
  std::uint64_t dimension() const { return std::uint64_t{1} << n_sites; }
};

struct DisorderFields {
  std::vector<double> fields;  // fields[k - 1] = h_k
  std::uint64_t seed = 0;

  double h(int site) const { return fields.at(static_cast<std::size_t>(site - 1)); }
  friend bool operator==(const DisorderFields&, const DisorderFields&) = default;
};

class BasisState {
 public:
  BasisState() = default;
  BasisState(int n_sites, std::uint64_t bits);

  int n_sites() const { return n_sites_; }
  std::uint64_t bits() const { return bits_; }
  bool up(int site) const { return (bits_ >> (site - 1)) & 1U; }
  double spin(int site) const { return up(site) ? 0.5 : -0.5; }
  int population() const;
  BasisState flipped(int site) const;

  // Site 1 first, e.g. "1010" for the up-first Neel state on four sites.
  std::string to_string() const;

  friend bool operator==(const BasisState&, const BasisState&) = default;

 private:
  int n_sites_ = 0;
  std::uint64_t bits_ = 0;
};

struct HamiltonianMatrix {
  Eigen::SparseMatrix<double> matrix;  // real symmetric in the product basis
  ChainSpec spec;
  DisorderFields fields;

  Eigen::Index dimension() const { return matrix.rows(); }
};

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Used for every seed
// derivation so streams do not depend on scheduling.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index);

// Uniform double in [0, 1) from the top 53 bits of a 64-bit word.
inline double unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// h_k i.i.d. uniform on [-W, W], drawn from std::mt19937_64 seeded with
// splitmix64(seed).
DisorderFields sample_disorder(const ChainSpec& spec, std::uint64_t seed);

HamiltonianMatrix build_hamiltonian(const ChainSpec& spec, const DisorderFields& fields);

BasisState neel_state(const ChainSpec& spec, bool up_first);

// sum_k h_k s_k for the product state.
double unperturbed_energy(const DisorderFields& fields, const BasisState& state);

// Flip-flop action of J_k = J S_k . S_{k+1}: toggles sites k and k+1 when they
// are anti-parallel, std::nullopt when parallel. Throws std::out_of_range
// unless 1 <= bond <= N-1.
std::optional<BasisState> apply_bond_flip(const BasisState& state, int bond);

// Removes site `site` from a word, giving the complement index l.
std::uint64_t complement_index(std::uint64_t word, int site);
// Inverse of complement_index: inserts `up` at `site`.
std::uint64_t insert_site(std::uint64_t complement, int site, bool up);

// {"n", "j", "w", "seed", "fields"}.
std::string fields_to_json(const ChainSpec& spec, const DisorderFields& fields);
void fields_from_json(const std::string& text, ChainSpec& spec, DisorderFields& fields);

}  // namespace qctf
