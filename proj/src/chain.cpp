#include "qctf/chain.hpp"

#include "qctf/io.hpp"

#include <json.hpp>

#include <bit>
#include <random>
#include <stdexcept>

namespace qctf {

void ChainSpec::validate() const {
  if (n_sites < 2 || n_sites > 30) {
    throw std::invalid_argument("chain needs 2 <= N <= 30 sites, got " + std::to_string(n_sites));
  }
  if (!(coupling > 0.0)) throw std::invalid_argument("coupling J must be positive");
  if (!(disorder_bound >= 0.0)) throw std::invalid_argument("disorder bound W must be >= 0");
}

BasisState::BasisState(int n_sites, std::uint64_t bits) : n_sites_(n_sites), bits_(bits) {
  if (n_sites < 1 || n_sites > 63) throw std::invalid_argument("basis word width out of range");
  if (bits >> n_sites) throw std::invalid_argument("basis word has bits beyond N");
}

int BasisState::population() const { return std::popcount(bits_); }

BasisState BasisState::flipped(int site) const {
  if (site < 1 || site > n_sites_) throw std::out_of_range("site out of range");
  return {n_sites_, bits_ ^ (std::uint64_t{1} << (site - 1))};
}

std::string BasisState::to_string() const {
  std::string s;
  s.reserve(static_cast<std::size_t>(n_sites_));
  for (int k = 1; k <= n_sites_; ++k) s.push_back(up(k) ? '1' : '0');
  return s;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ (index * 0xd1b54a32d192ed03ULL));
}

DisorderFields sample_disorder(const ChainSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(splitmix64(seed));
  DisorderFields out;
  out.seed = seed;
  out.fields.resize(static_cast<std::size_t>(spec.n_sites));
  for (auto& h : out.fields) {
    // W (2u - 1) with u in [0, 1): |h| <= W always.
    h = spec.disorder_bound * (2.0 * unit_interval(rng()) - 1.0);
  }
  return out;
}

HamiltonianMatrix build_hamiltonian(const ChainSpec& spec, const DisorderFields& fields) {
  spec.validate();
  if (fields.fields.size() != static_cast<std::size_t>(spec.n_sites)) {
    throw std::invalid_argument("disorder fields length does not match N");
  }
  const int n = spec.n_sites;
  const double j = spec.coupling;
  const auto dim = static_cast<Eigen::Index>(spec.dimension());

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(dim) * static_cast<std::size_t>(n));
  for (Eigen::Index w = 0; w < dim; ++w) {
    const BasisState s(n, static_cast<std::uint64_t>(w));
    double diag = unperturbed_energy(fields, s);
    for (int k = 1; k < n; ++k) {
      diag += j * s.spin(k) * s.spin(k + 1);
      if (s.up(k) != s.up(k + 1)) {
        const auto target = static_cast<Eigen::Index>(w ^ (Eigen::Index{3} << (k - 1)));
        triplets.emplace_back(target, w, 0.5 * j);
      }
    }
    triplets.emplace_back(w, w, diag);
  }
  HamiltonianMatrix h;
  h.matrix.resize(dim, dim);
  h.matrix.setFromTriplets(triplets.begin(), triplets.end());
  h.matrix.makeCompressed();
  h.spec = spec;
  h.fields = fields;
  return h;
}

BasisState neel_state(const ChainSpec& spec, bool up_first) {
  std::uint64_t bits = 0;
  for (int k = 1; k <= spec.n_sites; ++k) {
    const bool up = ((k % 2) == 1) == up_first;
    if (up) bits |= std::uint64_t{1} << (k - 1);
  }
  return {spec.n_sites, bits};
}

double unperturbed_energy(const DisorderFields& fields, const BasisState& state) {
  if (fields.fields.size() != static_cast<std::size_t>(state.n_sites())) {
    throw std::invalid_argument("disorder fields length does not match the state");
  }
  double e = 0.0;
  for (int k = 1; k <= state.n_sites(); ++k) e += fields.h(k) * state.spin(k);
  return e;
}

std::optional<BasisState> apply_bond_flip(const BasisState& state, int bond) {
  if (bond < 1 || bond > state.n_sites() - 1) {
    throw std::out_of_range("bond " + std::to_string(bond) + " outside 1..N-1");
  }
  if (state.up(bond) == state.up(bond + 1)) return std::nullopt;
  return BasisState(state.n_sites(), state.bits() ^ (std::uint64_t{3} << (bond - 1)));
}

std::uint64_t complement_index(std::uint64_t word, int site) {
  const int b = site - 1;
  const std::uint64_t low = word & ((std::uint64_t{1} << b) - 1);
  return low | ((word >> (b + 1)) << b);
}

std::uint64_t insert_site(std::uint64_t complement, int site, bool up) {
  const int b = site - 1;
  const std::uint64_t low = complement & ((std::uint64_t{1} << b) - 1);
  const std::uint64_t high = (complement >> b) << (b + 1);
  return high | low | (static_cast<std::uint64_t>(up) << b);
}

std::string fields_to_json(const ChainSpec& spec, const DisorderFields& fields) {
  // Hand-written so every float carries 17 significant digits.
  std::string s = "{\"n\": " + std::to_string(spec.n_sites) + ", \"j\": " + format_double(spec.coupling) +
                  ", \"w\": " + format_double(spec.disorder_bound) + ", \"seed\": " + std::to_string(fields.seed) +
                  ", \"fields\": [";
  for (std::size_t i = 0; i < fields.fields.size(); ++i) {
    if (i) s += ", ";
    s += format_double(fields.fields[i]);
  }
  return s + "]}\n";
}

void fields_from_json(const std::string& text, ChainSpec& spec, DisorderFields& fields) {
  const auto doc = nlohmann::json::parse(text);
  spec.n_sites = doc.at("n").get<int>();
  spec.coupling = doc.at("j").get<double>();
  spec.disorder_bound = doc.at("w").get<double>();
  fields.seed = doc.at("seed").get<std::uint64_t>();
  fields.fields = doc.at("fields").get<std::vector<double>>();
  spec.validate();
  if (fields.fields.size() != static_cast<std::size_t>(spec.n_sites)) {
    throw std::invalid_argument("fields length does not match n");
  }
}

}  // namespace qctf
