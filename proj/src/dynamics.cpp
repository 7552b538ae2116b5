#include "qctf/dynamics.hpp"

#include "qctf/io.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace qctf {

StateVector basis_vector(const BasisState& state) {
  StateVector v = StateVector::Zero(Eigen::Index{1} << state.n_sites());
  v(static_cast<Eigen::Index>(state.bits())) = 1.0;
  return v;
}

EigenSystem::EigenSystem(ChainSpec spec, std::vector<SectorEigen> sectors)
    : spec_(spec), sectors_(std::move(sectors)) {
  const auto dim = static_cast<Eigen::Index>(spec_.dimension());
  sector_by_population_.assign(static_cast<std::size_t>(spec_.n_sites + 1), -1);
  row_in_sector_.assign(static_cast<std::size_t>(dim), -1);
  struct Entry {
    double e;
    int sector;
    Eigen::Index col;
  };
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(dim));
  for (int s = 0; s < static_cast<int>(sectors_.size()); ++s) {
    const auto& sec = sectors_[static_cast<std::size_t>(s)];
    sector_by_population_.at(static_cast<std::size_t>(sec.population)) = s;
    for (std::size_t r = 0; r < sec.words.size(); ++r) {
      row_in_sector_.at(sec.words[r]) = static_cast<Eigen::Index>(r);
    }
    for (Eigen::Index c = 0; c < sec.energies.size(); ++c) entries.push_back({sec.energies(c), s, c});
  }
  if (static_cast<Eigen::Index>(entries.size()) != dim) {
    throw std::invalid_argument("sectors do not cover the Hilbert space");
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.e < b.e; });
  energies_.resize(dim);
  order_.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    energies_(static_cast<Eigen::Index>(i)) = entries[i].e;
    order_.emplace_back(entries[i].sector, entries[i].col);
  }
}

StateVector EigenSystem::vector(Eigen::Index n) const {
  const auto [s, col] = locate(n);
  const auto& sec = sectors_[static_cast<std::size_t>(s)];
  StateVector v = StateVector::Zero(dimension());
  for (std::size_t r = 0; r < sec.words.size(); ++r) {
    v(static_cast<Eigen::Index>(sec.words[r])) = sec.vectors(static_cast<Eigen::Index>(r), col);
  }
  return v;
}

std::pair<int, Eigen::Index> EigenSystem::sector_of(std::uint64_t word) const {
  const int pop = std::popcount(word);
  return {sector_by_population_.at(static_cast<std::size_t>(pop)), row_in_sector_.at(word)};
}

EigenSystem diagonalize(const HamiltonianMatrix& h, Eigen::Index max_dimension) {
  const Eigen::Index dim = h.dimension();
  if (dim > max_dimension) {
    throw std::length_error("dimension " + std::to_string(dim) + " exceeds the dense cap " +
                            std::to_string(max_dimension) + "; use the Krylov path (evolve_krylov)");
  }
  const int n = h.spec.n_sites;
  std::vector<SectorEigen> sectors(static_cast<std::size_t>(n + 1));
  std::vector<Eigen::Index> local(static_cast<std::size_t>(dim));
  for (int p = 0; p <= n; ++p) sectors[static_cast<std::size_t>(p)].population = p;
  for (Eigen::Index w = 0; w < dim; ++w) {
    auto& sec = sectors[static_cast<std::size_t>(std::popcount(static_cast<std::uint64_t>(w)))];
    local[static_cast<std::size_t>(w)] = static_cast<Eigen::Index>(sec.words.size());
    sec.words.push_back(static_cast<std::uint64_t>(w));
  }
  for (auto& sec : sectors) {
    const auto m = static_cast<Eigen::Index>(sec.words.size());
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index c = 0; c < m; ++c) {
      const auto col = static_cast<Eigen::Index>(sec.words[static_cast<std::size_t>(c)]);
      for (Eigen::SparseMatrix<double>::InnerIterator it(h.matrix, col); it; ++it) {
        block(local[static_cast<std::size_t>(it.row())], c) = it.value();
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(block);
    if (solver.info() != Eigen::Success) throw NumericContractError("sector eigensolver failed");
    sec.energies = solver.eigenvalues();
    sec.vectors = solver.eigenvectors();
  }
  return EigenSystem(h.spec, std::move(sectors));
}

SpectralPropagator::SpectralPropagator(const EigenSystem& eig, const StateVector& psi0) : eig_(&eig) {
  if (psi0.size() != eig.dimension()) throw std::invalid_argument("state dimension mismatch");
  for (const auto& sec : eig.sectors()) {
    Eigen::VectorXcd local(static_cast<Eigen::Index>(sec.words.size()));
    for (std::size_t r = 0; r < sec.words.size(); ++r) {
      local(static_cast<Eigen::Index>(r)) = psi0(static_cast<Eigen::Index>(sec.words[r]));
    }
    overlaps_.push_back(sec.vectors.transpose() * local);
  }
}

StateVector SpectralPropagator::at(double t) const {
  StateVector out = StateVector::Zero(eig_->dimension());
  const auto& sectors = eig_->sectors();
  for (std::size_t s = 0; s < sectors.size(); ++s) {
    const auto& b = overlaps_[s];
    if (b.isZero(0.0)) continue;
    const auto& sec = sectors[s];
    const Eigen::VectorXcd phased =
        b.cwiseProduct((sec.energies * std::complex<double>(0.0, -t)).array().exp().matrix());
    const Eigen::VectorXcd local = sec.vectors * phased;
    for (std::size_t r = 0; r < sec.words.size(); ++r) {
      out(static_cast<Eigen::Index>(sec.words[r])) = local(static_cast<Eigen::Index>(r));
    }
  }
  return out;
}

StateVector evolve(const EigenSystem& eig, const StateVector& psi0, double t) {
  if (t == 0.0) return psi0;
  return SpectralPropagator(eig, psi0).at(t);
}

KrylovPropagator::KrylovPropagator(const HamiltonianMatrix& h, KrylovOptions opts) : h_(&h), opts_(opts) {}

int KrylovPropagator::step(StateVector& psi, double dt) const {
  const double beta0 = psi.norm();
  if (beta0 == 0.0 || dt == 0.0) return 0;
  const Eigen::Index n = h_->dimension();
  const int m_max = static_cast<int>(std::min<Eigen::Index>(opts_.max_subspace, n));

  std::vector<StateVector> basis;
  basis.push_back(psi / beta0);
  std::vector<double> alpha, beta;
  for (int j = 0;; ++j) {
    StateVector w = h_->matrix * basis.back();
    const double a = basis.back().dot(w).real();
    w -= a * basis.back();
    if (j > 0) w -= beta.back() * basis[static_cast<std::size_t>(j - 1)];
    for (const auto& v : basis) w -= v.dot(w) * v;
    const double b = w.norm();
    alpha.push_back(a);
    const int m = j + 1;

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) t(i, i) = alpha[static_cast<std::size_t>(i)];
    for (int i = 0; i + 1 < m; ++i) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    const Eigen::VectorXcd phases = (es.eigenvalues() * std::complex<double>(0.0, -dt)).array().exp().matrix();
    const Eigen::VectorXcd y = es.eigenvectors() * phases.cwiseProduct(es.eigenvectors().row(0).transpose());
    const double err = b * std::abs(y(m - 1));

    if (err <= opts_.tolerance || m == n) {
      StateVector next = StateVector::Zero(n);
      for (int i = 0; i < m; ++i) next += y(i) * basis[static_cast<std::size_t>(i)];
      psi = beta0 * next;
      return m;
    }
    if (m >= m_max) {
      throw NumericContractError("Krylov subspace did not converge within " + std::to_string(m_max) +
                                 " vectors (residual " + format_double(err) + ")");
    }
    beta.push_back(b);
    basis.push_back(w / b);
  }
}

std::vector<StateVector> evolve_krylov(const HamiltonianMatrix& h, const StateVector& psi0, double dt, int steps,
                                       KrylovOptions opts) {
  if (steps < 0) throw std::invalid_argument("negative step count");
  if (psi0.size() != h.dimension()) throw std::invalid_argument("state dimension mismatch");
  KrylovPropagator prop(h, opts);
  std::vector<StateVector> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(psi0);
  StateVector psi = psi0;
  for (int s = 1; s <= steps; ++s) {
    try {
      prop.step(psi, dt);
    } catch (const NumericContractError& e) {
      throw NumericContractError("Krylov step " + std::to_string(s) + ": " + e.what());
    }
    out.push_back(psi);
  }
  return out;
}

double renyi2(double q) {
  if (!(q >= 0.0) || q >= 0.5) throw std::domain_error("renyi2 needs 0 <= q < 1/2");
  return -std::log1p(-2.0 * q);
}

double checked_q(double q, double t) {
  if (!(q >= -kQTolerance && q <= 0.25 + kQTolerance)) {
    throw NumericContractError("Q = " + format_double(q) + " at t = " + format_double(t) + " outside [0, 1/4]");
  }
  return q;
}

namespace {

std::size_t sample_count(double t_max, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(t_max >= dt)) throw std::invalid_argument("t_max must be >= dt");
  return static_cast<std::size_t>(std::floor(t_max / dt + 1e-9)) + 1;
}

}  // namespace

EntanglementTrace trace_q(const EigenSystem& eig, const StateVector& psi0, int site, double t_max, double dt) {
  const std::size_t m = sample_count(t_max, dt);
  detail::check_site(psi0.size(), site);
  SpectralPropagator prop(eig, psi0);
  EntanglementTrace tr;
  tr.dt = dt;
  tr.times.resize(m);
  tr.values.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double t = static_cast<double>(j) * dt;
    tr.times[j] = t;
    tr.values[j] = checked_q(q_measure(reduced_density(j == 0 ? psi0 : prop.at(t), site)), t);
  }
  return tr;
}

EntanglementTrace trace_q_krylov(const HamiltonianMatrix& h, const StateVector& psi0, int site, double t_max,
                                 double dt, KrylovOptions opts) {
  const std::size_t m = sample_count(t_max, dt);
  detail::check_site(psi0.size(), site);
  KrylovPropagator prop(h, opts);
  EntanglementTrace tr;
  tr.dt = dt;
  StateVector psi = psi0;
  for (std::size_t j = 0; j < m; ++j) {
    if (j > 0) {
      try {
        prop.step(psi, dt);
      } catch (const NumericContractError& e) {
        throw NumericContractError("Krylov step " + std::to_string(j) + ": " + e.what());
      }
    }
    const double t = static_cast<double>(j) * dt;
    tr.times.push_back(t);
    tr.values.push_back(checked_q(q_measure(reduced_density(psi, site)), t));
  }
  return tr;
}

void write_trace_csv(const EntanglementTrace& trace, std::ostream& out) {
  out << "t,q\n";
  for (std::size_t j = 0; j < trace.times.size(); ++j) {
    out << format_double(trace.times[j]) << ',' << format_double(trace.values[j]) << '\n';
  }
}

EntanglementTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "t,q") throw std::runtime_error("trace CSV must start with 't,q'");
  EntanglementTrace tr;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("malformed trace row: " + line);
    tr.times.push_back(parse_double(std::string_view(line).substr(0, comma)));
    tr.values.push_back(parse_double(std::string_view(line).substr(comma + 1)));
  }
  if (tr.times.size() >= 2) tr.dt = tr.times[1] - tr.times[0];
  return tr;
}

}  // namespace qctf
