#include "oracles.hpp"
#include "qctf/qctf.hpp"

#include <doctest.h>

#include <random>

using namespace qctf;
using cd = std::complex<double>;

namespace {

struct Setup {
  ChainSpec spec;
  HamiltonianMatrix h;
  EigenSystem eig;
  StateVector psi0;
};

Setup make(int n, double w, std::uint64_t seed) {
  const ChainSpec spec{n, 1.0, w};
  auto h = build_hamiltonian(spec, sample_disorder(spec, seed));
  auto eig = diagonalize(h);
  StateVector psi0 = basis_vector(neel_state(spec, true));
  return {spec, std::move(h), std::move(eig), std::move(psi0)};
}

// Coefficient at omega, or 0 if no pole sits there.
cd coeff_at(const PoleSum& f, double omega, double tol) {
  cd sum = 0;
  for (const auto& p : f.terms()) {
    if (std::abs(p.omega - omega) <= tol) sum += p.coeff;
  }
  return sum;
}

}  // namespace

TEST_CASE("amplitude pole sums reproduce the evolved amplitudes") {
  const auto s = make(6, 5.0, 2);
  for (double t : {0.0, 0.9, 4.0, 31.0}) {
    const auto psi = evolve(s.eig, s.psi0, t);
    for (std::uint64_t l : {0u, 5u, 13u, 31u}) {
      for (bool up : {true, false}) {
        const auto f = amplitude_polesum(s.eig, s.psi0, 3, up, l);
        CHECK(std::abs(f(t) - psi(static_cast<Eigen::Index>(insert_site(l, 3, up)))) <= 1e-12);
      }
    }
  }
}

TEST_CASE("an eigenstate gives single-pole amplitudes") {
  const auto s = make(4, 2.0, 3);
  const StateVector v = s.eig.vector(5);
  for (std::uint64_t l = 0; l < 8; ++l) {
    // Overlaps with other eigenvectors are round-off, not exact zeros.
    const auto f = consolidate(amplitude_polesum(s.eig, v, 2, true, l), 0.0, 1e-12).sum;
    CHECK(f.size() <= 1);
    if (!f.empty()) CHECK(f.terms()[0].omega == doctest::Approx(s.eig.energies()(5)));
  }
  // Its entanglement pole sum is static.
  const auto q = entanglement_polesum(s.eig, v, 2, default_qctf_options(s.spec));
  for (const auto& p : q.terms()) {
    if (std::abs(p.omega) > 1e-6) CHECK(std::abs(p.coeff) <= 1e-12);
  }
  CHECK(std::abs(q(3.0).real() - static_measure(v, 2).q) <= 1e-12);
}

TEST_CASE("block entries reproduce the density matrix") {
  const auto s = make(5, 4.0, 9);
  const auto block = qctf_block(s.eig, s.psi0, 2, default_qctf_options(s.spec));
  CHECK(block.complement_dim == 16);
  for (double t : {0.0, 1.5, 12.0}) {
    const auto psi = evolve(s.eig, s.psi0, t);
    double worst = 0;
    for (std::uint64_t l = 0; l < 16; ++l) {
      for (std::uint64_t k = 0; k < 16; ++k) {
        const cd exact = psi(static_cast<Eigen::Index>(insert_site(l, 2, true))) *
                         std::conj(psi(static_cast<Eigen::Index>(insert_site(k, 2, false))));
        worst = std::max(worst, std::abs(reconstruct_element(block, l, k, t) - exact));
      }
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("block memory estimate is enforced") {
  const auto s = make(6, 4.0, 9);
  auto opts = default_qctf_options(s.spec);
  opts.max_bytes = 1024;
  CHECK_THROWS_AS(qctf_block(s.eig, s.psi0, 3, opts), std::length_error);
}

TEST_CASE("two spins: poles at 0, Omega, 2 Omega") {
  for (double delta : {0.0, 1.0, 5.0}) {
    const ChainSpec spec{2, 1.0, 10.0};
    const DisorderFields fields{{delta / 2, -delta / 2}, 0};
    const auto eig = diagonalize(build_hamiltonian(spec, fields));
    const StateVector psi0 = basis_vector(BasisState(2, 0b01));
    const auto q = entanglement_polesum(eig, psi0, 1, default_qctf_options(spec));
    const oracle::TwoSpin ts{1.0, delta};
    const double om = ts.omega();
    CHECK(q.real_valued());
    CHECK(std::abs(coeff_at(q, 0, 1e-8) - ts.q0()) <= 1e-12);
    CHECK(std::abs(coeff_at(q, om, 1e-8) - ts.q1() / 2) <= 1e-12);
    CHECK(std::abs(coeff_at(q, -om, 1e-8) - ts.q1() / 2) <= 1e-12);
    CHECK(std::abs(coeff_at(q, 2 * om, 1e-8) - ts.q2() / 2) <= 1e-12);
    CHECK(std::abs(coeff_at(q, -2 * om, 1e-8) - ts.q2() / 2) <= 1e-12);
    for (double t : {0.1, 1.0, 3.0, 20.0}) CHECK(std::abs(q(t).real() - ts.q(t)) <= 1e-12);
  }
  // Degenerate case: cosine of amplitude 1/8 at 2 Omega = 2.
  const oracle::TwoSpin ts{1.0, 0.0};
  CHECK(ts.q(0.7) == doctest::Approx((1 - std::cos(1.4)) / 8));
}

TEST_CASE("entanglement pole sum matches the time-domain trace") {
  const auto s = make(6, 10.0, 1);
  const auto budgeted = entanglement_polesum_budgeted(s.eig, s.psi0, 3, default_qctf_options(s.spec));
  const auto& q = budgeted.sum;
  CHECK(q.real_valued());
  CHECK(budgeted.dropped_mass == 0.0);
  CHECK(conjugate_symmetry_defect(q, 1e-9) <= 1e-9);
  const auto tr = trace_q(s.eig, s.psi0, 3, 40.0, 0.01);
  double worst = 0;
  for (std::size_t j = 0; j < tr.times.size(); ++j) {
    worst = std::max(worst, std::abs(q(tr.times[j]).real() - tr.values[j]));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("entanglement pole sum: budget and pruning bound") {
  const auto s7 = make(7, 10.0, 1);
  CHECK_THROWS_AS(entanglement_polesum(s7.eig, s7.psi0, 3, default_qctf_options(s7.spec)), std::length_error);

  const auto s = make(5, 3.0, 6);
  auto opts = default_qctf_options(s.spec);
  opts.policy.prune_floor = 1e-4;
  const auto pruned = entanglement_polesum_budgeted(s.eig, s.psi0, 3, opts);
  const auto exact = entanglement_polesum(s.eig, s.psi0, 3, default_qctf_options(s.spec));
  CHECK(pruned.dropped_mass > 0.0);
  CHECK(pruned.sum.size() < exact.size());
  for (double t : {0.0, 2.0, 17.0, 39.0}) {
    CHECK(std::abs(pruned.sum(t).real() - exact(t).real()) <= pruned.dropped_mass + 1e-12);
  }
}

TEST_CASE("static measure equals det(rho) and handles product and singlet states") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto v = oracle::random_state(32, rng);
    const int site = 1 + trial % 5;
    CHECK(std::abs(static_measure(v, site).q - q_measure(oracle::partial_trace(v, site))) <= 1e-12);
  }

  StateVector product = StateVector::Zero(4);
  product(0) = 0.6;
  product(1) = 0.8;  // (0.6 |down> + 0.8 |up>) on site 1, site 2 down
  const auto p = static_measure(product, 1);
  CHECK(p.q == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(nonlocality_overlap(p.split) == doctest::Approx(1.0));

  StateVector singlet = StateVector::Zero(4);
  singlet(1) = 1 / std::sqrt(2.0);
  singlet(2) = -1 / std::sqrt(2.0);
  const auto sg = static_measure(singlet, 1);
  CHECK(sg.q == doctest::Approx(0.25));
  CHECK(nonlocality_overlap(sg.split) == doctest::Approx(0.0));

  const auto down = static_measure(basis_vector(BasisState(3, 0b000)), 2);
  CHECK(down.q == 0.0);
  CHECK(down.split.swapped);
  CHECK_THROWS_AS(nonlocality_overlap(down.split), std::domain_error);
  CHECK_THROWS_AS(nonlocality_overlap(static_measure(basis_vector(BasisState(3, 0b111)), 2).split),
                  std::domain_error);
}

// Exploratory: eigenstate entanglement grows as disorder weakens. Only the
// ordering of the averages is asserted.
TEST_CASE("eigenstate Q decreases with disorder") {
  auto mean_q = [](double w) {
    const ChainSpec spec{8, 1.0, w};
    double total = 0;
    int count = 0;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const auto eig = diagonalize(build_hamiltonian(spec, sample_disorder(spec, seed)));
      for (Eigen::Index n = 0; n < eig.energies().size(); n += 7) {
        total += static_measure(eig.vector(n), 4).q;
        ++count;
      }
    }
    return total / count;
  };
  const double weak = mean_q(0.5), strong = mean_q(20.0);
  MESSAGE("mean eigenstate Q: W=0.5 -> " << weak << ", W=20 -> " << strong);
  CHECK(weak > 0.15);
  CHECK(strong < 0.05);
}
