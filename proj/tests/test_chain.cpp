#include "oracles.hpp"
#include "qctf/chain.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <bit>
#include <random>

using namespace qctf;

TEST_CASE("sample_disorder support and determinism") {
  const ChainSpec zero{6, 1.0, 0.0};
  for (double h : sample_disorder(zero, 42).fields) CHECK(h == 0.0);

  const ChainSpec spec{6, 1.0, 10.0};
  const auto a = sample_disorder(spec, 1);
  const auto b = sample_disorder(spec, 1);
  CHECK(a == b);
  CHECK(a.fields.size() == 6);
  for (double h : a.fields) CHECK(std::abs(h) <= 10.0);
  CHECK(sample_disorder(spec, 2) != a);
}

TEST_CASE("mix_seed separates neighboring realizations") {
  CHECK(mix_seed(1, 0) != mix_seed(1, 1));
  CHECK(mix_seed(1, 0) != mix_seed(2, 0));
  CHECK(mix_seed(7, 3) == mix_seed(7, 3));
}

TEST_CASE("ChainSpec validation") {
  CHECK_THROWS_AS((ChainSpec{1, 1.0, 0.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((ChainSpec{4, 0.0, 1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((ChainSpec{4, 1.0, -1.0}.validate()), std::invalid_argument);
  CHECK_NOTHROW((ChainSpec{4, 1.0, 0.0}.validate()));
}

TEST_CASE("two-spin Hamiltonian: singlet/triplet and flip-flop element") {
  const ChainSpec spec{2, 1.0, 0.0};
  const auto h = build_hamiltonian(spec, {{0.0, 0.0}, 0});
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(h.matrix));
  CHECK(es.eigenvalues()(0) == doctest::Approx(-0.75));
  for (int i = 1; i < 4; ++i) CHECK(es.eigenvalues()(i) == doctest::Approx(0.25));

  const double delta = 0.3;
  const auto hd = build_hamiltonian(spec, {{delta / 2, -delta / 2}, 0});
  // |up down> = word 0b01, |down up> = 0b10
  CHECK(hd.matrix.coeff(1, 2) == 0.5);
  CHECK(hd.matrix.coeff(2, 1) == 0.5);
}

TEST_CASE("Hamiltonian equals the dense Kronecker construction") {
  for (int n = 2; n <= 8; ++n) {
    const ChainSpec spec{n, 1.0, 10.0};
    const auto fields = sample_disorder(spec, static_cast<std::uint64_t>(n));
    const auto h = build_hamiltonian(spec, fields);
    const Eigen::MatrixXcd dense = oracle::dense_hamiltonian(spec, fields.fields);
    const Eigen::MatrixXcd ours = Eigen::MatrixXd(h.matrix).cast<std::complex<double>>();
    CHECK((ours - dense).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("Hamiltonian structure: symmetric, sparse rows, S_z conserving") {
  const ChainSpec spec{7, 0.8, 4.0};
  const auto h = build_hamiltonian(spec, sample_disorder(spec, 9));
  const Eigen::MatrixXd d(h.matrix);
  CHECK((d - d.transpose()).cwiseAbs().maxCoeff() == 0.0);
  for (Eigen::Index r = 0; r < d.rows(); ++r) {
    int nnz = 0;
    for (Eigen::Index c = 0; c < d.cols(); ++c) {
      if (d(r, c) == 0.0) continue;
      ++nnz;
      CHECK(std::popcount(static_cast<std::uint64_t>(r)) == std::popcount(static_cast<std::uint64_t>(c)));
    }
    CHECK(nnz <= spec.n_sites + 1);
  }
  CHECK_THROWS_AS(build_hamiltonian(spec, {{1.0, 2.0}, 0}), std::invalid_argument);
}

TEST_CASE("Neel states") {
  CHECK(neel_state({4, 1, 0}, true).to_string() == "1010");
  CHECK(neel_state({3, 1, 0}, false).to_string() == "010");
  for (int n = 2; n <= 9; ++n) {
    const int pop = neel_state({n, 1, 0}, true).population();
    CHECK((pop == n / 2 || pop == (n + 1) / 2));
  }
}

TEST_CASE("unperturbed energy") {
  const ChainSpec spec{4, 1.0, 5.0};
  const DisorderFields f{{1, -2, 3, -4}, 0};
  CHECK(unperturbed_energy(f, neel_state(spec, true)) == 5.0);
  CHECK(unperturbed_energy(f, BasisState(4, 0b1111)) == (1 - 2 + 3 - 4) / 2.0);
  const BasisState s = neel_state(spec, true);
  for (int k = 1; k <= 4; ++k) {
    const double sign = s.up(k) ? 1.0 : -1.0;
    CHECK(unperturbed_energy(f, s.flipped(k)) - unperturbed_energy(f, s) == doctest::Approx(-f.h(k) * sign));
  }
}

TEST_CASE("unperturbed energy matches the field part of H") {
  const ChainSpec spec{6, 1.0, 10.0};
  const auto fields = sample_disorder(spec, 5);
  const auto h_fields = build_hamiltonian(spec, fields);
  // Subtract the interaction diagonal J sum s_k s_{k+1} from H's diagonal.
  for (std::uint64_t w = 0; w < spec.dimension(); ++w) {
    const BasisState s(6, w);
    double interaction = 0;
    for (int k = 1; k < 6; ++k) interaction += s.spin(k) * s.spin(k + 1);
    const double diag = h_fields.matrix.coeff(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(w));
    CHECK(std::abs(diag - interaction - unperturbed_energy(fields, s)) <= 1e-14);
  }
}

TEST_CASE("bond flips") {
  const BasisState s(4, 0b0101);  // "1010"
  REQUIRE(s.to_string() == "1010");
  const auto f = apply_bond_flip(s, 1);
  REQUIRE(f);
  CHECK(f->to_string() == "0110");
  CHECK(apply_bond_flip(*f, 1)->bits() == s.bits());
  CHECK_FALSE(apply_bond_flip(BasisState(4, 0b0011), 1));  // "1100"
  CHECK_THROWS_AS(apply_bond_flip(s, 0), std::out_of_range);
  CHECK_THROWS_AS(apply_bond_flip(s, 4), std::out_of_range);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const BasisState x(8, rng() & 0xff);
    for (int b = 1; b < 8; ++b) {
      if (auto y = apply_bond_flip(x, b)) CHECK(y->population() == x.population());
    }
  }
}

TEST_CASE("complement index round trip") {
  for (int site = 1; site <= 5; ++site) {
    for (std::uint64_t w = 0; w < 32; ++w) {
      const bool up = (w >> (site - 1)) & 1;
      CHECK(insert_site(complement_index(w, site), site, up) == w);
    }
  }
}

TEST_CASE("disorder fields JSON") {
  const ChainSpec spec{5, 1.0, 3.0};
  const auto f = sample_disorder(spec, 11);
  const std::string text = fields_to_json(spec, f);
  CHECK(text.find("\"seed\": 11") != std::string::npos);
  ChainSpec spec2;
  DisorderFields f2;
  fields_from_json(text, spec2, f2);
  CHECK(f2 == f);
  CHECK(spec2.n_sites == 5);
  CHECK(spec2.disorder_bound == 3.0);
}
