#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library's evolution, pole-sum or statistics code.

#include "qctf/chain.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <random>

namespace oracle {

// Dense H from Kronecker products of single-site spin matrices, site 1 being
// the least significant factor (basis index = bit word).
inline Eigen::MatrixXcd dense_hamiltonian(const qctf::ChainSpec& spec, const std::vector<double>& h) {
  using M = Eigen::MatrixXcd;
  const std::complex<double> i(0.0, 1.0);
  M sx(2, 2), sy(2, 2), sz(2, 2), id = M::Identity(2, 2);
  // single-site basis {|0> = down, |1> = up}
  sx << 0, 0.5, 0.5, 0;
  sy << 0, 0.5 * i, -0.5 * i, 0;
  sz << -0.5, 0, 0, 0.5;
  auto kron = [](const M& a, const M& b) {
    M out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      for (Eigen::Index c = 0; c < a.cols(); ++c) out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    return out;
  };
  const int n = spec.n_sites;
  auto site_op = [&](const M& op, int site) {
    M out = M::Identity(1, 1);
    for (int k = n; k >= 1; --k) out = kron(out, k == site ? op : id);
    return out;
  };
  const auto dim = Eigen::Index{1} << n;
  M H = M::Zero(dim, dim);
  for (int k = 1; k < n; ++k) {
    H += spec.coupling * (site_op(sx, k) * site_op(sx, k + 1) + site_op(sy, k) * site_op(sy, k + 1) +
                          site_op(sz, k) * site_op(sz, k + 1));
  }
  for (int k = 1; k <= n; ++k) H += h[static_cast<std::size_t>(k - 1)] * site_op(sz, k);
  return H;
}

// rho_{ab} = sum over all other sites' configurations, by explicit index
// arithmetic on bit strings.
inline Eigen::Matrix2cd partial_trace(const Eigen::VectorXcd& psi, int site) {
  Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
  const auto dim = psi.size();
  for (Eigen::Index x = 0; x < dim; ++x) {
    for (Eigen::Index y = 0; y < dim; ++y) {
      // x and y must agree on every site except `site`
      if (((x ^ y) & ~(Eigen::Index{1} << (site - 1))) != 0) continue;
      const int a = ((x >> (site - 1)) & 1) ? 0 : 1;  // row 0 = up
      const int b = ((y >> (site - 1)) & 1) ? 0 : 1;
      rho(a, b) += psi(x) * std::conj(psi(y));
    }
  }
  return rho;
}

inline Eigen::VectorXcd random_state(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(dim);
  for (auto& x : v) x = {g(rng), g(rng)};
  return v.normalized();
}

// Two spins, |up down> initial state, delta = h1 - h2. The pair
// {|up down>, |down up>} is a two-level system with splitting
// Omega = sqrt(delta^2 + J^2) and transfer probability
// p(t) = (J/Omega)^2 sin^2(Omega t / 2). The reduced state of spin 1 is
// diagonal, so Q(t) = p (1 - p).
struct TwoSpin {
  double coupling, delta;
  double omega() const { return std::sqrt(delta * delta + coupling * coupling); }
  double r() const { return coupling * coupling / (omega() * omega()); }
  double transfer(double t) const {
    const double s = std::sin(0.5 * omega() * t);
    return r() * s * s;
  }
  double q(double t) const { return transfer(t) * (1.0 - transfer(t)); }
  // Q(t) = q0 + q1 cos(Omega t) + q2 cos(2 Omega t), expanded by hand from
  // p = (r/2)(1 - cos(Omega t)).
  double q0() const { return r() / 2 - 3 * r() * r() / 8; }
  double q1() const { return -r() / 2 + r() * r() / 2; }
  double q2() const { return -r() * r() / 8; }
};

// Adaptive Simpson on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 50) {
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, int d) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        const double flm = f(lm), frm = f(rm);
        const double left = (mid - lo) / 6 * (flo + 4 * flm + fmid);
        const double right = (hi - mid) / 6 * (fmid + 4 * frm + fhi);
        if (d <= 0 || std::abs(left + right - whole) <= 15 * tol) return left + right + (left + right - whole) / 15;
        return rec(lo, mid, flo, flm, fmid, left, d - 1) + rec(mid, hi, fmid, frm, fhi, right, d - 1);
      };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return rec(a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), depth);
}

// P{x1 x2 <= 1} for independent x = |dh| / J, dh the difference of two
// uniform[-W, W] draws: x has density (1/w)(1 - x/(2w)) on [0, 2w], w = W/J,
// and CDF G(y) = 1 - (1 - y/(2w))^2.
inline double critical_two_factor(double w) {
  auto G = [w](double y) {
    if (y >= 2 * w) return 1.0;
    const double r = 1.0 - y / (2 * w);
    return 1.0 - r * r;
  };
  auto integrand = [&](double x) { return (1.0 / w) * (1.0 - x / (2 * w)) * (x > 0 ? G(1.0 / x) : 1.0); };
  // G(1/x) = 1 below x = 1/(2w); split there to keep the integrand smooth.
  const double kink = 1.0 / (2 * w);
  return simpson(integrand, 0.0, kink, 1e-14) + simpson(integrand, kink, 2 * w, 1e-14);
}

}  // namespace oracle
