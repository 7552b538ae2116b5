#include "qctf/spectral.hpp"

#include "qctf/io.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace qctf {

namespace {

void check_grid(const EntanglementTrace& trace) {
  const std::size_t m = trace.times.size();
  if (m != trace.values.size()) throw std::invalid_argument("trace times and values differ in length");
  if (m < 16) throw std::invalid_argument("spectral analysis needs at least 16 samples");
  const double dt = (trace.times.back() - trace.times.front()) / static_cast<double>(m - 1);
  if (!(dt > 0.0)) throw std::invalid_argument("trace grid must be increasing");
  for (std::size_t j = 1; j < m; ++j) {
    if (std::abs(trace.times[j] - trace.times[j - 1] - dt) > 1e-9 * std::max(1.0, dt)) {
      throw std::invalid_argument("trace grid is not uniform");
    }
  }
}

double grid_dt(const EntanglementTrace& trace) {
  return (trace.times.back() - trace.times.front()) / static_cast<double>(trace.times.size() - 1);
}

Eigen::MatrixXd design(const EntanglementTrace& trace, std::span<const double> omegas) {
  const auto m = static_cast<Eigen::Index>(trace.times.size());
  Eigen::MatrixXd a(m, 1 + 2 * static_cast<Eigen::Index>(omegas.size()));
  for (Eigen::Index j = 0; j < m; ++j) {
    const double t = trace.times[static_cast<std::size_t>(j)];
    a(j, 0) = 1.0;
    for (std::size_t i = 0; i < omegas.size(); ++i) {
      a(j, 1 + 2 * static_cast<Eigen::Index>(i)) = std::cos(omegas[i] * t);
      a(j, 2 + 2 * static_cast<Eigen::Index>(i)) = std::sin(omegas[i] * t);
    }
  }
  return a;
}

}  // namespace

Eigen::Index Spectrum::zero_index() const {
  Eigen::Index best = 0;
  omega.cwiseAbs().minCoeff(&best);
  return best;
}

Spectrum dft_spectrum(const EntanglementTrace& trace, WindowKind window) {
  check_grid(trace);
  const auto m = static_cast<Eigen::Index>(trace.times.size());
  const double dt = grid_dt(trace);
  Eigen::VectorXd weights = Eigen::VectorXd::Ones(m);
  if (window == WindowKind::Hann) {
    for (Eigen::Index j = 0; j < m; ++j) {
      weights(j) = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(m - 1)));
    }
  }
  const double norm = weights.sum();

  // Twiddles e^{+2 pi i r / M}; (j k) mod M indexes them exactly.
  Eigen::VectorXcd twiddle(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    twiddle(r) = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(m));
  }
  Spectrum s;
  s.dt = dt;
  s.duration = static_cast<double>(m) * dt;
  s.window = window;
  s.omega.resize(m);
  s.coeff.resize(m);
  const Eigen::Index k_min = -(m / 2);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index k = k_min + i;
    const Eigen::Index kk = ((k % m) + m) % m;
    std::complex<double> acc = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      acc += weights(j) * trace.values[static_cast<std::size_t>(j)] * twiddle((j * kk) % m);
    }
    const double omega = 2.0 * std::numbers::pi * static_cast<double>(k) / s.duration;
    s.omega(i) = omega;
    s.coeff(i) = acc * std::polar(1.0, omega * trace.times.front()) / norm;
  }
  return s;
}

Component extract_component(const EntanglementTrace& trace, double omega) {
  check_grid(trace);
  const double dt = grid_dt(trace);
  if (omega < 0.0 || omega > std::numbers::pi / dt * (1.0 + 1e-12)) {
    throw std::domain_error("frequency outside [0, pi/dt]");
  }
  if (omega == 0.0) {
    double mean = 0.0;
    for (double v : trace.values) mean += v;
    mean /= static_cast<double>(trace.values.size());
    return {0.0, std::abs(mean), mean < 0.0 ? std::numbers::pi : 0.0};
  }
  const double omegas[] = {omega};
  return extract_components(trace, omegas).front();
}

std::vector<Component> extract_components(const EntanglementTrace& trace, std::span<const double> omegas) {
  check_grid(trace);
  const Eigen::MatrixXd a = design(trace, omegas);
  const Eigen::Map<const Eigen::VectorXd> y(trace.values.data(), static_cast<Eigen::Index>(trace.values.size()));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > 1e-8 * sv(0))) {
    throw std::domain_error("ill-conditioned least-squares fit (frequencies too close to 0 or to each other for T)");
  }
  const Eigen::VectorXd x = svd.solve(y);
  std::vector<Component> out;
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    const double c = x(1 + 2 * static_cast<Eigen::Index>(i));
    const double s = x(2 + 2 * static_cast<Eigen::Index>(i));
    // a cos(wt + phi) = a cos(phi) cos(wt) - a sin(phi) sin(wt)
    out.push_back({omegas[i], std::hypot(c, s), std::atan2(-s, c)});
  }
  return out;
}

Component fit_component_near(const EntanglementTrace& trace, double omega, double half_width) {
  const double dt = grid_dt(trace);
  const double lo = std::max(0.0, omega - half_width);
  const double hi = std::min(std::numbers::pi / dt, omega + half_width);
  // Frequencies too close to zero to resolve score zero instead of throwing.
  auto amp = [&](double w) {
    if (!(w > 0.0)) return 0.0;
    try {
      return extract_component(trace, w).amplitude;
    } catch (const std::domain_error&) {
      return 0.0;
    }
  };
  // Coarse scan, then golden-section on the best bracket.
  constexpr int kScan = 40;
  double best_w = omega, best_a = amp(omega);
  const double step = (hi - lo) / kScan;
  for (int i = 0; i <= kScan; ++i) {
    const double w = lo + step * i;
    const double a = amp(w);
    if (a > best_a) {
      best_a = a;
      best_w = w;
    }
  }
  double a = std::max(lo, best_w - step), b = std::min(hi, best_w + step);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = amp(c), fd = amp(d);
  for (int it = 0; it < 60 && b - a > 1e-12; ++it) {
    if (fc > fd) {
      b = d, d = c, fd = fc, c = b - g * (b - a), fc = amp(c);
    } else {
      a = c, c = d, fc = fd, d = a + g * (b - a), fd = amp(d);
    }
  }
  const double w = 0.5 * (a + b);
  return amp(w) >= best_a ? extract_component(trace, w) : extract_component(trace, best_w);
}

std::vector<Peak> dominant_peaks(const Spectrum& spectrum, int count, bool exclude_dc) {
  if (count < 1) throw std::invalid_argument("peak count must be >= 1");
  const Eigen::Index z = spectrum.zero_index();
  const Eigen::Index m = spectrum.coeff.size();
  const double floor = 1e-10 * spectrum.coeff.norm();
  auto mag = [&](Eigen::Index i) { return std::abs(spectrum.coeff(i)); };
  std::vector<Peak> peaks;
  for (Eigen::Index i = z; i < m; ++i) {
    if (exclude_dc && i == z) continue;
    const double v = mag(i);
    // Real traces are symmetric, so the DC bin's left neighbor mirrors its right one.
    const double left = i == z ? mag(std::min(i + 1, m - 1)) : mag(i - 1);
    const double right = i + 1 < m ? mag(i + 1) : 0.0;
    if (v > floor && v >= left && v > right) peaks.push_back({spectrum.omega(i), v});
  }
  std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.magnitude > b.magnitude; });
  if (peaks.size() > static_cast<std::size_t>(count)) peaks.resize(static_cast<std::size_t>(count));
  return peaks;
}

void write_spectrum_csv(const Spectrum& spectrum, std::ostream& out) {
  out << "omega,magnitude\n";
  for (Eigen::Index i = spectrum.zero_index(); i < spectrum.coeff.size(); ++i) {
    out << format_double(spectrum.omega(i)) << ',' << format_double(std::abs(spectrum.coeff(i))) << '\n';
  }
}

}  // namespace qctf
