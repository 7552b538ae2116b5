#pragma once

// Discrete spectra of entanglement traces, peak picking, and least-squares
// extraction of cosine components at chosen frequencies.

#include "qctf/dynamics.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <span>
#include <vector>

namespace qctf {

enum class WindowKind { Rectangular, Hann };

// Two-sided spectrum on the grid omega_k = 2 pi k / (M dt), ascending.
// coeff(omega) = sum_j w_j q_j exp(+i omega t_j) / sum_j w_j, so a component
// a cos(omega t) on the grid shows |coeff| = a/2 at +-omega, and a pole term
// c exp(-i omega t) lands at +omega. The rectangular window leaks off-grid
// components into sidelobes decaying like 1/(distance in bins).
struct Spectrum {
  Eigen::VectorXd omega;
  Eigen::VectorXcd coeff;
  double duration = 0.0;  // M dt
  double dt = 0.0;
  WindowKind window = WindowKind::Rectangular;

  double resolution() const { return 2.0 * 3.14159265358979323846 / duration; }
  // Index of omega = 0.
  Eigen::Index zero_index() const;
};

// Throws std::invalid_argument for fewer than 16 samples or a non-uniform grid.
Spectrum dft_spectrum(const EntanglementTrace& trace, WindowKind window = WindowKind::Rectangular);

struct Component {
  double omega = 0.0;
  double amplitude = 0.0;  // a >= 0 in a cos(omega t + phi)
  double phase = 0.0;
};

// Least squares c0 + a cos(omega t + phi). omega = 0 returns the mean offset:
// amplitude |c0|, phase 0 or pi by its sign. Throws std::domain_error when the
// normal equations are ill-conditioned (omega T near 0) or omega > pi/dt.
Component extract_component(const EntanglementTrace& trace, double omega);

// Joint least squares c0 + sum_i a_i cos(omega_i t + phi_i).
std::vector<Component> extract_components(const EntanglementTrace& trace, std::span<const double> omegas);

// Like extract_component, but the frequency is refined within
// [omega - half_width, omega + half_width] to the value maximizing the
// fitted amplitude (the single-sinusoid nonlinear least-squares estimate).
Component fit_component_near(const EntanglementTrace& trace, double omega, double half_width);

struct Peak {
  double omega = 0.0;
  double magnitude = 0.0;
};

// Local maxima of |coeff| on omega >= 0, largest first. Maxima below
// 1e-10 of the spectrum's root-sum-square are treated as round-off.
std::vector<Peak> dominant_peaks(const Spectrum& spectrum, int count, bool exclude_dc);

// `omega,magnitude` for omega >= 0.
void write_spectrum_csv(const Spectrum& spectrum, std::ostream& out);

}  // namespace qctf
