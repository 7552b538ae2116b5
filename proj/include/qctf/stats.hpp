#pragma once

// Closed-form disorder statistics of the second-order entanglement
// frequencies and amplitudes for fields uniform on [-W, W], the critical
// probability of 2n-step interference paths, and histogram tools to compare
// sampled ensembles against them.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qctf {

// Perturbative regime J < W, assumed by both densities.
inline bool perturbative_regime(double coupling, double disorder) { return coupling < disorder; }

// Density of omega = |E1_0 - E1_{+-1}|; the edge variant replaces J by J/2.
// Throws std::domain_error for omega < 0.
double pdf_frequency(double omega, double coupling, double disorder, bool edge);
double cdf_frequency(double omega, double coupling, double disorder, bool edge);

// Density of a = 2|c_{+-1,0}|^2, supported on a >= a0. Throws
// std::domain_error for a <= 0.
double pdf_amplitude(double a, double coupling, double disorder);
// (1 - J / (2W sqrt(2a)))^2 above a0, 0 below.
double cdf_amplitude(double a, double coupling, double disorder);

double amplitude_floor(double coupling, double disorder);           // a0 = (J/W)^2 / 8
double most_probable_amplitude(double coupling, double disorder);  // (sqrt(2) J / 3W)^2

enum class PdfKind { FrequencyBulk, FrequencyEdge, Amplitude };

std::string to_string(PdfKind kind);
PdfKind pdf_kind_from_string(const std::string& name);

class AnalyticPdf {
 public:
  AnalyticPdf(PdfKind kind, double coupling, double disorder);

  PdfKind kind() const { return kind_; }
  double operator()(double x) const;
  double cdf(double x) const;
  // [lo, hi]; hi is +inf for amplitudes.
  std::pair<double, double> support() const;

 private:
  PdfKind kind_;
  double coupling_;
  double disorder_;
};

struct CriticalProbability {
  double value = 0.0;         // (J/W)^{2n} (2n ln(2W/J))^{2n-1} / (2n-1)!
  double log_value = 0.0;     // ln of value
  double log_stirling = 0.0;  // Stirling form, linear-like in 2n
};

// Leading order for J << W. Throws std::invalid_argument for odd or
// non-positive orders.
CriticalProbability critical_probability(int order, double coupling, double disorder);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
};

// P{ prod_{m=1}^{2n} |dh_m / J| <= 1 } with dh the difference of two
// independent uniform[-W, W] draws. Blocks of samples use seeds
// mix_seed(seed, block), so the estimate does not depend on `threads`.
MonteCarloEstimate critical_probability_mc(int order, double coupling, double disorder, std::uint64_t samples,
                                           std::uint64_t seed, int threads = 1);

struct Histogram {
  std::vector<double> edges;      // bins + 1 ascending edges
  std::vector<double> densities;  // one per bin
  std::size_t samples = 0;

  std::size_t bins() const { return densities.size(); }
};

struct BinPolicy {
  int bins = 64;
};

// Equal-count bins; edges sit midway between neighboring order statistics.
// Needs at least max(100, bins) samples.
Histogram build_histogram(std::span<const double> samples, BinPolicy policy = {});

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct Comparison {
  double total_variation = 0.0;
  double ks = 0.0;
  Interval window;
  std::size_t samples = 0;
};

// Both densities renormalized on `window`. TV = 1/2 sum |density - pdf(mid)|
// width over the clipped bins (plus half the analytic mass the bins do not
// cover); KS is taken at the clipped bin edges. Throws std::invalid_argument
// when the window misses the histogram or the density.
Comparison compare_histogram(const Histogram& h, const AnalyticPdf& pdf, Interval window);

// `bin_lo,bin_hi,density`.
void write_histogram_csv(const Histogram& h, std::ostream& out);
Histogram read_histogram_csv(std::istream& in);
// {"tv", "ks", "window": [lo, hi], "samples"}.
std::string comparison_to_json(const Comparison& c);

}  // namespace qctf
