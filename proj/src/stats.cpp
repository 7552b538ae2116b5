#include "qctf/stats.hpp"

#include "qctf/chain.hpp"
#include "qctf/io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

namespace qctf {

namespace {

double effective_coupling(double coupling, bool edge) { return edge ? 0.5 * coupling : coupling; }

}  // namespace

double pdf_frequency(double omega, double coupling, double disorder, bool edge) {
  if (omega < 0.0) throw std::domain_error("frequency density is defined on omega >= 0");
  const double j = effective_coupling(coupling, edge);
  const double w = disorder;
  const double w2 = w * w;
  if (omega <= j) return 1.0 / w - j / (2.0 * w2);
  if (omega <= 2.0 * w - j) return 1.0 / w - omega / (2.0 * w2);
  if (omega <= 2.0 * w + j) return (j + 2.0 * w - omega) / (4.0 * w2);
  return 0.0;
}

double cdf_frequency(double omega, double coupling, double disorder, bool edge) {
  if (omega <= 0.0) return 0.0;
  const double j = effective_coupling(coupling, edge);
  const double w = disorder;
  const double w2 = w * w;
  const double at_j = j * (1.0 / w - j / (2.0 * w2));
  if (omega <= j) return omega * (1.0 / w - j / (2.0 * w2));
  if (omega <= 2.0 * w - j) return at_j + (omega - j) / w - (omega * omega - j * j) / (4.0 * w2);
  if (omega <= 2.0 * w + j) {
    const double r = 2.0 * w + j - omega;
    return 1.0 - r * r / (8.0 * w2);
  }
  return 1.0;
}

double amplitude_floor(double coupling, double disorder) {
  // J^2 / (8 W^2) rounds 1/800 exactly where 0.125 (J/W)^2 does not.
  return coupling * coupling / (8.0 * disorder * disorder);
}

double most_probable_amplitude(double coupling, double disorder) {
  const double r = std::sqrt(2.0) * coupling / (3.0 * disorder);
  return r * r;
}

double pdf_amplitude(double a, double coupling, double disorder) {
  if (!(a > 0.0)) throw std::domain_error("amplitude density is defined on a > 0");
  if (a < amplitude_floor(coupling, disorder)) return 0.0;
  const double ratio = disorder / coupling;
  const double wa = ratio * a;
  return (ratio * std::sqrt(8.0 * a) - 1.0) / (8.0 * wa * wa);
}

double cdf_amplitude(double a, double coupling, double disorder) {
  if (a <= amplitude_floor(coupling, disorder)) return 0.0;
  if (std::isinf(a)) return 1.0;
  const double r = 1.0 - coupling / (2.0 * disorder * std::sqrt(2.0 * a));
  return r * r;
}

std::string to_string(PdfKind kind) {
  switch (kind) {
    case PdfKind::FrequencyBulk: return "frequency-bulk";
    case PdfKind::FrequencyEdge: return "frequency-edge";
    case PdfKind::Amplitude: return "amplitude";
  }
  return "?";
}

PdfKind pdf_kind_from_string(const std::string& name) {
  if (name == "frequency-bulk" || name == "frequency") return PdfKind::FrequencyBulk;
  if (name == "frequency-edge") return PdfKind::FrequencyEdge;
  if (name == "amplitude") return PdfKind::Amplitude;
  throw std::invalid_argument("unknown density kind '" + name + "'");
}

AnalyticPdf::AnalyticPdf(PdfKind kind, double coupling, double disorder)
    : kind_(kind), coupling_(coupling), disorder_(disorder) {
  if (!(coupling > 0.0) || !(disorder > 0.0)) throw std::invalid_argument("densities need J > 0 and W > 0");
}

double AnalyticPdf::operator()(double x) const {
  switch (kind_) {
    case PdfKind::FrequencyBulk: return pdf_frequency(x, coupling_, disorder_, false);
    case PdfKind::FrequencyEdge: return pdf_frequency(x, coupling_, disorder_, true);
    case PdfKind::Amplitude: return x > 0.0 ? pdf_amplitude(x, coupling_, disorder_) : 0.0;
  }
  return 0.0;
}

double AnalyticPdf::cdf(double x) const {
  switch (kind_) {
    case PdfKind::FrequencyBulk: return cdf_frequency(x, coupling_, disorder_, false);
    case PdfKind::FrequencyEdge: return cdf_frequency(x, coupling_, disorder_, true);
    case PdfKind::Amplitude: return cdf_amplitude(x, coupling_, disorder_);
  }
  return 0.0;
}

std::pair<double, double> AnalyticPdf::support() const {
  if (kind_ == PdfKind::Amplitude) {
    return {amplitude_floor(coupling_, disorder_), std::numeric_limits<double>::infinity()};
  }
  const double j = effective_coupling(coupling_, kind_ == PdfKind::FrequencyEdge);
  return {0.0, 2.0 * disorder_ + j};
}

CriticalProbability critical_probability(int order, double coupling, double disorder) {
  if (order < 2 || order % 2 != 0) {
    throw std::invalid_argument("critical probability needs an even order 2n >= 2, got " + std::to_string(order));
  }
  if (!(coupling > 0.0) || !(disorder > 0.0)) throw std::invalid_argument("need J > 0 and W > 0");
  const double n2 = order;
  const double log_ratio = std::log(coupling / disorder);
  const double log_span = std::log(2.0 * disorder / coupling);
  CriticalProbability p;
  p.log_value = n2 * log_ratio + (n2 - 1.0) * std::log(n2 * log_span) - std::lgamma(n2);
  p.value = std::exp(p.log_value);
  p.log_stirling = n2 * log_ratio + (n2 - 1.0) * (std::log(n2 * log_span / (n2 - 1.0)) + 1.0);
  return p;
}

MonteCarloEstimate critical_probability_mc(int order, double coupling, double disorder, std::uint64_t samples,
                                           std::uint64_t seed, int threads) {
  if (order < 2 || order % 2 != 0) throw std::invalid_argument("order must be even and >= 2");
  if (samples < 100000) throw std::invalid_argument("critical_probability_mc needs at least 1e5 samples");
  if (!(coupling > 0.0) || !(disorder > 0.0)) throw std::invalid_argument("need J > 0 and W > 0");
  constexpr std::uint64_t kBlock = std::uint64_t{1} << 16;
  const std::uint64_t blocks = (samples + kBlock - 1) / kBlock;
  std::vector<std::uint64_t> hits(blocks, 0);
  std::atomic<std::uint64_t> next{0};
  const double scale = 2.0 * disorder / coupling;  // |dh/J| = scale |u1 - u2|

  auto worker = [&] {
    for (std::uint64_t b = next++; b < blocks; b = next++) {
      std::mt19937_64 rng(mix_seed(seed, b));
      const std::uint64_t count = std::min(kBlock, samples - b * kBlock);
      std::uint64_t h = 0;
      for (std::uint64_t i = 0; i < count; ++i) {
        double prod = 1.0;
        for (int m = 0; m < order; ++m) {
          const double u1 = unit_interval(rng());
          const double u2 = unit_interval(rng());
          prod *= scale * std::abs(u1 - u2);
        }
        h += prod <= 1.0;
      }
      hits[b] = h;
    }
  };
  const int n_threads = std::max(1, threads);
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  MonteCarloEstimate est;
  est.samples = samples;
  est.estimate = static_cast<double>(total) / static_cast<double>(samples);
  est.std_error = std::sqrt(est.estimate * (1.0 - est.estimate) / static_cast<double>(samples));
  return est;
}

Histogram build_histogram(std::span<const double> samples, BinPolicy policy) {
  if (policy.bins < 1) throw std::invalid_argument("need at least one bin");
  const std::size_t n = samples.size();
  if (n < static_cast<std::size_t>(policy.bins) || n < 100) {
    throw std::invalid_argument("histogram needs at least max(100, bins) samples, got " + std::to_string(n));
  }
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  if (!std::isfinite(s.front()) || !std::isfinite(s.back())) throw std::invalid_argument("non-finite sample");

  // Cut indices k_i = i n / bins; bins whose edges coincide are merged.
  std::vector<std::size_t> cuts{0};
  std::vector<double> edges{s.front()};
  for (int i = 1; i < policy.bins; ++i) {
    const std::size_t k = static_cast<std::size_t>(i) * n / static_cast<std::size_t>(policy.bins);
    const double e = 0.5 * (s[k - 1] + s[k]);
    if (e > edges.back()) {
      cuts.push_back(k);
      edges.push_back(e);
    }
  }
  if (s.back() > edges.back()) {
    cuts.push_back(n);
    edges.push_back(s.back());
  } else {
    cuts.back() = n;
  }
  if (edges.size() < 2) throw std::invalid_argument("all samples identical; density undefined");

  Histogram h;
  h.samples = n;
  h.edges = edges;
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    const double count = static_cast<double>(cuts[b + 1] - cuts[b]);
    h.densities.push_back(count / (static_cast<double>(n) * (edges[b + 1] - edges[b])));
  }
  return h;
}

Comparison compare_histogram(const Histogram& h, const AnalyticPdf& pdf, Interval window) {
  if (!(window.hi > window.lo)) throw std::invalid_argument("empty comparison window");
  struct Piece {
    double lo, hi, mass;
  };
  std::vector<Piece> pieces;
  double hist_total = 0.0;
  for (std::size_t b = 0; b < h.bins(); ++b) {
    const double lo = std::max(h.edges[b], window.lo);
    const double hi = std::min(h.edges[b + 1], window.hi);
    if (!(hi > lo)) continue;
    pieces.push_back({lo, hi, h.densities[b] * (hi - lo)});
    hist_total += pieces.back().mass;
  }
  const double cdf_lo = pdf.cdf(window.lo);
  const double pdf_total = pdf.cdf(window.hi) - cdf_lo;
  if (pieces.empty() || !(hist_total > 0.0)) throw std::invalid_argument("window does not overlap the histogram");
  if (!(pdf_total > 0.0)) throw std::invalid_argument("window does not overlap the density support");

  double tv = 0.0, ks = 0.0, hist_cum = 0.0, covered = 0.0;
  for (const auto& p : pieces) {
    const double width = p.hi - p.lo;
    const double mid = 0.5 * (p.lo + p.hi);
    tv += std::abs(p.mass / hist_total / width - pdf(mid) / pdf_total) * width;
    covered += pdf.cdf(p.hi) - pdf.cdf(p.lo);
    ks = std::max(ks, std::abs(hist_cum / hist_total - (pdf.cdf(p.lo) - cdf_lo) / pdf_total));
    hist_cum += p.mass;
    ks = std::max(ks, std::abs(hist_cum / hist_total - (pdf.cdf(p.hi) - cdf_lo) / pdf_total));
  }
  tv += std::max(0.0, 1.0 - covered / pdf_total);

  Comparison c;
  c.total_variation = 0.5 * tv;
  c.ks = ks;
  c.window = window;
  c.samples = h.samples;
  return c;
}

void write_histogram_csv(const Histogram& h, std::ostream& out) {
  out << "bin_lo,bin_hi,density\n";
  for (std::size_t b = 0; b < h.bins(); ++b) {
    out << format_double(h.edges[b]) << ',' << format_double(h.edges[b + 1]) << ',' << format_double(h.densities[b])
        << '\n';
  }
}

Histogram read_histogram_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "bin_lo,bin_hi,density") {
    throw std::runtime_error("histogram CSV must start with 'bin_lo,bin_hi,density'");
  }
  Histogram h;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) throw std::runtime_error("malformed histogram row");
    const std::string_view v(line);
    const double lo = parse_double(v.substr(0, c1));
    if (h.edges.empty()) h.edges.push_back(lo);
    h.edges.push_back(parse_double(v.substr(c1 + 1, c2 - c1 - 1)));
    h.densities.push_back(parse_double(v.substr(c2 + 1)));
  }
  return h;
}

std::string comparison_to_json(const Comparison& c) {
  return "{\"tv\": " + format_double(c.total_variation) + ", \"ks\": " + format_double(c.ks) + ", \"window\": [" +
         format_double(c.window.lo) + ", " + format_double(c.window.hi) + "], \"samples\": " +
         std::to_string(c.samples) + "}";
}

}  // namespace qctf
