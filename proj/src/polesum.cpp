#include "qctf/polesum.hpp"

#include "qctf/io.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace qctf {

struct PoleSumAccess {
  static PoleSum adopt(std::vector<Pole> sorted_terms) {
    PoleSum f;
    f.terms_ = std::move(sorted_terms);
    return f;
  }
};

namespace {

void sort_terms(std::vector<Pole>& terms) {
  std::sort(terms.begin(), terms.end(), [](const Pole& a, const Pole& b) {
    if (a.omega != b.omega) return a.omega < b.omega;
    if (a.coeff.real() != b.coeff.real()) return a.coeff.real() < b.coeff.real();
    return a.coeff.imag() < b.coeff.imag();
  });
}

// Expects sorted input.
Consolidated merge_sorted(const std::vector<Pole>& terms, double freq_tol, double prune_floor) {
  Consolidated out;
  std::vector<Pole> merged;
  merged.reserve(terms.size());
  std::size_t i = 0;
  while (i < terms.size()) {
    std::size_t j = i + 1;
    while (j < terms.size() && terms[j].omega - terms[j - 1].omega <= freq_tol) ++j;
    Pole p = terms[i];
    if (j - i > 1) {
      std::complex<double> sum = 0.0;
      double weight = 0.0, weighted = 0.0, plain = 0.0;
      for (std::size_t k = i; k < j; ++k) {
        sum += terms[k].coeff;
        const double a = std::abs(terms[k].coeff);
        weight += a;
        weighted += a * terms[k].omega;
        plain += terms[k].omega;
      }
      p.coeff = sum;
      p.omega = weight > 0.0 ? weighted / weight : plain / static_cast<double>(j - i);
    }
    const double mag = std::abs(p.coeff);
    if (mag == 0.0) {
      // exact cancellation; nothing to account for
    } else if (mag < prune_floor) {
      out.dropped_mass += mag;
    } else {
      merged.push_back(p);
    }
    i = j;
  }
  out.sum = PoleSumAccess::adopt(std::move(merged));
  return out;
}

}  // namespace

PoleSum::PoleSum(std::vector<Pole> terms) {
  sort_terms(terms);
  *this = merge_sorted(terms, 0.0, 0.0).sum;
}

PoleSum PoleSum::single(double omega, std::complex<double> coeff) { return PoleSum({{omega, coeff}}); }

std::complex<double> PoleSum::operator()(double t) const {
  std::complex<double> acc = 0.0;
  for (const auto& p : terms_) acc += p.coeff * std::polar(1.0, -p.omega * t);
  return acc;
}

PoleSum& PoleSum::operator+=(const PoleSum& other) {
  std::vector<Pole> all = terms_;
  all.insert(all.end(), other.terms_.begin(), other.terms_.end());
  *this = PoleSum(std::move(all));
  return *this;
}

PoleSum& PoleSum::operator*=(std::complex<double> scale) {
  std::vector<Pole> scaled = terms_;
  for (auto& p : scaled) p.coeff *= scale;
  *this = PoleSum(std::move(scaled));
  return *this;
}

PoleSum operator+(PoleSum a, const PoleSum& b) { return a += b; }
PoleSum operator-(PoleSum a, const PoleSum& b) { return a += (-1.0) * b; }
PoleSum operator*(std::complex<double> scale, PoleSum f) { return f *= scale; }

Consolidated consolidate(const PoleSum& f, double freq_tol, double prune_floor) {
  if (freq_tol < 0.0 || prune_floor < 0.0) throw std::invalid_argument("tolerances must be >= 0");
  return merge_sorted(f.terms(), freq_tol, prune_floor);
}

Consolidated star_product_budgeted(const PoleSum& f, const PoleSum& g, const ConsolidationPolicy& policy) {
  const std::size_t raw = f.size() * g.size();
  if (f.size() != 0 && raw / f.size() != g.size()) throw std::length_error("star product size overflow");
  if (raw > policy.max_terms) {
    throw std::length_error("star product would generate " + std::to_string(raw) + " terms (cap " +
                            std::to_string(policy.max_terms) + "); raise the cap or enable pruning");
  }
  std::vector<Pole> terms;
  terms.reserve(raw);
  for (const auto& a : f.terms()) {
    for (const auto& b : g.terms()) terms.push_back({a.omega + b.omega, a.coeff * b.coeff});
  }
  sort_terms(terms);
  return merge_sorted(terms, policy.freq_tol, policy.prune_floor);
}

PoleSum star_product(const PoleSum& f, const PoleSum& g, const ConsolidationPolicy& policy) {
  return star_product_budgeted(f, g, policy).sum;
}

PoleSum conjugate(const PoleSum& f) {
  std::vector<Pole> terms;
  terms.reserve(f.size());
  for (const auto& p : f.terms()) terms.push_back({-p.omega, std::conj(p.coeff)});
  PoleSum out(std::move(terms));
  out.set_real_valued(f.real_valued());
  return out;
}

std::complex<double> eval_time(const PoleSum& f, double t) { return f(t); }

double conjugate_symmetry_defect(const PoleSum& f, double freq_tol) {
  const auto& t = f.terms();
  double defect = 0.0;
  for (std::size_t i = 0, j = t.size(); i < t.size(); ++i) {
    --j;
    if (std::abs(t[i].omega + t[j].omega) > freq_tol) return std::numeric_limits<double>::infinity();
    defect = std::max(defect, std::abs(t[i].coeff - std::conj(t[j].coeff)));
  }
  return defect;
}

void write_polesum_csv(const PoleSum& f, std::ostream& out) {
  out << "omega,re,im\n";
  for (const auto& p : f.terms()) {
    out << format_double(p.omega) << ',' << format_double(p.coeff.real()) << ',' << format_double(p.coeff.imag())
        << '\n';
  }
}

PoleSum read_polesum_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "omega,re,im") {
    throw std::runtime_error("pole CSV must start with 'omega,re,im'");
  }
  std::vector<Pole> terms;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) throw std::runtime_error("malformed pole row: " + line);
    const std::string_view v(line);
    terms.push_back({parse_double(v.substr(0, c1)),
                     {parse_double(v.substr(c1 + 1, c2 - c1 - 1)), parse_double(v.substr(c2 + 1))}});
  }
  return PoleSum(std::move(terms));
}

}  // namespace qctf
