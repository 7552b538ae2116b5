#pragma once

// Finite sums of simple poles, F(s) = sum_j c_j / (s + i w_j), the carrier for
// every Laplace-domain object. The inverse transform of a pole sum is
// f(t) = sum_j c_j exp(-i w_j t); products in time are star products here.

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <vector>

namespace qctf {

struct Pole {
  double omega = 0.0;
  std::complex<double> coeff;

  friend bool operator==(const Pole&, const Pole&) = default;
};

struct ConsolidationPolicy {
  double freq_tol = 0.0;     // merge frequencies closer than this (single linkage)
  double prune_floor = 0.0;  // drop |c| < prune_floor
  std::size_t max_terms = std::size_t{1} << 26;  // raw terms a star product may generate
};

// Terms are kept sorted by frequency with no exact zero coefficients.
class PoleSum {
 public:
  PoleSum() = default;
  // Sorts and merges exactly coincident frequencies.
  explicit PoleSum(std::vector<Pole> terms);

  static PoleSum single(double omega, std::complex<double> coeff);
  // 1/s: the unit step, identity of the star product.
  static PoleSum unit() { return single(0.0, 1.0); }

  const std::vector<Pole>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  // Set only after the conjugate pairing (w, c) <-> (-w, c*) was verified.
  bool real_valued() const { return real_valued_; }
  void set_real_valued(bool flag) { real_valued_ = flag; }

  std::complex<double> operator()(double t) const;

  PoleSum& operator+=(const PoleSum& other);
  PoleSum& operator*=(std::complex<double> scale);

  friend bool operator==(const PoleSum& a, const PoleSum& b) { return a.terms_ == b.terms_; }

 private:
  friend struct PoleSumAccess;
  std::vector<Pole> terms_;
  bool real_valued_ = false;
};

PoleSum operator+(PoleSum a, const PoleSum& b);
PoleSum operator-(PoleSum a, const PoleSum& b);
PoleSum operator*(std::complex<double> scale, PoleSum f);

struct Consolidated {
  PoleSum sum;
  double dropped_mass = 0.0;  // sum of |c| removed by pruning; bounds |delta f(t)|
};

// Merged terms carry the coefficient sum at the |c|-weighted mean frequency.
Consolidated consolidate(const PoleSum& f, double freq_tol, double prune_floor);

// (w1, c1) * (w2, c2) -> (w1 + w2, c1 c2) over all pairs, then consolidated.
// Throws std::length_error when |f||g| exceeds policy.max_terms.
PoleSum star_product(const PoleSum& f, const PoleSum& g, const ConsolidationPolicy& policy = {});
// Same, also reporting the pruned mass.
Consolidated star_product_budgeted(const PoleSum& f, const PoleSum& g, const ConsolidationPolicy& policy);

// F*(s*): (w, c) -> (-w, c*).
PoleSum conjugate(const PoleSum& f);

std::complex<double> eval_time(const PoleSum& f, double t);

// Largest |c - c'*| over the pairing (w, c) <-> (-w, c'); +inf if some term
// has no partner within freq_tol.
double conjugate_symmetry_defect(const PoleSum& f, double freq_tol);

// Header `omega,re,im`, ascending omega.
void write_polesum_csv(const PoleSum& f, std::ostream& out);
PoleSum read_polesum_csv(std::istream& in);

}  // namespace qctf
