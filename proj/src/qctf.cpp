#include "qctf/qctf.hpp"

#include "qctf/errors.hpp"
#include "qctf/io.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qctf {

namespace {

constexpr double kAlphaZero = 1e-14;
constexpr double kRealityTolerance = 1e-9;

// All c_{a l} for one initial state, sharing the <n|psi0> projections.
class AmplitudeTable {
 public:
  AmplitudeTable(const EigenSystem& eig, const StateVector& psi0) : eig_(eig), prop_(eig, psi0) {}

  PoleSum amplitude(int site, bool up, std::uint64_t l, const ConsolidationPolicy& policy) const {
    const std::uint64_t word = insert_site(l, site, up);
    const auto [s, row] = eig_.sector_of(word);
    const auto& sec = eig_.sectors()[static_cast<std::size_t>(s)];
    const auto& b = prop_.overlaps()[static_cast<std::size_t>(s)];
    std::vector<Pole> terms;
    for (Eigen::Index n = 0; n < sec.energies.size(); ++n) {
      const std::complex<double> c = sec.vectors(row, n) * b(n);
      if (c != 0.0) terms.push_back({sec.energies(n), c});
    }
    return consolidate(PoleSum(std::move(terms)), policy.freq_tol, 0.0).sum;
  }

 private:
  const EigenSystem& eig_;
  SpectralPropagator prop_;
};

void check_inputs(const EigenSystem& eig, const StateVector& psi0, int site) {
  if (psi0.size() != eig.dimension()) throw std::invalid_argument("state dimension mismatch");
  if (site < 1 || site > eig.spec().n_sites) throw std::out_of_range("site outside 1..N");
}

double l1(const PoleSum& f) {
  double s = 0.0;
  for (const auto& p : f.terms()) s += std::abs(p.coeff);
  return s;
}

// Star product with a running bound on the time-domain error from pruning.
struct Bounded {
  PoleSum value;
  double error = 0.0;
};

Bounded bounded_product(const Bounded& f, const Bounded& g, const ConsolidationPolicy& policy) {
  auto r = star_product_budgeted(f.value, g.value, policy);
  const double propagated = l1(f.value) * g.error + f.error * l1(g.value) + f.error * g.error;
  return {std::move(r.sum), propagated + r.dropped_mass};
}

}  // namespace

QctfOptions default_qctf_options(const ChainSpec& spec) {
  QctfOptions o;
  o.policy.freq_tol = 1e-9 * spec.coupling;
  return o;
}

PoleSum amplitude_polesum(const EigenSystem& eig, const StateVector& psi0, int site, bool up, std::uint64_t l,
                          const ConsolidationPolicy& policy) {
  check_inputs(eig, psi0, site);
  if (l >= (eig.spec().dimension() >> 1)) throw std::out_of_range("complement index out of range");
  return AmplitudeTable(eig, psi0).amplitude(site, up, l, policy);
}

const PoleSum* QctfBlock::find(std::uint64_t l, std::uint64_t k) const {
  const auto it = entries.find({l, k});
  return it == entries.end() ? nullptr : &it->second;
}

QctfBlock qctf_block(const EigenSystem& eig, const StateVector& psi0, int site, const QctfOptions& options) {
  check_inputs(eig, psi0, site);
  const std::uint64_t d = eig.spec().dimension() >> 1;
  const AmplitudeTable table(eig, psi0);
  std::vector<PoleSum> plus, minus_conj;
  plus.reserve(d);
  minus_conj.reserve(d);
  std::size_t plus_terms = 0, minus_terms = 0;
  for (std::uint64_t l = 0; l < d; ++l) {
    plus.push_back(table.amplitude(site, true, l, options.policy));
    minus_conj.push_back(conjugate(table.amplitude(site, false, l, options.policy)));
    plus_terms += plus.back().size();
    minus_terms += minus_conj.back().size();
  }
  const double estimate = static_cast<double>(plus_terms) * static_cast<double>(minus_terms) * sizeof(Pole);
  if (estimate > static_cast<double>(options.max_bytes)) {
    throw std::length_error("QCTF block needs about " + format_double(estimate / 1048576.0) +
                            " MiB of pole terms, above the cap of " +
                            std::to_string(options.max_bytes / 1048576) + " MiB");
  }
  QctfBlock block;
  block.site = site;
  block.complement_dim = d;
  for (std::uint64_t l = 0; l < d; ++l) {
    if (plus[l].empty()) continue;
    for (std::uint64_t k = 0; k < d; ++k) {
      if (minus_conj[k].empty()) continue;
      auto entry = star_product(plus[l], minus_conj[k], options.policy);
      if (!entry.empty()) block.entries.emplace(std::make_pair(l, k), std::move(entry));
    }
  }
  return block;
}

std::complex<double> reconstruct_element(const QctfBlock& block, std::uint64_t l, std::uint64_t k, double t) {
  const PoleSum* entry = block.find(l, k);
  return entry ? (*entry)(t) : std::complex<double>(0.0);
}

Consolidated entanglement_polesum_budgeted(const EigenSystem& eig, const StateVector& psi0, int site,
                                           const QctfOptions& options) {
  check_inputs(eig, psi0, site);
  if (eig.spec().n_sites > options.max_sites) {
    throw std::length_error("entanglement pole sum for N = " + std::to_string(eig.spec().n_sites) +
                            " exceeds the pole budget (N <= " + std::to_string(options.max_sites) + ")");
  }
  const auto& policy = options.policy;
  const std::uint64_t d = eig.spec().dimension() >> 1;
  const AmplitudeTable table(eig, psi0);

  // Raw rho_{ab} terms are gathered across l and consolidated once.
  std::vector<Pole> pp, mm, pm;
  for (std::uint64_t l = 0; l < d; ++l) {
    const PoleSum cp = table.amplitude(site, true, l, policy);
    const PoleSum cm = table.amplitude(site, false, l, policy);
    const PoleSum cp_conj = conjugate(cp);
    const PoleSum cm_conj = conjugate(cm);
    const ConsolidationPolicy exact{0.0, 0.0, policy.max_terms};
    for (const auto& [dst, f, g] : {std::tuple{&pp, &cp, &cp_conj}, std::tuple{&mm, &cm, &cm_conj},
                                    std::tuple{&pm, &cp, &cm_conj}}) {
      const auto terms = star_product(*f, *g, exact).terms();
      dst->insert(dst->end(), terms.begin(), terms.end());
      if (dst->size() > policy.max_terms) throw std::length_error("density pole sum exceeds the term cap");
    }
  }
  auto finish = [&](std::vector<Pole>& raw) {
    auto c = consolidate(PoleSum(std::move(raw)), policy.freq_tol, policy.prune_floor);
    return Bounded{std::move(c.sum), c.dropped_mass};
  };
  const Bounded rho_pp = finish(pp);
  const Bounded rho_mm = finish(mm);
  const Bounded rho_pm = finish(pm);
  const Bounded rho_mp{conjugate(rho_pm.value), rho_pm.error};

  const Bounded a = bounded_product(rho_pp, rho_mm, policy);
  const Bounded b = bounded_product(rho_pm, rho_mp, policy);
  auto q = consolidate(a.value - b.value, policy.freq_tol, policy.prune_floor);

  const double defect = conjugate_symmetry_defect(q.sum, std::max(policy.freq_tol, 1e-12));
  if (!(defect <= kRealityTolerance)) {
    throw NumericContractError("entanglement pole sum is not conjugate-symmetric (defect " +
                               format_double(defect) + ")");
  }
  q.sum.set_real_valued(true);
  q.dropped_mass += a.error + b.error;
  return q;
}

PoleSum entanglement_polesum(const EigenSystem& eig, const StateVector& psi0, int site,
                             const QctfOptions& options) {
  return entanglement_polesum_budgeted(eig, psi0, site, options).sum;
}

StaticMeasure static_measure(const StateVector& vector, int site) {
  detail::check_site(vector.size(), site);
  const Eigen::Index d = vector.size() / 2;
  Eigen::VectorXcd up(d), down(d);
  for (Eigen::Index l = 0; l < d; ++l) {
    const auto ul = static_cast<std::uint64_t>(l);
    up(l) = vector(static_cast<Eigen::Index>(insert_site(ul, site, true)));
    down(l) = vector(static_cast<Eigen::Index>(insert_site(ul, site, false)));
  }
  StaticMeasure out;
  auto& s = out.split;
  s.alpha_plus = up.norm();
  s.alpha_minus = down.norm();
  if (std::abs(s.alpha_plus) <= kAlphaZero) {
    std::swap(up, down);
    std::swap(s.alpha_plus, s.alpha_minus);
    s.swapped = true;
  }
  if (std::abs(s.alpha_plus) > kAlphaZero) s.a_plus = up / s.alpha_plus;
  if (std::abs(s.alpha_minus) > kAlphaZero) s.a_minus = down / s.alpha_minus;
  if (s.a_plus.size() && s.a_minus.size()) s.overlap = s.a_minus.dot(s.a_plus);
  const double ab = std::norm(s.alpha_plus * s.alpha_minus);
  out.q = ab * (1.0 - std::norm(s.overlap));
  return out;
}

double nonlocality_overlap(const EigenstateSplit& split) {
  if (split.a_plus.size() == 0 || split.a_minus.size() == 0) {
    throw std::domain_error("overlap undefined: one spin component vanishes");
  }
  return std::min(1.0, std::abs(split.overlap));
}

}  // namespace qctf
