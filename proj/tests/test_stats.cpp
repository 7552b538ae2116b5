#include "oracles.hpp"
#include "qctf/stats.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace qctf;

namespace {

// omega = |dh - J_eff| and a = J^2 / (2 dh^2), dh = h_r - h_{r+1}.
struct Sampler {
  double coupling, disorder;
  std::mt19937_64 rng;
  double dh() {
    std::uniform_real_distribution<double> u(-disorder, disorder);
    return u(rng) - u(rng);
  }
  std::vector<double> frequencies(std::size_t n, bool edge) {
    const double j = edge ? coupling / 2 : coupling;
    std::vector<double> out(n);
    for (auto& x : out) x = std::abs(dh() - j);
    return out;
  }
  std::vector<double> amplitudes(std::size_t n) {
    std::vector<double> out(n);
    for (auto& x : out) {
      const double d = dh();
      x = coupling * coupling / (2 * d * d);
    }
    return out;
  }
};

}  // namespace

TEST_CASE("frequency density is normalized and continuous") {
  for (bool edge : {false, true}) {
    for (double w : {2.0, 10.0, 40.0}) {
      auto f = [&](double x) { return pdf_frequency(x, 1.0, w, edge); };
      const double j = edge ? 0.5 : 1.0;
      const double total = oracle::simpson(f, 0, j, 1e-14) + oracle::simpson(f, j, 2 * w - j, 1e-14) +
                            oracle::simpson(f, 2 * w - j, 2 * w + j, 1e-14);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
      for (double b : {j, 2 * w - j}) CHECK(std::abs(f(b - 1e-12) - f(b + 1e-12)) <= 1e-9);
      CHECK(f(2 * w + j + 1e-9) == 0.0);
      for (double x : {0.3, 1.7, w, 2 * w - 0.2}) {
        CHECK(cdf_frequency(x, 1.0, w, edge) ==
              doctest::Approx(oracle::simpson(f, 0, std::min(x, j), 1e-14) +
                              (x > j ? oracle::simpson(f, j, std::min(x, 2 * w - j), 1e-14) : 0.0) +
                              (x > 2 * w - j ? oracle::simpson(f, 2 * w - j, x, 1e-14) : 0.0))
                  .epsilon(1e-9));
      }
    }
  }
  CHECK(pdf_frequency(0.0, 1.0, 10.0, false) == doctest::Approx(0.095));
  CHECK_THROWS_AS(pdf_frequency(-0.1, 1.0, 10.0, false), std::domain_error);
}

TEST_CASE("amplitude density") {
  const double w = 10.0;
  const double a0 = amplitude_floor(1.0, w);
  CHECK(a0 == doctest::Approx(0.00125));
  CHECK(pdf_amplitude(0.999 * a0, 1.0, w) == 0.0);
  CHECK(pdf_amplitude(a0, 1.0, w) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(pdf_amplitude(0.0, 1.0, w), std::domain_error);
  CHECK_THROWS_AS(pdf_amplitude(-1.0, 1.0, w), std::domain_error);

  // Normalization via the substitution a = a0 / u^2, u in (0, 1].
  auto g = [&](double u) { return u > 0 ? pdf_amplitude(a0 / (u * u), 1.0, w) * 2 * a0 / (u * u * u) : 0.0; };
  CHECK(oracle::simpson(g, 0.0, 1.0, 1e-14) == doctest::Approx(1.0).epsilon(1e-9));

  const double peak = most_probable_amplitude(1.0, w);
  CHECK(peak == doctest::Approx(2.0 / 900.0));
  for (double step : {0.98, 1.02}) CHECK(pdf_amplitude(peak * step, 1.0, w) < pdf_amplitude(peak, 1.0, w));

  // Tail a^{-3/2} law; the correction is relative order sqrt(a0 / a).
  const double tail = std::sqrt(2.0) / (4 * w);
  const double far = 1.1e4 * a0;
  CHECK(std::abs(pdf_amplitude(far, 1.0, w) / (tail * std::pow(far, -1.5)) - 1.0) <= 0.01);
  const double near = 100 * a0;
  CHECK(std::abs(pdf_amplitude(near, 1.0, w) / (tail * std::pow(near, -1.5)) - 1.0) == doctest::Approx(0.1));

  for (double a : {0.002, 0.01, 0.3}) {
    const double h = 1e-6 * a;
    const double fd = (cdf_amplitude(a + h, 1.0, w) - cdf_amplitude(a - h, 1.0, w)) / (2 * h);
    CHECK(fd == doctest::Approx(pdf_amplitude(a, 1.0, w)).epsilon(1e-6));
  }
  CHECK(cdf_amplitude(a0, 1.0, w) == 0.0);
}

TEST_CASE("analytic pdf wrapper") {
  const AnalyticPdf edge(PdfKind::FrequencyEdge, 1.0, 10.0);
  CHECK(edge(0.2) == pdf_frequency(0.2, 1.0, 10.0, true));
  CHECK(edge.support().second == doctest::Approx(20.5));
  const AnalyticPdf amp(PdfKind::Amplitude, 1.0, 10.0);
  CHECK(std::isinf(amp.support().second));
  CHECK(amp.support().first == doctest::Approx(0.00125));
  for (auto k : {PdfKind::FrequencyBulk, PdfKind::FrequencyEdge, PdfKind::Amplitude}) {
    CHECK(pdf_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS(pdf_kind_from_string("phase"));
}

TEST_CASE("critical probability formula") {
  const auto p = critical_probability(2, 1.0, 10.0);
  CHECK(p.value == doctest::Approx(0.01 * 2 * std::log(20.0)));
  CHECK(p.value == doctest::Approx(0.0599).epsilon(1e-3));
  CHECK(p.log_value == doctest::Approx(std::log(p.value)));
  CHECK(critical_probability(6, 1.0, 10.0).value < critical_probability(4, 1.0, 10.0).value);
  CHECK_THROWS_AS(critical_probability(3, 1.0, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(critical_probability(0, 1.0, 10.0), std::invalid_argument);
}

TEST_CASE("critical probability Monte Carlo") {
  const auto mc = critical_probability_mc(2, 1.0, 10.0, 1 << 20, 5, 1);
  const double exact = oracle::critical_two_factor(10.0);
  CHECK(mc.samples == (1u << 20));
  CHECK(std::abs(mc.estimate - exact) <= 4 * mc.std_error);
  CHECK(mc.std_error == doctest::Approx(std::sqrt(exact * (1 - exact) / mc.samples)).epsilon(0.05));
  // Leading order overestimates the two-factor probability modestly.
  CHECK(std::abs(std::log(exact) - critical_probability(2, 1.0, 10.0).log_value) <= 0.5);

  const auto threaded = critical_probability_mc(2, 1.0, 10.0, 1 << 20, 5, 4);
  CHECK(threaded.estimate == mc.estimate);

  CHECK(critical_probability_mc(2, 1.0, 1e6, 100000, 1).estimate <= 1e-3);
  CHECK_THROWS_AS(critical_probability_mc(2, 1.0, 10.0, 10, 1), std::invalid_argument);
}

TEST_CASE("histograms") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> xs(20000);
  for (auto& x : xs) x = u(rng);
  const auto h = build_histogram(xs, {32});
  CHECK(h.bins() == 32);
  CHECK(h.samples == xs.size());
  double mass = 0;
  for (std::size_t b = 0; b < h.bins(); ++b) mass += h.densities[b] * (h.edges[b + 1] - h.edges[b]);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  for (double d : h.densities) CHECK(std::abs(d - 1.0) <= 0.15);

  std::vector<double> few(50, 1.0);
  CHECK_THROWS_AS(build_histogram(few), std::invalid_argument);
  // Ties collapse bins rather than creating zero-width ones.
  std::vector<double> ties(1000);
  for (std::size_t i = 0; i < ties.size(); ++i) ties[i] = static_cast<double>(i % 4);
  const auto ht = build_histogram(ties, {16});
  for (std::size_t b = 0; b < ht.bins(); ++b) CHECK(ht.edges[b + 1] > ht.edges[b]);

  std::stringstream s;
  write_histogram_csv(h, s);
  CHECK(s.str().rfind("bin_lo,bin_hi,density\n", 0) == 0);
  const auto back = read_histogram_csv(s);
  CHECK(back.edges == h.edges);
  CHECK(back.densities == h.densities);
}

TEST_CASE("comparison against the analytic densities") {
  Sampler s{1.0, 10.0, std::mt19937_64(21)};
  const auto freq = build_histogram(s.frequencies(200000, false));
  const AnalyticPdf bulk(PdfKind::FrequencyBulk, 1.0, 10.0);
  const auto c = compare_histogram(freq, bulk, {0.0, 21.0});
  CHECK(c.total_variation <= 0.05);
  CHECK(c.ks <= 0.01);
  CHECK(c.samples == 200000);

  const auto edge = build_histogram(s.frequencies(200000, true));
  CHECK(compare_histogram(edge, AnalyticPdf(PdfKind::FrequencyEdge, 1.0, 10.0), {0.0, 20.5}).total_variation <=
        0.05);
  // The bulk density does not describe edge samples near omega = 0.
  CHECK(compare_histogram(edge, bulk, {0.0, 21.0}).ks >
        compare_histogram(edge, AnalyticPdf(PdfKind::FrequencyEdge, 1.0, 10.0), {0.0, 20.5}).ks);

  const auto amp = build_histogram(s.amplitudes(200000));
  const AnalyticPdf ap(PdfKind::Amplitude, 1.0, 10.0);
  const auto ca = compare_histogram(amp, ap, {amplitude_floor(1.0, 10.0), INFINITY});
  CHECK(ca.total_variation <= 0.05);

  CHECK_THROWS_AS(compare_histogram(freq, bulk, {30.0, 40.0}), std::invalid_argument);
  CHECK_THROWS_AS(compare_histogram(freq, bulk, {5.0, 5.0}), std::invalid_argument);

  const auto json = comparison_to_json(c);
  CHECK(json.find("\"tv\"") != std::string::npos);
  CHECK(json.find("\"ks\"") != std::string::npos);
}
