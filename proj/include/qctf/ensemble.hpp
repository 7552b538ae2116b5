#pragma once

// Disorder-ensemble driver: per-realization second-order predictions, optional
// exact simulation with least-squares amplitude extraction, histogram
// reconstruction against the analytic densities, and on-disk persistence.

#include "qctf/chain.hpp"
#include "qctf/stats.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qctf {

inline constexpr const char* kCodeVersion = "0.1.0";
inline constexpr int kEnsembleSchemaVersion = 1;

enum class SiteKind { Edge, Bulk };
enum class EnsembleMode { Analytic, Simulate, Both };

std::string to_string(SiteKind kind);
std::string to_string(EnsembleMode mode);
SiteKind site_kind_from_string(const std::string& name);
EnsembleMode ensemble_mode_from_string(const std::string& name);

struct EnsembleConfig {
  ChainSpec spec{6, 1.0, 10.0};
  std::uint64_t realizations = 10000;
  std::uint64_t master_seed = 1;
  SiteKind site = SiteKind::Bulk;
  EnsembleMode mode = EnsembleMode::Analytic;
  double t_max = 40.0;
  double dt = 0.01;
  double resonance_tol = 0.05;  // |h_r - h_{r+-1}| below this many J is excluded
  double window_min = 5.0;      // frequency comparisons use omega > window_min J
  int bins = 64;
  int workers = 1;  // does not influence results

  // Edge: site 1. Bulk: the middle site, at least two sites from each end.
  int site_index() const;
  void validate() const;
  // FNV-1a of the canonical config text, excluding `workers`.
  std::uint64_t hash() const;
};

struct EnsembleSample {
  std::uint64_t realization = 0;
  int label = 0;            // neighbor +1 or -1
  double omega = 0.0;       // second-order frequency
  double amplitude = 0.0;   // J^2 / (2 dh^2)
  double extracted = 0.0;   // least-squares amplitude from the simulated trace, NaN if not simulated
};

struct RealizationFailure {
  std::uint64_t realization = 0;
  std::string message;
};

struct PdfReport {
  bool edge = false;
  Histogram frequency_histogram;
  Comparison frequency;
  Histogram amplitude_histogram;
  Comparison amplitude;
};

struct EnsembleResult {
  EnsembleConfig config;
  std::vector<EnsembleSample> samples;
  std::uint64_t resonant_exclusions = 0;
  std::vector<RealizationFailure> failures;
  std::optional<PdfReport> report;
  std::string code_version = kCodeVersion;

  std::vector<double> frequencies() const;
  std::vector<double> amplitudes() const;
};

// Deterministic for a fixed master seed whatever cfg.workers is. Failing
// realizations are recorded; more than 1% failing aborts with
// std::runtime_error.
EnsembleResult run_ensemble(const EnsembleConfig& cfg);

// Frequency histogram over omega in (window_min J, 2W + J_eff] against the
// bulk or edge density; amplitude histogram over all samples against the
// amplitude density. Throws std::invalid_argument on too few samples.
PdfReport reconstruct_pdfs(const EnsembleResult& res, double coupling, double disorder, bool edge);

// Directory layout: config.json, samples.csv, report.json, histograms/*.csv,
// CHECKSUMS (per-file FNV-1a plus a master line).
void persist(const EnsembleResult& res, const std::filesystem::path& dir);
// Throws std::runtime_error on checksum mismatch, missing files or an
// unsupported schema version.
EnsembleResult load(const std::filesystem::path& dir);

// Field-by-field equality, ignoring cfg.workers; NaNs compare equal.
bool same_result(const EnsembleResult& a, const EnsembleResult& b);

}  // namespace qctf
