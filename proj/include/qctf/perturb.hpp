#pragma once

// Locator-expansion predictions for the quench from the Neel state: the flip
// network around a chosen spin r, first-order energies, path-product
// interference amplitudes, and the second/fourth-order entanglement
// frequencies they imply.

#include "qctf/chain.hpp"

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qctf {

// Configurations |j>, j in -3..3, reached from the Neel state |0> (spin r up)
// by single bond flips:
//   |1>  = J_r |0>        |-1> = J_{r-1} |0>
//   |2>  = J_{r-2} |1>    |-2> = J_{r+1} |-1>
//   |3>  = J_{r-1} |2>    |-3> = J_r |-2>
// where J_k flips bond (k, k+1). Labels needing a bond outside the chain are
// absent.
struct StateNetwork {
  int site = 0;
  std::map<int, BasisState> configurations;

  bool has(int label) const { return configurations.count(label) != 0; }
  const BasisState& at(int label) const;
};

StateNetwork state_network(const ChainSpec& spec, int site);

// Diagonal energy of a product state: sum_k h_k s_k + J sum_k s_k s_{k+1}.
double first_order_energy(const DisorderFields& fields, const ChainSpec& spec, const BasisState& state);

// c_{to,from}: product over the shortest label path of
// <next|J|prev> / (E0_prev - E0_next), with <next|J|prev> = J/2 and E0 the
// unperturbed (field-only) energy. c_{j,j} = 1. Throws std::out_of_range for
// a label the network lacks.
std::complex<double> interference_amplitude(const DisorderFields& fields, const ChainSpec& spec,
                                            const StateNetwork& network, int from, int to);

struct PredictionEntry {
  int order = 2;
  int label = 0;  // neighbor label (+1 or -1) for second-order entries
  double omega = 0.0;
  std::optional<double> amplitude;  // none for resonant or frequency-only entries
  bool resonant = false;
};

struct PerturbationPrediction {
  int site = 0;
  double a0 = 0.0;  // (1/8)(J/W)^2, NaN when W = 0
  std::vector<PredictionEntry> entries;
};

// Second-order entries below this |h_r - h_{r +- 1}| (in units of J) are
// flagged resonant.
inline constexpr double kResonanceTolerance = 1e-9;

// One entry per existing neighbor label +-1: omega = |E1_0 - E1_{+-1}|,
// a = 2 |c_{+-1,0}|^2 = J^2 / (2 (h_r - h_{r+-1})^2).
PerturbationPrediction second_order_prediction(const DisorderFields& fields, const ChainSpec& spec, int site,
                                               double resonance_tol = kResonanceTolerance);

// |E_{-1} - E_1|, |2E_0 - E_1 - E_{-1}|, |E_{+-2} - E_0|, 2|E_{+-1} - E_0|,
// |E_{+-1} - E_0| from first-order energies, skipping absent labels.
std::vector<double> fourth_order_frequencies(const DisorderFields& fields, const ChainSpec& spec, int site);

// Second-order entries plus fourth-order frequency-only entries.
PerturbationPrediction predict(const DisorderFields& fields, const ChainSpec& spec, int site);

// {"site", "a0", "entries": [{"order", "omega", "amplitude", "resonant"}]}.
std::string prediction_to_json(const PerturbationPrediction& p);
PerturbationPrediction prediction_from_json(const std::string& text);

}  // namespace qctf
