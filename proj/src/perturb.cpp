#include "qctf/perturb.hpp"

#include "qctf/io.hpp"
#include "qctf/stats.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qctf {

const BasisState& StateNetwork::at(int label) const {
  const auto it = configurations.find(label);
  if (it == configurations.end()) {
    throw std::out_of_range("configuration |" + std::to_string(label) + "> absent at site " + std::to_string(site));
  }
  return it->second;
}

StateNetwork state_network(const ChainSpec& spec, int site) {
  spec.validate();
  if (site < 1 || site > spec.n_sites) throw std::out_of_range("site outside 1..N");
  StateNetwork net;
  net.site = site;
  // The selected spin starts up.
  const BasisState neel = neel_state(spec, site % 2 == 1);
  net.configurations.emplace(0, neel);

  auto extend = [&](int from, int bond, int label) {
    if (!net.has(from) || bond < 1 || bond > spec.n_sites - 1) return;
    if (auto next = apply_bond_flip(net.at(from), bond)) net.configurations.emplace(label, *next);
  };
  extend(0, site, 1);
  extend(0, site - 1, -1);
  extend(1, site - 2, 2);
  extend(-1, site + 1, -2);
  extend(2, site - 1, 3);
  extend(-2, site, -3);
  return net;
}

double first_order_energy(const DisorderFields& fields, const ChainSpec& spec, const BasisState& state) {
  double e = unperturbed_energy(fields, state);
  for (int k = 1; k < spec.n_sites; ++k) e += spec.coupling * state.spin(k) * state.spin(k + 1);
  return e;
}

std::complex<double> interference_amplitude(const DisorderFields& fields, const ChainSpec& spec,
                                            const StateNetwork& network, int from, int to) {
  if (std::abs(from) > 3 || std::abs(to) > 3) throw std::out_of_range("labels run over -3..3");
  network.at(from);
  network.at(to);
  std::complex<double> c = 1.0;
  const int step = to > from ? 1 : -1;
  for (int prev = from; prev != to; prev += step) {
    const int next = prev + step;
    const double e_prev = unperturbed_energy(fields, network.at(prev));
    const double e_next = unperturbed_energy(fields, network.at(next));
    c *= 0.5 * spec.coupling / (e_prev - e_next);
  }
  return c;
}

PerturbationPrediction second_order_prediction(const DisorderFields& fields, const ChainSpec& spec, int site,
                                               double resonance_tol) {
  const StateNetwork net = state_network(spec, site);
  PerturbationPrediction p;
  p.site = site;
  const double w = spec.disorder_bound;
  p.a0 = w > 0.0 ? amplitude_floor(spec.coupling, w) : std::numeric_limits<double>::quiet_NaN();
  const double e0 = first_order_energy(fields, spec, net.at(0));
  for (int label : {1, -1}) {
    if (!net.has(label)) continue;
    PredictionEntry entry;
    entry.order = 2;
    entry.label = label;
    entry.omega = std::abs(e0 - first_order_energy(fields, spec, net.at(label)));
    const double gap = unperturbed_energy(fields, net.at(0)) - unperturbed_energy(fields, net.at(label));
    if (std::abs(gap) < resonance_tol * spec.coupling) {
      entry.resonant = true;
    } else {
      entry.amplitude = 2.0 * std::norm(interference_amplitude(fields, spec, net, 0, label));
    }
    p.entries.push_back(entry);
  }
  return p;
}

std::vector<double> fourth_order_frequencies(const DisorderFields& fields, const ChainSpec& spec, int site) {
  const StateNetwork net = state_network(spec, site);
  std::map<int, double> e;
  for (const auto& [label, state] : net.configurations) e[label] = first_order_energy(fields, spec, state);
  const double e0 = e.at(0);
  const bool plus = net.has(1), minus = net.has(-1);
  std::vector<double> out;
  if (plus && minus) {
    out.push_back(std::abs(e.at(-1) - e.at(1)));
    out.push_back(std::abs(2.0 * e0 - e.at(1) - e.at(-1)));
  }
  for (int label : {2, -2}) {
    if (net.has(label)) out.push_back(std::abs(e.at(label) - e0));
  }
  for (int label : {1, -1}) {
    if (net.has(label)) out.push_back(2.0 * std::abs(e.at(label) - e0));
  }
  for (int label : {1, -1}) {
    if (net.has(label)) out.push_back(std::abs(e.at(label) - e0));
  }
  return out;
}

PerturbationPrediction predict(const DisorderFields& fields, const ChainSpec& spec, int site) {
  PerturbationPrediction p = second_order_prediction(fields, spec, site);
  for (double omega : fourth_order_frequencies(fields, spec, site)) {
    PredictionEntry entry;
    entry.order = 4;
    entry.omega = omega;
    p.entries.push_back(entry);
  }
  return p;
}

std::string prediction_to_json(const PerturbationPrediction& p) {
  auto num = [](double v) { return std::isfinite(v) ? format_double(v) : std::string("null"); };
  std::string s = "{\"site\": " + std::to_string(p.site) + ", \"a0\": " + num(p.a0) + ", \"entries\": [";
  for (std::size_t i = 0; i < p.entries.size(); ++i) {
    const auto& e = p.entries[i];
    if (i) s += ", ";
    s += "{\"order\": " + std::to_string(e.order) + ", \"omega\": " + format_double(e.omega) +
         ", \"amplitude\": " + (e.amplitude ? format_double(*e.amplitude) : std::string("null")) +
         ", \"resonant\": " + (e.resonant ? "true" : "false") + "}";
  }
  return s + "]}\n";
}

PerturbationPrediction prediction_from_json(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  PerturbationPrediction p;
  p.site = doc.at("site").get<int>();
  p.a0 = doc.at("a0").is_null() ? std::numeric_limits<double>::quiet_NaN() : doc.at("a0").get<double>();
  for (const auto& e : doc.at("entries")) {
    PredictionEntry entry;
    entry.order = e.at("order").get<int>();
    entry.omega = e.at("omega").get<double>();
    if (!e.at("amplitude").is_null()) entry.amplitude = e.at("amplitude").get<double>();
    entry.resonant = e.at("resonant").get<bool>();
    p.entries.push_back(entry);
  }
  return p;
}

}  // namespace qctf
