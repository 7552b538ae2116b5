#include "cli.hpp"

#include "qctf/ensemble.hpp"
#include "qctf/errors.hpp"
#include "qctf/io.hpp"
#include "qctf/perturb.hpp"
#include "qctf/qctf.hpp"
#include "qctf/spectral.hpp"
#include "qctf/stats.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace {

using namespace qctf;

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct Common {
  int n = 6;
  double j = 1.0;
  double w = 10.0;
  std::uint64_t seed = 1;
  int site = 0;  // 0: middle of the chain
  double tmax = 40.0;
  double dt = 0.01;
  std::string out;
  int threads = std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
  bool gnuplot = false;

  ChainSpec spec() const {
    ChainSpec s{n, j, w};
    s.validate();
    return s;
  }
  int resolved_site() const {
    const int s = site == 0 ? (n + 1) / 2 : site;
    if (s < 1 || s > n) throw std::out_of_range("--site must lie in 1..N");
    return s;
  }
};

// Collects output files and writes the run manifest plus a rerunnable config.
class Outputs {
 public:
  Outputs(const Common& c, const std::string& command) : command_(command), start_(std::chrono::steady_clock::now()) {
    if (!c.out.empty()) {
      dir_ = c.out;
    } else {
      const char* root = std::getenv("QCTF_OUT");
      dir_ = fs::path(root && *root ? root : "out") / command;
    }
    fs::create_directories(dir_);
  }

  const fs::path& dir() const { return dir_; }

  void write(const std::string& name, const std::string& text) {
    write_file(dir_ / name, text);
    files_.emplace_back(name, text);
  }
  // Files produced by library code directly under dir().
  void adopt(const std::string& name) { files_.emplace_back(name, read_file(dir_ / name)); }

  void finish(const CLI::App& app, std::uint64_t seed) {
    const std::string config = app.config_to_str(true, false);
    write("run.ini", config);
    nlohmann::ordered_json m;
    m["subcommand"] = command_;
    m["code_version"] = kCodeVersion;
    m["seed"] = seed;
    nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
    std::istringstream lines(config);
    for (std::string line; std::getline(lines, line);) {
      const auto eq = line.find('=');
      if (eq == std::string::npos || line[0] == '#' || line[0] == '[') continue;
      cfg[line.substr(0, eq)] = line.substr(eq + 1);
    }
    m["config"] = cfg;
    m["outputs"] = nlohmann::ordered_json::array();
    for (const auto& [name, text] : files_) {
      m["outputs"].push_back({{"path", name}, {"bytes", text.size()}, {"fnv1a64", hex64(fnv1a64(text))}});
    }
    m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_file(dir_ / "manifest.json", m.dump(2) + "\n");
    std::cout << "wrote " << files_.size() << " files to " << dir_.string() << '\n';
  }

 private:
  std::string command_;
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
  std::chrono::steady_clock::time_point start_;
};

std::string num(double v) { return format_double(v); }

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  bool krylov = false;
  std::string window = "rectangular";
};

void cmd_simulate(const CLI::App& app, const Common& c, const SimulateArgs& a) {
  const ChainSpec spec = c.spec();
  const int site = c.resolved_site();
  const auto fields = sample_disorder(spec, c.seed);
  const auto h = build_hamiltonian(spec, fields);
  const StateVector psi0 = basis_vector(neel_state(spec, site % 2 == 1));
  const bool krylov = a.krylov || spec.dimension() > kDenseDimensionCap;
  const auto trace = krylov ? trace_q_krylov(h, psi0, site, c.tmax, c.dt)
                            : trace_q(diagonalize(h), psi0, site, c.tmax, c.dt);
  const WindowKind window = a.window == "hann" ? WindowKind::Hann : WindowKind::Rectangular;
  const auto spectrum = dft_spectrum(trace, window);
  const auto pred = predict(fields, spec, site);

  Outputs out(c, "simulate");
  out.write("fields.json", fields_to_json(spec, fields));
  std::ostringstream t, s, o;
  write_trace_csv(trace, t);
  write_spectrum_csv(spectrum, s);
  out.write("trace.csv", t.str());
  out.write("spectrum.csv", s.str());

  // One row per prediction entry, with the fitted line next to it.
  const double half_width = 2.0 * std::numbers::pi / c.tmax;
  o << "order,label,omega,amplitude,resonant,fit_omega,fit_amplitude\n";
  for (const auto& e : pred.entries) {
    double fw = std::numeric_limits<double>::quiet_NaN(), fa = fw;
    try {
      const auto fit = fit_component_near(trace, e.omega, half_width);
      fw = fit.omega;
      fa = fit.amplitude;
    } catch (const std::domain_error&) {
      // unresolvable frequency: leave the fit columns NaN
    }
    o << e.order << ',' << e.label << ',' << num(e.omega) << ','
      << (e.amplitude ? num(*e.amplitude) : std::string("nan")) << ',' << (e.resonant ? 1 : 0) << ',' << num(fw)
      << ',' << num(fa) << '\n';
  }
  out.write("overlay.csv", o.str());
  out.write("prediction.json", prediction_to_json(pred));
  if (c.gnuplot) {
    out.write("plot.gp",
              "set datafile separator ','\nset key autotitle columnhead\n"
              "set multiplot layout 2,1\nplot 'trace.csv' using 1:2 with lines\n"
              "set logscale y\nplot 'spectrum.csv' using 1:2 with lines, "
              "'overlay.csv' using 3:(0.5*$4) with impulses\nunset multiplot\n");
  }
  double lo = 1.0, hi = 0.0;
  for (double q : trace.values) lo = std::min(lo, q), hi = std::max(hi, q);
  std::cout << "site " << site << ", " << trace.values.size() << " samples, Q in [" << num(lo) << ", " << num(hi)
            << "]" << (krylov ? " (Krylov)" : "") << '\n';
  out.finish(app, c.seed);
}

// --- predict ----------------------------------------------------------------

void cmd_predict(const CLI::App& app, const Common& c) {
  const ChainSpec spec = c.spec();
  const auto fields = sample_disorder(spec, c.seed);
  Outputs out(c, "predict");
  out.write("fields.json", fields_to_json(spec, fields));
  out.write("prediction.json", prediction_to_json(predict(fields, spec, c.resolved_site())));
  out.finish(app, c.seed);
}

// --- qctf -------------------------------------------------------------------

struct QctfArgs {
  double tol = 1e-8;
  double prune = 0.0;
  int samples = 100;
};

int cmd_qctf(const CLI::App& app, const Common& c, const QctfArgs& a) {
  const ChainSpec spec = c.spec();
  const int site = c.resolved_site();
  const auto fields = sample_disorder(spec, c.seed);
  const auto eig = diagonalize(build_hamiltonian(spec, fields));
  const StateVector psi0 = basis_vector(neel_state(spec, site % 2 == 1));
  auto opts = default_qctf_options(spec);
  opts.policy.prune_floor = a.prune;
  const auto q = entanglement_polesum_budgeted(eig, psi0, site, opts);

  if (a.samples < 2) throw std::invalid_argument("--samples must be >= 2");
  std::ostringstream check;
  check << "t,q_polesum,q_direct,deviation\n";
  double worst = 0.0;
  for (int k = 0; k < a.samples; ++k) {
    const double t = c.tmax * k / (a.samples - 1);
    const double direct = q_measure(reduced_density(evolve(eig, psi0, t), site));
    const double fromq = q.sum(t).real();
    worst = std::max(worst, std::abs(fromq - direct));
    check << num(t) << ',' << num(fromq) << ',' << num(direct) << ',' << num(std::abs(fromq - direct)) << '\n';
  }
  const double allowed = a.tol + q.dropped_mass;
  const bool pass = worst <= allowed;

  Outputs out(c, "qctf");
  std::ostringstream poles;
  write_polesum_csv(q.sum, poles);
  out.write("poles.csv", poles.str());
  out.write("check.csv", check.str());
  nlohmann::ordered_json r;
  r["site"] = site;
  r["terms"] = q.sum.size();
  r["dropped_mass"] = q.dropped_mass;
  r["max_deviation"] = worst;
  r["tolerance"] = allowed;
  r["pass"] = pass;
  out.write("report.json", r.dump(2) + "\n");
  out.finish(app, c.seed);
  std::cout << q.sum.size() << " poles, max |inverse-Laplace - direct| = " << num(worst) << (pass ? "" : " FAILS")
            << " (tolerance " << num(allowed) << ")\n";
  return pass ? 0 : kExitNumeric;
}

// --- ensemble ---------------------------------------------------------------

struct EnsembleArgs {
  std::uint64_t realizations = 10000;
  std::string mode = "analytic";
  std::string kind = "bulk";
  int bins = 64;
  double resonance_tol = 0.05;
  double window_min = 5.0;
};

void cmd_ensemble(const CLI::App& app, const Common& c, const EnsembleArgs& a) {
  EnsembleConfig cfg;
  cfg.spec = c.spec();
  cfg.realizations = a.realizations;
  cfg.master_seed = c.seed;
  cfg.site = site_kind_from_string(a.kind);
  cfg.mode = ensemble_mode_from_string(a.mode);
  cfg.t_max = c.tmax;
  cfg.dt = c.dt;
  cfg.resonance_tol = a.resonance_tol;
  cfg.window_min = a.window_min;
  cfg.bins = a.bins;
  cfg.workers = c.threads;
  cfg.validate();
  std::cerr << "ensemble: " << cfg.realizations << " realizations, " << to_string(cfg.mode) << ", "
            << to_string(cfg.site) << " site " << cfg.site_index() << ", " << cfg.workers << " workers\n";
  auto res = run_ensemble(cfg);
  std::cerr << "ensemble: " << res.samples.size() << " samples, " << res.resonant_exclusions
            << " resonant exclusions, " << res.failures.size() << " failures\n";
  try {
    res.report = reconstruct_pdfs(res, cfg.spec.coupling, cfg.spec.disorder_bound, cfg.site == SiteKind::Edge);
    std::cout << "frequency TV " << num(res.report->frequency.total_variation) << ", amplitude KS "
              << num(res.report->amplitude.ks) << '\n';
  } catch (const std::invalid_argument& e) {
    std::cerr << "ensemble: no density report (" << e.what() << ")\n";
  }
  Outputs out(c, "ensemble");
  persist(res, out.dir());
  for (const auto& entry : fs::recursive_directory_iterator(out.dir())) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), out.dir()).generic_string();
    if (rel != "manifest.json" && rel != "run.ini") out.adopt(rel);
  }
  out.finish(app, c.seed);
}

// --- pdf --------------------------------------------------------------------

struct PdfArgs {
  std::string kind = "frequency-bulk";
  int points = 400;
  double xmax = 0.0;
};

void cmd_pdf(const CLI::App& app, const Common& c, const PdfArgs& a) {
  const ChainSpec spec = c.spec();
  const AnalyticPdf pdf(pdf_kind_from_string(a.kind), spec.coupling, spec.disorder_bound);
  if (a.points < 2) throw std::invalid_argument("--points must be >= 2");
  const auto [lo, hi] = pdf.support();
  std::ostringstream s;
  s << "x,pdf,cdf\n";
  if (pdf.kind() == PdfKind::Amplitude) {
    // Log-spaced from the floor a0.
    const double top = a.xmax > 0.0 ? a.xmax : 1000.0 * lo;
    if (!(top > lo)) throw std::invalid_argument("--xmax must exceed the amplitude floor");
    for (int k = 0; k < a.points; ++k) {
      const double x = k == 0 ? lo : lo * std::pow(top / lo, static_cast<double>(k) / (a.points - 1));
      s << num(x) << ',' << num(pdf(x)) << ',' << num(pdf.cdf(x)) << '\n';
    }
  } else {
    const double top = a.xmax > 0.0 ? a.xmax : hi;
    for (int k = 0; k < a.points; ++k) {
      const double x = lo + (top - lo) * k / (a.points - 1);
      s << num(x) << ',' << num(pdf(x)) << ',' << num(pdf.cdf(x)) << '\n';
    }
  }
  Outputs out(c, "pdf");
  out.write(a.kind + ".csv", s.str());
  if (c.gnuplot) {
    out.write("plot.gp", "set datafile separator ','\nset key autotitle columnhead\n" +
                             std::string(pdf.kind() == PdfKind::Amplitude ? "set logscale xy\n" : "") + "plot '" +
                             a.kind + ".csv' using 1:2 with lines\n");
  }
  out.finish(app, c.seed);
}

// --- critical ---------------------------------------------------------------

struct CriticalArgs {
  std::vector<int> orders{2, 4, 6};
  std::vector<double> wj{10.0, 20.0};
  std::string samples = "1e7";
};

std::uint64_t parse_count(const std::string& text) {
  double v = 0.0;
  try {
    v = parse_double(text);
  } catch (const std::exception&) {
    throw std::invalid_argument("--samples expects a count such as 100000 or 1e7, got '" + text + "'");
  }
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e15) {
    throw std::invalid_argument("--samples must be a positive integer, got '" + text + "'");
  }
  return static_cast<std::uint64_t>(v);
}

void cmd_critical(const CLI::App& app, const Common& c, const CriticalArgs& a) {
  const std::uint64_t samples = parse_count(a.samples);
  std::ostringstream s;
  s << "order,w_over_j,formula,ln_formula,mc,std_error,ln_mc,samples\n";
  std::cout << "order  W/J       formula            MC +- stderr\n";
  for (double wj : a.wj) {
    for (int order : a.orders) {
      const auto f = critical_probability(order, c.j, wj * c.j);
      const auto mc = critical_probability_mc(order, c.j, wj * c.j, samples, c.seed, c.threads);
      s << order << ',' << num(wj) << ',' << num(f.value) << ',' << num(f.log_value) << ',' << num(mc.estimate) << ','
        << num(mc.std_error) << ',' << num(std::log(mc.estimate)) << ',' << mc.samples << '\n';
      std::cout << order << "      " << wj << "      " << f.value << "      " << mc.estimate << " +- "
                << mc.std_error << '\n';
    }
  }
  Outputs out(c, "critical");
  out.write("critical.csv", s.str());
  out.finish(app, c.seed);
}

// --- eigen ------------------------------------------------------------------

void cmd_eigen(const CLI::App& app, const Common& c) {
  const ChainSpec spec = c.spec();
  const int site = c.resolved_site();
  const auto eig = diagonalize(build_hamiltonian(spec, sample_disorder(spec, c.seed)));
  std::ostringstream s;
  s << "index,energy,population,q,overlap,alpha_plus,alpha_minus\n";
  for (Eigen::Index n = 0; n < eig.energies().size(); ++n) {
    const auto m = static_measure(eig.vector(n), site);
    double overlap = std::numeric_limits<double>::quiet_NaN();
    if (m.split.a_plus.size() && m.split.a_minus.size()) overlap = nonlocality_overlap(m.split);
    // Report alpha for the up/down components regardless of the internal swap.
    const double up = std::abs(m.split.swapped ? m.split.alpha_minus : m.split.alpha_plus);
    const double down = std::abs(m.split.swapped ? m.split.alpha_plus : m.split.alpha_minus);
    s << n << ',' << num(eig.energies()(n)) << ',' << eig.sectors()[static_cast<std::size_t>(eig.locate(n).first)].population
      << ',' << num(m.q) << ',' << num(overlap) << ',' << num(up) << ',' << num(down) << '\n';
  }
  Outputs out(c, "eigen");
  out.write("eigen.csv", s.str());
  out.finish(app, c.seed);
}

void add_common(CLI::App& app, Common& c) {
  app.add_option("--n", c.n, "number of sites N")->capture_default_str();
  app.add_option("--j", c.j, "coupling J (> 0)")->capture_default_str();
  app.add_option("--w", c.w, "disorder bound W, fields uniform on [-W, W]")->capture_default_str();
  app.add_option("--seed", c.seed, "disorder seed (master seed for ensembles)")->capture_default_str();
  app.add_option("--site", c.site, "selected spin r, 1-based; 0 picks the middle")->capture_default_str();
  app.add_option("--tmax", c.tmax, "trace length in units of 1/J")->capture_default_str();
  app.add_option("--dt", c.dt, "trace sampling step")->capture_default_str();
  app.add_option("--out", c.out, "output directory (default $QCTF_OUT/<command> or out/<command>)");
  app.add_option("--threads", c.threads, "worker threads for ensemble and critical")->capture_default_str();
  app.add_flag("--gnuplot", c.gnuplot, "also write a gnuplot script where supported");
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Entanglement dynamics of disordered Heisenberg chains via pole sums"};
  app.set_config("--config", "", "flat key=value file; command-line flags take precedence");
  app.fallthrough();
  app.require_subcommand(1);
  Common common;
  add_common(app, common);

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "evolve the Neel state for one realization; trace, spectrum, overlay");
  sim->add_flag("--krylov", sim_args.krylov, "use Krylov propagation (automatic above N = 12)");
  sim->add_option("--window", sim_args.window, "spectrum window")
      ->check(CLI::IsMember({"rectangular", "hann"}))
      ->capture_default_str();

  auto* pre = app.add_subcommand("predict", "second- and fourth-order predictions for one realization");

  QctfArgs qctf_args;
  auto* qc = app.add_subcommand("qctf", "entanglement pole sum with a time-domain cross-check");
  qc->add_option("--tol", qctf_args.tol, "allowed max deviation")->capture_default_str();
  qc->add_option("--prune", qctf_args.prune, "drop pole terms below this magnitude")->capture_default_str();
  qc->add_option("--samples", qctf_args.samples, "cross-check times in [0, tmax]")->capture_default_str();

  EnsembleArgs ens_args;
  auto* ens = app.add_subcommand("ensemble", "disorder ensemble of second-order predictions");
  ens->add_option("--realizations", ens_args.realizations)->capture_default_str();
  ens->add_option("--mode", ens_args.mode)
      ->check(CLI::IsMember({"analytic", "simulate", "both"}))
      ->capture_default_str();
  ens->add_option("--kind", ens_args.kind, "edge or bulk site")
      ->check(CLI::IsMember({"edge", "bulk"}))
      ->capture_default_str();
  ens->add_option("--bins", ens_args.bins)->capture_default_str();
  ens->add_option("--resonance-tol", ens_args.resonance_tol, "exclude |dh| below this many J")->capture_default_str();
  ens->add_option("--window-min", ens_args.window_min, "frequency comparison uses omega above this many J")
      ->capture_default_str();

  PdfArgs pdf_args;
  auto* pd = app.add_subcommand("pdf", "tabulate an analytic density");
  pd->add_option("--kind", pdf_args.kind)
      ->check(CLI::IsMember({"frequency-bulk", "frequency-edge", "amplitude"}))
      ->capture_default_str();
  pd->add_option("--points", pdf_args.points)->capture_default_str();
  pd->add_option("--xmax", pdf_args.xmax, "upper end of the table; 0 picks a default")->capture_default_str();

  CriticalArgs crit_args;
  auto* cr = app.add_subcommand("critical", "critical probability: leading-order formula against Monte Carlo");
  cr->add_option("--order", crit_args.orders, "even path orders 2n")->delimiter(',')->capture_default_str();
  cr->add_option("--wj", crit_args.wj, "ratios W/J")->delimiter(',')->capture_default_str();
  cr->add_option("--samples", crit_args.samples, "Monte Carlo samples, e.g. 1e7")->capture_default_str();

  auto* eg = app.add_subcommand("eigen", "static entanglement measure of every eigenstate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (sim->parsed()) cmd_simulate(app, common, sim_args);
    if (pre->parsed()) cmd_predict(app, common);
    if (qc->parsed()) return cmd_qctf(app, common, qctf_args);
    if (ens->parsed()) cmd_ensemble(app, common, ens_args);
    if (pd->parsed()) cmd_pdf(app, common, pdf_args);
    if (cr->parsed()) cmd_critical(app, common, crit_args);
    if (eg->parsed()) cmd_eigen(app, common);
    return 0;
  } catch (const NumericContractError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::domain_error& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::length_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
