#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "catsim/errors.hpp"
#include "catsim/evolution.hpp"
#include "catsim/io.hpp"
#include "catsim/model.hpp"
#include "catsim/observables.hpp"
#include "catsim/parallel.hpp"
#include "catsim/pathsel.hpp"
#include "catsim/spectral.hpp"

namespace catsim::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

/// Failure carrying a CLI-level error code (exit status 1).
struct ConfigError {
  std::string code;
  std::string message;
};

[[noreturn]] void config_error(std::string code, std::string message) {
  throw ConfigError{std::move(code), std::move(message)};
}

double num(const json& j, const char* key, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  if (!j.at(key).is_number()) config_error("config.invalid", std::string("'") + key + "' must be a number");
  return j.at(key).get<double>();
}

long long integer(const json& j, const char* key, long long fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer())
    config_error("config.invalid", std::string("'") + key + "' must be an integer");
  return j.at(key).get<long long>();
}

bool flag(const json& j, const char* key, bool fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) config_error("config.invalid", std::string("'") + key + "' must be a boolean");
  return j.at(key).get<bool>();
}

std::string text(const json& j, const char* key, const std::string& fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  if (!j.at(key).is_string()) config_error("config.invalid", std::string("'") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  if (!j.contains(key)) return empty;
  if (!j.at(key).is_object()) config_error("config.invalid", std::string("'") + key + "' must be an object");
  return j.at(key);
}

struct Tolerances {
  double identity = 1e-6;
  double local_error = 1e-6;
  double denominator_floor = 1e-12;
  double eigen_residual = 1e-10;
  double cond_ceiling = 1e12;
  double gap = 1e-6;
};

struct RunConfig {
  std::string command;
  fs::path out = "catsim-out";
  std::uint64_t seed = 1;
  double hbar = 1.0;
  int jobs = 1;
  double t_a = 0.0;
  double t_b = 1.0;
  std::optional<double> step;
  Stepper stepper = Stepper::EigenbasisExact;
  Tolerances tol;
  json raw;
};

RunConfig parse(const json& j) {
  if (!j.is_object()) config_error("config.invalid", "configuration must be a JSON object");
  RunConfig c;
  c.raw = j;
  c.command = text(j, "command", "");
  if (c.command.empty()) config_error("config.missing_command", "no command given");
  static const std::vector<std::string> known{"evolve", "identities", "correspondence", "maximize",
                                              "paths"};
  if (std::find(known.begin(), known.end(), c.command) == known.end())
    config_error("config.unknown_command", "unknown command '" + c.command + "'");
  c.out = text(j, "out", "catsim-out");
  if (j.contains("seed")) {
    const json& v = j.at("seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      config_error("config.invalid", "'seed' must be a non-negative integer");
    c.seed = v.get<std::uint64_t>();
  }
  double model_hbar = 1.0;
  if (j.contains("hamiltonian") && j.at("hamiltonian").is_object() &&
      j.at("hamiltonian").contains("model"))
    model_hbar = num(j.at("hamiltonian").at("model"), "hbar", 1.0);
  c.hbar = num(j, "hbar", model_hbar);
  if (!(c.hbar > 0.0)) config_error("config.invalid", "'hbar' must be positive");
  c.jobs = static_cast<int>(integer(j, "jobs", 1));
  if (c.jobs < 1) config_error("config.invalid", "'jobs' must be at least 1");
  c.t_a = num(j, "t_a", 0.0);
  c.t_b = num(j, "t_b", 1.0);
  if (!(c.t_b > c.t_a)) config_error("config.invalid", "requires t_b > t_a");
  if (j.contains("step")) {
    c.step = num(j, "step", 0.0);
    if (!(*c.step > 0.0)) config_error("config.invalid", "'step' must be positive");
  }
  const std::string stepper = text(j, "stepper", "exact");
  if (stepper == "exact") c.stepper = Stepper::EigenbasisExact;
  else if (stepper == "rk4") c.stepper = Stepper::RK4;
  else config_error("config.invalid", "'stepper' must be \"exact\" or \"rk4\"");
  const json& t = section(j, "tolerances");
  c.tol.identity = num(t, "identity", c.tol.identity);
  c.tol.local_error = num(t, "local_error", c.tol.local_error);
  c.tol.denominator_floor = num(t, "denominator_floor", c.tol.denominator_floor);
  c.tol.eigen_residual = num(t, "eigen_residual", c.tol.eigen_residual);
  c.tol.cond_ceiling = num(t, "cond_ceiling", c.tol.cond_ceiling);
  c.tol.gap = num(t, "gap", c.tol.gap);
  return c;
}

EigenOptions eigen_options(const RunConfig& c) {
  return {c.tol.eigen_residual, c.tol.cond_ceiling};
}

PropagationOptions propagation(const RunConfig& c, double step) {
  PropagationOptions o;
  o.method = c.stepper;
  o.step = step;
  o.hbar = c.hbar;
  o.local_error_tol = c.tol.local_error;
  o.eigen = eigen_options(c);
  return o;
}

struct System {
  ComplexMatrix h;
  std::optional<ParticleModel> model;
};

System load_system(const RunConfig& c) {
  if (!c.raw.contains("hamiltonian")) config_error("config.missing_hamiltonian", "no 'hamiltonian' given");
  const json& s = c.raw.at("hamiltonian");
  System sys;
  if (!s.is_object()) config_error("config.invalid", "'hamiltonian' must be an object");
  if (s.contains("dim")) {
    sys.h = io::matrix_from_json(s);
  } else if (s.contains("matrix")) {
    sys.h = io::matrix_from_json(s.at("matrix"));
  } else if (s.contains("model")) {
    ParticleModel m = io::model_from_json(s.at("model"));
    m.hbar = c.hbar;
    sys.h = build_particle_hamiltonian(m);
    sys.model = std::move(m);
  } else if (s.contains("two_level")) {
    const json& e = s.at("two_level");
    if (!e.is_array() || e.size() != 4) config_error("config.invalid", "'two_level' takes [a, b, c, d]");
    sys.h = build_two_level(io::complex_from_json(e[0]), io::complex_from_json(e[1]),
                            io::complex_from_json(e[2]), io::complex_from_json(e[3]));
  } else if (s.contains("diagonal")) {
    const ComplexVector d = io::vector_from_json(s.at("diagonal"));
    sys.h = d.asDiagonal();
  } else if (s.contains("random")) {
    const json& r = s.at("random");
    RandomMatrixOptions o;
    o.spread = num(r, "spread", 1.0);
    o.eigen = eigen_options(c);
    sys.h = random_nonnormal(static_cast<int>(integer(r, "dim", 6)),
                             static_cast<std::uint64_t>(integer(r, "seed", static_cast<long long>(c.seed))), o);
  } else if (s.contains("random_hermitian")) {
    const json& r = s.at("random_hermitian");
    sys.h = random_hermitian(static_cast<int>(integer(r, "dim", 6)),
                             static_cast<std::uint64_t>(integer(r, "seed", static_cast<long long>(c.seed))));
  } else {
    config_error("config.invalid",
                 "'hamiltonian' needs one of dim/entries, matrix, model, two_level, diagonal, "
                 "random, random_hermitian");
  }
  if (sys.h.rows() < 1 || sys.h.rows() > 512) config_error("config.invalid", "dimension must be in [1, 512]");
  return sys;
}

ComplexMatrix load_operator(const RunConfig& c, const System& sys) {
  const Eigen::Index dim = sys.h.rows();
  auto need_model = [&](const std::string& name) -> const ParticleModel& {
    if (!sys.model) config_error("config.invalid", "operator '" + name + "' needs a particle model");
    return *sys.model;
  };
  ComplexMatrix o;
  if (!c.raw.contains("operator")) {
    o = sys.model ? build_position_operator(sys.model->grid)
                  : random_hermitian(static_cast<int>(dim), c.seed + 2);
  } else {
    const json& s = c.raw.at("operator");
    if (s.is_string()) {
      const std::string name = s.get<std::string>();
      if (name == "position") o = build_position_operator(need_model(name).grid);
      else if (name == "momentum") o = build_momentum_operator(need_model(name).grid, c.hbar);
      else if (name == "identity") o = ComplexMatrix::Identity(dim, dim);
      else config_error("config.invalid", "unknown operator '" + name + "'");
    } else if (s.is_object() && s.contains("dim")) {
      o = io::matrix_from_json(s);
    } else if (s.is_object() && s.contains("diagonal")) {
      o = io::vector_from_json(s.at("diagonal")).asDiagonal();
    } else if (s.is_object() && s.contains("random_hermitian")) {
      o = random_hermitian(static_cast<int>(dim),
                           static_cast<std::uint64_t>(integer(s.at("random_hermitian"), "seed",
                                                              static_cast<long long>(c.seed + 2))));
    } else {
      config_error("config.invalid", "'operator' must be a name, a matrix, diagonal or random_hermitian");
    }
  }
  if (o.rows() != dim) config_error("config.invalid", "operator dimension differs from the Hamiltonian");
  return o;
}

ComplexVector load_state(const RunConfig& c, const System& sys, const char* key,
                         std::uint64_t default_seed, double default_center) {
  const int dim = static_cast<int>(sys.h.rows());
  ComplexVector v;
  if (!c.raw.contains(key)) {
    v = sys.model ? gaussian_packet(sys.model->grid, default_center, 0.5, 1.0, c.hbar)
                  : random_state(dim, default_seed);
  } else {
    const json& s = c.raw.at(key);
    if (s.is_array()) {
      v = io::vector_from_json(s);
    } else if (s.is_object() && s.contains("random")) {
      v = random_state(dim, static_cast<std::uint64_t>(
                                integer(s.at("random"), "seed", static_cast<long long>(default_seed))));
    } else if (s.is_object() && s.contains("basis")) {
      const long long k = integer(s, "basis", 0);
      if (k < 0 || k >= dim) config_error("config.invalid", std::string("'") + key + "': basis index out of range");
      v = ComplexVector::Zero(dim);
      v(k) = 1.0;
    } else if (s.is_object() && (s.contains("packet") || s.contains("momentum_packet"))) {
      if (!sys.model) config_error("config.invalid", std::string("'") + key + "': packets need a particle model");
      if (s.contains("packet")) {
        const json& p = s.at("packet");
        v = gaussian_packet(sys.model->grid, num(p, "center", 0.0), num(p, "momentum", 0.0),
                            num(p, "sigma", 1.0), c.hbar);
      } else {
        const json& p = s.at("momentum_packet");
        v = momentum_packet(sys.model->grid, num(p, "center", 0.0), num(p, "momentum", 0.0),
                            num(p, "sigma_p", 0.5), c.hbar);
      }
    } else {
      config_error("config.invalid", std::string("'") + key +
                                         "' must be [[re, im], ...], random, basis, packet or momentum_packet");
    }
  }
  if (v.size() != dim) config_error("config.invalid", std::string("'") + key + "' has the wrong dimension");
  if (!(v.norm() > 0.0)) config_error("config.invalid", std::string("'") + key + "' is the zero vector");
  return v;
}

struct Context {
  RunConfig cfg;
  io::ArtifactHeader header;
  std::ostream* out;
};

void write_text(const Context& ctx, const std::string& name, const std::string& body) {
  io::write_file(ctx.cfg.out / name, body);
  *ctx.out << "wrote " << (ctx.cfg.out / name).string() << '\n';
}

void write_json(const Context& ctx, const std::string& name, json body) {
  json doc = json::object();
  doc["header"] = io::header_json(ctx.header);
  for (auto& [k, v] : body.items()) doc[k] = v;
  write_text(ctx, name, doc.dump(2) + "\n");
}

// --- evolve --------------------------------------------------------------

int cmd_evolve(const Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const System sys = load_system(c);
  const double step = c.step.value_or((c.t_b - c.t_a) / 100.0);
  const auto grid = uniform_grid(c.t_a, c.t_b, step);
  const PropagationOptions prop = propagation(c, step);
  const ComplexVector a0 = load_state(c, sys, "a0", c.seed, -1.0);
  const ComplexVector bf = load_state(c, sys, "b_final", c.seed + 1, 0.5);
  const ComplexMatrix o = load_operator(c, sys);

  const Trajectory a = sample_A(sys.h, make_state(a0, StateLabel::A, c.t_a), grid, prop);
  const Trajectory b = sample_B(sys.h, make_state(bf, StateLabel::B, c.t_b), grid, prop);
  {
    std::ostringstream os;
    io::write_trajectory_csv(os, a, ctx.header);
    write_text(ctx, "trajectory_A.csv", os.str());
  }
  {
    std::ostringstream os;
    io::write_trajectory_csv(os, b, ctx.header);
    write_text(ctx, "trajectory_B.csv", os.str());
  }
  ExpectationOptions eo;
  eo.denominator_floor = c.tol.denominator_floor;
  const auto ba = expect_BA(o, a, b, "O", eo);
  const auto aa = expect_AA(o, a, "O");
  {
    std::ostringstream os;
    io::write_series_csv(os, {ba, aa}, ctx.header);
    write_text(ctx, "series.csv", os.str());
  }
  json summary{{"dim", sys.h.rows()},
               {"stepper", c.stepper == Stepper::RK4 ? "rk4" : "exact"},
               {"samples", grid.size()},
               {"flagged_ba_samples", std::count(ba.flagged.begin(), ba.flagged.end(), true)}};
  if (flag(c.raw, "normalized", false)) {
    NormalizedOptions no;
    no.hbar = c.hbar;
    no.local_error_tol = c.tol.local_error;
    no.record_every = static_cast<int>(integer(c.raw, "record_every", 1));
    const Trajectory an = propagate_A_normalized(
        sys.h, make_state(a0 / a0.norm(), StateLabel::ANormalized, c.t_a), c.t_b,
        num(c.raw, "normalized_step", std::min(step, 1e-3)), no);
    std::ostringstream os;
    io::write_trajectory_csv(os, an, ctx.header);
    write_text(ctx, "trajectory_AN.csv", os.str());
    double drift = 0.0;
    for (const auto& s : an.samples) drift = std::max(drift, std::abs(s.amplitudes.norm() - 1.0));
    summary["normalized_norm_drift"] = drift;
    summary["normalized_fidelity_with_exact"] =
        fidelity(an.samples.back().amplitudes, a.samples.back().amplitudes);
  }
  write_json(ctx, "evolve.json", std::move(summary));
  return 0;
}

// --- identities ------------------------------------------------------------

struct IdentityRun {
  std::vector<IdentityResidual> residuals;
  double f_form_gap = 0.0;
  std::vector<ExpectationSeries> series;
};

IdentityRun identity_run(const RunConfig& c, const System& sys, const ComplexMatrix& o,
                         const ComplexVector& a0, const ComplexVector& bf, double step) {
  const auto grid = uniform_grid(c.t_a, c.t_b, step);
  const PropagationOptions prop = propagation(c, step);
  const Trajectory a = sample_A(sys.h, make_state(a0, StateLabel::A, c.t_a), grid, prop);
  const Trajectory b = sample_B(sys.h, make_state(bf, StateLabel::B, c.t_b), grid, prop);
  IdentityRun run;
  run.residuals.push_back(heisenberg_residual_BA(o, sys.h, a, b, c.hbar, c.tol.identity));
  const AaIdentityResult aa = aa_identity_residual(o, sys.h, a, c.hbar, c.tol.identity);
  run.residuals.push_back(aa.identity);
  run.f_form_gap = aa.f_form_gap;
  if (sys.model) {
    const EhrenfestResult e = ehrenfest_residual_BA(*sys.model, a, b, c.tol.identity);
    run.residuals.push_back(e.position);
    run.residuals.push_back(e.momentum);
  }
  ExpectationOptions eo;
  eo.denominator_floor = c.tol.denominator_floor;
  run.series = {expect_BA(o, a, b, "O", eo), expect_AA(o, a, "O")};
  return run;
}

int cmd_identities(const Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const System sys = load_system(c);
  const ComplexMatrix o = load_operator(c, sys);
  const ComplexVector a0 = load_state(c, sys, "a0", c.seed, -1.0);
  const ComplexVector bf = load_state(c, sys, "b_final", c.seed + 1, 0.5);

  double step;
  if (c.step) {
    step = *c.step;
  } else {
    // Keep step * spectral radius small enough for the declared tolerance.
    const SpectralData sd = eigendecompose(sys.h, eigen_options(c));
    const double rho = std::max(1e-12, sd.eigenvalues.cwiseAbs().maxCoeff() / c.hbar);
    step = std::min((c.t_b - c.t_a) / 16.0, 0.01 / rho);
  }
  std::vector<IdentityRun> runs(2);
  parallel_for(c.jobs, 2, [&](std::size_t i) {
    runs[i] = identity_run(c, sys, o, a0, bf, i == 0 ? step : step / 2.0);
  });

  json reports = json::array();
  bool all = true;
  for (std::size_t i = 0; i < runs[0].residuals.size(); ++i) {
    const IdentityResidual& r = runs[0].residuals[i];
    const double fine = runs[1].residuals[i].max_residual;
    std::optional<double> order;
    // Below this level both runs sit on the roundoff floor and the ratio is noise.
    if (r.max_residual > 1e-10 && fine > 0.0) order = std::log2(r.max_residual / fine);
    reports.push_back(io::identity_report_json(r, order, std::nullopt));
    all = all && r.passed();
  }
  {
    std::ostringstream os;
    io::write_series_csv(os, runs[0].series, ctx.header);
    write_text(ctx, "series.csv", os.str());
  }
  write_json(ctx, "identities.json",
             json{{"step", step},
                  {"reports", std::move(reports)},
                  {"f_form_gap", runs[0].f_form_gap},
                  {"all_passed", all}});
  return 0;
}

// --- correspondence --------------------------------------------------------

int cmd_correspondence(const Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const System sys = load_system(c);
  const ComplexMatrix o = load_operator(c, sys);
  const ComplexVector a0 = load_state(c, sys, "a0", c.seed, -1.0);
  const ComplexVector bf = load_state(c, sys, "b_final", c.seed + 1, 0.5);
  const json& s = section(c.raw, "correspondence");
  const double span = c.t_b - c.t_a;
  const double t_min = num(s, "t_min", c.t_a + 0.6 * span);
  const double t_max = num(s, "t_max", c.t_b - 0.15 * span);
  if (!(t_max > t_min) || t_min < c.t_a || t_max > c.t_b)
    config_error("config.invalid", "correspondence window must satisfy t_a <= t_min < t_max <= t_b");
  const double step = c.step.value_or((t_max - t_min) / 40.0);
  SpectralData sd = eigendecompose(sys.h, eigen_options(c));
  const ComplexMatrix q = construct_q(sd);
  CorrespondenceOptions opts;
  opts.hbar = c.hbar;
  opts.gap_threshold = c.tol.gap;
  opts.allow_degenerate = flag(s, "allow_degenerate", false);
  opts.propagation = propagation(c, step);
  const CorrespondenceReport rep =
      correspondence_experiment(sys.h, q, o, a0, bf, c.t_a, c.t_b, uniform_grid(t_min, t_max, step), opts);

  std::ostringstream os;
  os << io::header_comment(ctx.header);
  os << "time,re_BA,im_BA,re_QAA,im_QAA,delta\n";
  for (std::size_t k = 0; k < rep.times.size(); ++k)
    os << io::format_double(rep.times[k]) << ',' << io::format_double(rep.ba[k].real()) << ','
       << io::format_double(rep.ba[k].imag()) << ',' << io::format_double(rep.q_aa[k].real()) << ','
       << io::format_double(rep.q_aa[k].imag()) << ',' << io::format_double(rep.delta[k]) << '\n';
  write_text(ctx, "correspondence.csv", os.str());
  write_json(ctx, "correspondence.json",
             json{{"identity_name", "correspondence_BA_vs_QAA"},
                  {"max_residual", rep.max_delta},
                  {"convergence_order_estimate", nullptr},
                  {"fit", {{"rate", rep.fit.rate}, {"r_squared", rep.fit.r_squared}}},
                  {"expected_rate", rep.expected_rate},
                  {"imaginary_gap", std::isfinite(rep.imaginary_gap) ? json(rep.imaginary_gap) : json(nullptr)},
                  {"degenerate", rep.degenerate},
                  {"decay_detected", rep.decay_detected}});
  return 0;
}

// --- maximize ----------------------------------------------------------------

int cmd_maximize(const Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const System sys = load_system(c);
  const json& s = section(c.raw, "maximize");
  MaximizeOptions opts;
  opts.hbar = c.hbar;
  opts.seed = c.seed;
  opts.jobs = c.jobs;
  opts.restarts = static_cast<int>(integer(s, "restarts", opts.restarts));
  opts.degeneracy_threshold = num(s, "degeneracy_threshold", opts.degeneracy_threshold);
  opts.max_iterations = static_cast<int>(integer(s, "max_iterations", opts.max_iterations));
  opts.eigen = eigen_options(c);
  const MaximizationResult r = maximize_transition(sys.h, c.t_a, c.t_b, opts);

  // Reality check of a Q-Hermitian operator along the selected pair.
  const ComplexMatrix k = load_operator(c, sys);
  const ComplexMatrix o = q_hermitian_from(r.q, 0.5 * (k + k.adjoint()));
  const double step = c.step.value_or((c.t_b - c.t_a) / 100.0);
  const auto grid = uniform_grid(c.t_a, c.t_b, step);
  const PropagationOptions prop = propagation(c, step);
  const Trajectory a = sample_A(sys.h, make_state(r.a0, StateLabel::A, c.t_a), grid, prop);
  const Trajectory b = sample_B_q(sys.h, r.q, make_state(r.b_final, StateLabel::B, c.t_b), grid, prop);
  ExpectationOptions eo;
  eo.denominator_floor = c.tol.denominator_floor;
  const auto qba = expect_QBA(o, r.q, a, b, "O_Q", eo);
  double worst = 0.0;
  for (const auto& v : qba.values)
    worst = std::max(worst, std::abs(v.imag()) / (std::abs(v.real()) + 1e-300));
  {
    std::ostringstream os;
    io::write_series_csv(os, {qba}, ctx.header);
    write_text(ctx, "maximize_series.csv", os.str());
  }
  {
    std::ostringstream os;
    os << io::header_comment(ctx.header) << "index,re_a0,im_a0,re_b_final,im_b_final\n";
    for (Eigen::Index i = 0; i < r.a0.size(); ++i)
      os << i << ',' << io::format_double(r.a0(i).real()) << ',' << io::format_double(r.a0(i).imag())
         << ',' << io::format_double(r.b_final(i).real()) << ','
         << io::format_double(r.b_final(i).imag()) << '\n';
    write_text(ctx, "maximize_states.csv", os.str());
  }
  json top = json::array();
  for (auto i : r.top_subspace) top.push_back(i);
  write_json(ctx, "maximize.json",
             json{{"eigenvalue", io::complex_to_json(r.eigenvalue)},
                  {"degenerate", r.degenerate},
                  {"top_subspace", std::move(top)},
                  {"log_amplitude", r.log_amplitude},
                  {"log_amplitude_measured", r.log_amplitude_measured},
                  {"ascent_log_amplitude", r.ascent_log_amplitude},
                  {"ascent_fidelity", r.ascent_fidelity},
                  {"ascent_iterations", r.ascent_iterations},
                  {"max_imag_to_real_ratio", worst},
                  {"a0", io::vector_to_json(r.a0)},
                  {"b_final", io::vector_to_json(r.b_final)}});
  return 0;
}

// --- paths -------------------------------------------------------------------

int cmd_paths(const Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const json& s = section(c.raw, "paths");
  const double t_b = num(s, "t_b", std::numbers::pi);
  std::vector<PathProfile> paths;
  json closed = json::object();
  if (s.contains("profiles")) {
    if (!s.at("profiles").is_array() || s.at("profiles").empty())
      config_error("config.invalid", "'paths.profiles' must be a non-empty array");
    for (const auto& p : s.at("profiles")) paths.push_back(io::profile_from_json(p, t_b));
  } else {
    const std::string example = text(s, "example", "");
    const double alpha = num(s, "alpha", 2.0), beta = num(s, "beta", 1.0);
    if (example == "first") {
      paths.push_back(PathProfile::constant("path 1", 0.0, t_b));
      paths.push_back(PathProfile::constant("path 2", -beta, t_b));
    } else if (example == "second") {
      paths.push_back(PathProfile::cosine_dip("path 1", alpha, t_b));
      paths.push_back(PathProfile::constant("path 2", -beta, t_b));
      closed = json{{"t_c", crossing_time_tc(alpha, beta, t_b)},
                    {"t_d", balance_time_td(alpha, beta, t_b)}};
    } else {
      config_error("config.invalid", "'paths' needs profiles or example \"first\"/\"second\"");
    }
  }
  TimelineOptions to;
  to.grid_points = static_cast<int>(integer(s, "grid_points", 2048));
  const SelectionReport rep = preference_timeline(paths, t_b, to);
  {
    std::ostringstream os;
    io::write_selection_csv(os, rep, paths, ctx.header);
    write_text(ctx, "selection.csv", os.str());
  }
  json summary = io::selection_summary_json(rep, ctx.header);
  summary.erase("header");
  if (!closed.empty()) summary["closed_form"] = closed;
  summary["log_weight_at_t_b"] = json::array();
  for (const auto& p : paths) summary["log_weight_at_t_b"].push_back(path_weight(p, t_b, c.hbar));
  write_json(ctx, "summary.json", std::move(summary));
  write_text(ctx, "paths.gp", io::selection_gnuplot(rep, paths, "selection.csv", ctx.header));
  return 0;
}

void emit_error(std::ostream& err, const std::string& code, const std::string& message) {
  err << json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

std::uint64_t config_hash(const json& config) {
  json canon = config;
  if (canon.is_object()) {
    canon.erase("out");
    canon.erase("jobs");
  }
  return io::fnv1a(canon.dump());
}

int run(const json& config, std::ostream& out, std::ostream& err) {
  try {
    Context ctx{parse(config), {}, &out};
    ctx.header.command = ctx.cfg.command;
    ctx.header.config_hash = config_hash(config);
    std::error_code ec;
    fs::create_directories(ctx.cfg.out, ec);
    if (ec || !fs::is_directory(ctx.cfg.out))
      config_error("config.output_unwritable", "cannot create output directory " + ctx.cfg.out.string());
    const std::string& cmd = ctx.cfg.command;
    if (cmd == "evolve") return cmd_evolve(ctx);
    if (cmd == "identities") return cmd_identities(ctx);
    if (cmd == "correspondence") return cmd_correspondence(ctx);
    if (cmd == "maximize") return cmd_maximize(ctx);
    return cmd_paths(ctx);
  } catch (const ConfigError& e) {
    emit_error(err, e.code, e.message);
    return 1;
  } catch (const Error& e) {
    emit_error(err, std::string(errc_name(e.code())), e.what());
    return is_numerical(e.code()) ? 2 : 1;
  } catch (const json::exception& e) {
    emit_error(err, "config.invalid", e.what());
    return 1;
  }
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulator for non-Hermitian time evolution and imaginary-action path selection"};
  app.set_version_flag("--version", io::tool_version());
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  double hbar = 0.0;
  int jobs = 0;
  auto* o_config = app.add_option("--config", config_path, "JSON configuration file");
  auto* o_out = app.add_option("--out", out_dir, "Output directory");
  auto* o_seed = app.add_option("--seed", seed, "Random seed");
  auto* o_hbar = app.add_option("--hbar", hbar, "Reduced Planck constant");
  auto* o_jobs = app.add_option("--jobs", jobs, "Worker threads for parallel sweeps");

  struct Common {
    double t_a = 0, t_b = 0, step = 0;
    std::string stepper;
    CLI::Option *o_ta = nullptr, *o_tb = nullptr, *o_step = nullptr, *o_stepper = nullptr;
  };
  std::map<std::string, Common> common;
  std::map<std::string, CLI::App*> subs;
  const std::vector<std::pair<std::string, std::string>> names{
      {"evolve", "Propagate A (and B) and export trajectories"},
      {"identities", "Residuals of the exact time-development identities"},
      {"correspondence", "Decay of <O>^BA - <O>_Q^AA toward the final time"},
      {"maximize", "Boundary states maximizing the Q-transition amplitude"},
      {"paths", "Imaginary-action path-selection timeline"}};
  for (const auto& [name, desc] : names) {
    CLI::App* sub = app.add_subcommand(name, desc);
    subs[name] = sub;
    Common& cm = common[name];
    if (name != "paths") {
      cm.o_ta = sub->add_option("--t-a", cm.t_a, "Initial time T_A");
      cm.o_tb = sub->add_option("--t-b", cm.t_b, "Final time T_B");
      cm.o_step = sub->add_option("--step", cm.step, "Sampling / integration step");
      cm.o_stepper = sub->add_option("--stepper", cm.stepper, "exact or rk4")
                         ->check(CLI::IsMember({"exact", "rk4"}));
    }
  }
  bool normalized = false;
  auto* o_norm = subs["evolve"]->add_flag("--normalized", normalized, "Also integrate the normalized flow");
  double tolerance = 0;
  auto* o_tol = subs["identities"]->add_option("--tolerance", tolerance, "Residual tolerance");
  double t_min = 0, t_max = 0;
  auto* o_tmin = subs["correspondence"]->add_option("--t-min", t_min, "Start of the fit window");
  auto* o_tmax = subs["correspondence"]->add_option("--t-max", t_max, "End of the fit window");
  bool allow_deg = false;
  auto* o_deg = subs["correspondence"]->add_flag("--allow-degenerate", allow_deg, "Run even without an imaginary gap");
  int restarts = 0;
  auto* o_restarts = subs["maximize"]->add_option("--restarts", restarts, "Gradient-ascent restarts");
  std::string example;
  double alpha = 0, beta = 0, tb = 0;
  int grid_points = 0;
  CLI::App* ps = subs["paths"];
  auto* o_example = ps->add_option("--example", example, "first or second")
                        ->check(CLI::IsMember({"first", "second"}));
  auto* o_alpha = ps->add_option("--alpha", alpha, "Cosine-dip depth");
  auto* o_beta = ps->add_option("--beta", beta, "Constant profile level (-beta)");
  auto* o_tbp = ps->add_option("--tb", tb, "Final time T_B");
  auto* o_grid = ps->add_option("--grid-points", grid_points, "Timeline grid size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    emit_error(err, "config.cli", e.what());
    return 1;
  }

  json cfg = json::object();
  if (o_config->count()) {
    std::ifstream f(config_path, std::ios::binary);
    if (!f) {
      emit_error(err, "config.unreadable", "cannot read " + config_path);
      return 1;
    }
    try {
      cfg = json::parse(f);
    } catch (const json::exception& e) {
      emit_error(err, "config.parse", e.what());
      return 1;
    }
    if (!cfg.is_object()) {
      emit_error(err, "config.invalid", "configuration must be a JSON object");
      return 1;
    }
  }
  if (o_out->count()) cfg["out"] = out_dir;
  if (o_seed->count()) cfg["seed"] = seed;
  if (o_hbar->count()) cfg["hbar"] = hbar;
  if (o_jobs->count()) cfg["jobs"] = jobs;
  for (const auto& [name, sub] : subs) {
    if (!sub->parsed()) continue;
    cfg["command"] = name;
    const Common& cm = common[name];
    if (cm.o_ta && cm.o_ta->count()) cfg["t_a"] = cm.t_a;
    if (cm.o_tb && cm.o_tb->count()) cfg["t_b"] = cm.t_b;
    if (cm.o_step && cm.o_step->count()) cfg["step"] = cm.step;
    if (cm.o_stepper && cm.o_stepper->count()) cfg["stepper"] = cm.stepper;
  }
  if (o_norm->count()) cfg["normalized"] = normalized;
  if (o_tol->count()) cfg["tolerances"]["identity"] = tolerance;
  if (o_tmin->count()) cfg["correspondence"]["t_min"] = t_min;
  if (o_tmax->count()) cfg["correspondence"]["t_max"] = t_max;
  if (o_deg->count()) cfg["correspondence"]["allow_degenerate"] = allow_deg;
  if (o_restarts->count()) cfg["maximize"]["restarts"] = restarts;
  if (o_example->count()) cfg["paths"]["example"] = example;
  if (o_alpha->count()) cfg["paths"]["alpha"] = alpha;
  if (o_beta->count()) cfg["paths"]["beta"] = beta;
  if (o_tbp->count()) cfg["paths"]["t_b"] = tb;
  if (o_grid->count()) cfg["paths"]["grid_points"] = grid_points;
  return run(cfg, out, err);
}

}  // namespace catsim::cli
