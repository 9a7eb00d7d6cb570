#include "catsim/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "catsim/errors.hpp"

namespace catsim::io {
namespace {

[[noreturn]] void bad(const std::string& what) { fail(Errc::config, what); }

double number(const json& j, const char* key, std::optional<double> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    bad(std::string("missing field '") + key + "'");
  }
  const json& v = j.at(key);
  if (!v.is_number()) bad(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

cplx complex_field(const json& j, const char* key, std::optional<cplx> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    bad(std::string("missing field '") + key + "'");
  }
  return complex_from_json(j.at(key));
}

std::string csv_label(const std::string& s) {
  std::string out;
  for (char c : s) out += (c == ',' || c == '\n' || c == '"') ? '_' : c;
  return out;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  const auto res = std::to_chars(buf, buf + 16, v, 16);
  std::string s(buf, res.ptr);
  return std::string(16 - s.size(), '0') + s;
}

std::string tool_version() {
#ifdef CATSIM_VERSION
  return CATSIM_VERSION;
#else
  return "0.0.0";
#endif
}

std::string header_comment(const ArtifactHeader& h) {
  return "# tool: catsim " + tool_version() + "\n# command: " + h.command +
         "\n# config_hash: fnv1a64:" + hex64(h.config_hash) + "\n";
}

json header_json(const ArtifactHeader& h) {
  return json{{"tool", "catsim"},
              {"version", tool_version()},
              {"command", h.command},
              {"config_hash", "fnv1a64:" + hex64(h.config_hash)}};
}

cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  if (j.is_object()) return {number(j, "re", 0.0), number(j, "im", 0.0)};
  bad("expected a complex number as {re, im}, [re, im] or a number");
}

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

json matrix_to_json(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) fail(Errc::dimension_mismatch, "matrix_to_json: square matrix expected");
  json entries = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) entries.push_back(complex_to_json(m(r, c)));
  return json{{"dim", m.rows()}, {"entries", std::move(entries)}};
}

ComplexMatrix matrix_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("entries"))
    bad("matrix: expected {dim, entries}");
  if (!j.at("dim").is_number_integer()) bad("matrix: dim must be an integer");
  const auto dim = j.at("dim").get<long long>();
  const json& e = j.at("entries");
  if (dim < 1 || !e.is_array() || static_cast<long long>(e.size()) != dim * dim)
    bad("matrix: entries must hold dim*dim [re, im] pairs");
  ComplexMatrix m(dim, dim);
  for (long long r = 0; r < dim; ++r)
    for (long long c = 0; c < dim; ++c) m(r, c) = complex_from_json(e[static_cast<std::size_t>(r * dim + c)]);
  if (!m.allFinite()) bad("matrix: non-finite entry");
  return m;
}

json vector_to_json(const ComplexVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
  return out;
}

ComplexVector vector_from_json(const json& j) {
  if (!j.is_array() || j.empty()) bad("vector: expected a non-empty array of [re, im]");
  ComplexVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i]);
  if (!v.allFinite()) bad("vector: non-finite entry");
  return v;
}

ParticleModel model_from_json(const json& j) {
  if (!j.is_object()) bad("model: expected an object");
  ParticleModel m;
  if (j.contains("mass")) {
    const cplx mass = complex_from_json(j.at("mass"));
    m.mass = {mass.real(), mass.imag()};
  }
  m.hbar = number(j, "hbar", 1.0);
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    if (g.contains("n_points")) {
      if (!g.at("n_points").is_number_integer()) bad("grid: n_points must be an integer");
      m.grid.n_points = g.at("n_points").get<int>();
    }
    m.grid.x_min = number(g, "x_min", m.grid.x_min);
    m.grid.x_max = number(g, "x_max", m.grid.x_max);
    const std::string b = g.value("boundary", std::string("dirichlet"));
    if (b == "dirichlet") m.grid.boundary = Boundary::Dirichlet;
    else if (b == "periodic") m.grid.boundary = Boundary::Periodic;
    else bad("grid: boundary must be \"dirichlet\" or \"periodic\"");
  }
  if (j.contains("potential")) {
    const json& p = j.at("potential");
    const std::string kind = p.value("kind", std::string("zero"));
    const json params = p.contains("params") ? p.at("params") : json::object();
    if (kind == "zero") {
      m.potential = Potential::zero();
    } else if (kind == "constant") {
      const cplx v = complex_field(params, "value");
      m.potential = Potential::constant(v.real(), v.imag());
    } else if (kind == "harmonic") {
      m.potential = Potential::harmonic(complex_field(params, "k", cplx{1.0, 0.0}),
                                        number(params, "center", 0.0));
    } else if (kind == "quartic") {
      m.potential =
          Potential::quartic(complex_field(params, "a"), complex_field(params, "b", cplx{}));
    } else if (kind == "table") {
      if (!params.contains("rows") || !params.at("rows").is_array())
        bad("potential table: params.rows must be an array of [x, V_R, V_I]");
      std::vector<std::array<double, 3>> rows;
      for (const auto& r : params.at("rows")) {
        if (!r.is_array() || r.size() != 3) bad("potential table: each row is [x, V_R, V_I]");
        rows.push_back({r[0].get<double>(), r[1].get<double>(), r[2].get<double>()});
      }
      m.potential = Potential::table(std::move(rows));
    } else {
      bad("potential: unknown kind '" + kind + "'");
    }
  }
  validate(m);
  return m;
}

PathProfile profile_from_json(const json& j, double default_horizon) {
  if (!j.is_object() || !j.contains("form")) bad("profile: expected {form, params}");
  const std::string form = j.at("form").get<std::string>();
  const std::string label = j.value("label", form);
  const json params = j.contains("params") ? j.at("params") : json::object();
  if (form == "constant")
    return PathProfile::constant(label, number(params, "value"),
                                 number(params, "horizon", default_horizon));
  if (form == "cosine_dip")
    return PathProfile::cosine_dip(label, number(params, "alpha"),
                                   number(params, "t_b", default_horizon));
  if (form == "table") {
    std::vector<double> ts, vs;
    if (params.contains("samples")) {
      for (const auto& s : params.at("samples")) {
        if (!s.is_array() || s.size() != 2) bad("profile table: samples are [t, L_I] pairs");
        ts.push_back(s[0].get<double>());
        vs.push_back(s[1].get<double>());
      }
    } else {
      if (!params.contains("times") || !params.contains("values"))
        bad("profile table: needs samples or times/values");
      ts = params.at("times").get<std::vector<double>>();
      vs = params.at("values").get<std::vector<double>>();
    }
    return PathProfile::tabulated(label, std::move(ts), std::move(vs));
  }
  bad("profile: unknown form '" + form + "'");
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const ArtifactHeader& h) {
  os << header_comment(h);
  const Eigen::Index dim = traj.samples.empty() ? 0 : traj.samples.front().dim();
  os << "time";
  for (Eigen::Index i = 0; i < dim; ++i) os << ",re_" << i << ",im_" << i;
  os << ",norm,log_scale\n";
  for (const auto& s : traj.samples) {
    os << format_double(s.time);
    for (Eigen::Index i = 0; i < dim; ++i)
      os << ',' << format_double(s.amplitudes(i).real()) << ',' << format_double(s.amplitudes(i).imag());
    os << ',' << format_double(s.amplitudes.norm()) << ',' << format_double(s.log_scale) << '\n';
  }
}

void write_series_csv(std::ostream& os, const std::vector<ExpectationSeries>& series,
                      const ArtifactHeader& h) {
  os << header_comment(h);
  os << "time";
  for (const auto& s : series) {
    const std::string name = csv_label(std::string(kind_name(s.kind)) + "_" + s.operator_label);
    os << ",re_" << name << ",im_" << name << ",flag_" << name;
  }
  os << '\n';
  if (series.empty()) return;
  const std::size_t n = series.front().times.size();
  for (const auto& s : series)
    if (s.times.size() != n) fail(Errc::dimension_mismatch, "write_series_csv: series lengths differ");
  for (std::size_t k = 0; k < n; ++k) {
    os << format_double(series.front().times[k]);
    for (const auto& s : series)
      os << ',' << format_double(s.values[k].real()) << ',' << format_double(s.values[k].imag())
         << ',' << (s.flagged[k] ? 1 : 0);
    os << '\n';
  }
}

void write_selection_csv(std::ostream& os, const SelectionReport& rep,
                         const std::vector<PathProfile>& paths, const ArtifactHeader& h) {
  if (paths.size() != rep.labels.size())
    fail(Errc::dimension_mismatch, "write_selection_csv: path count differs from the report");
  os << header_comment(h);
  for (std::size_t i = 0; i < paths.size(); ++i)
    os << "# path " << i + 1 << ": " << csv_label(rep.labels[i]) << '\n';
  os << "time";
  for (std::size_t i = 0; i < paths.size(); ++i) os << ",L_I_" << i + 1;
  for (std::size_t i = 0; i < paths.size(); ++i) os << ",S_I_" << i + 1;
  os << ",fni_winner,fi_winner\n";
  const int fi = rep.fi_winner ? static_cast<int>(*rep.fi_winner) + 1 : 0;
  for (std::size_t k = 0; k < rep.times.size(); ++k) {
    os << format_double(rep.times[k]);
    for (const auto& p : paths) os << ',' << format_double(p.l_i(rep.times[k]));
    for (const auto& s : rep.s_i) os << ',' << format_double(s[k]);
    os << ',' << (rep.fni_winner[k] ? static_cast<int>(*rep.fni_winner[k]) + 1 : 0) << ',' << fi
       << '\n';
  }
}

json identity_report_json(const IdentityResidual& r, std::optional<double> order_estimate,
                          std::optional<LinearFit> fit) {
  json out{{"identity_name", r.identity_name},
           {"max_residual", r.max_residual},
           {"tolerance", r.tolerance_used},
           {"passed", r.passed()},
           {"skipped", r.skipped}};
  out["convergence_order_estimate"] = order_estimate ? json(*order_estimate) : json(nullptr);
  out["fit"] = fit ? json{{"rate", fit->rate}, {"r_squared", fit->r_squared}} : json(nullptr);
  return out;
}

json selection_summary_json(const SelectionReport& rep, const ArtifactHeader& h) {
  const auto tc = rep.first_crossing(CrossingKind::LagrangianCross);
  const auto td = rep.first_crossing(CrossingKind::ActionBalance);
  json crossings = json::array();
  for (const auto& c : rep.crossings)
    crossings.push_back({{"time", c.time},
                         {"kind", c.kind == CrossingKind::LagrangianCross ? "lagrangian" : "action"},
                         {"paths", json::array({c.first + 1, c.second + 1})}});
  return json{{"header", header_json(h)},
              {"t_c", tc ? json(*tc) : json(nullptr)},
              {"t_d", td ? json(*td) : json(nullptr)},
              {"contradiction", rep.contradiction},
              {"fi_winner", rep.fi_winner ? json(rep.labels[*rep.fi_winner]) : json(nullptr)},
              {"labels", rep.labels},
              {"crossings", std::move(crossings)},
              {"unresolved_ties", rep.unresolved_ties.size()}};
}

std::string selection_gnuplot(const SelectionReport& rep, const std::vector<PathProfile>& paths,
                              const std::string& csv_name, const ArtifactHeader& h) {
  std::ostringstream os;
  os << header_comment(h);
  os << "set datafile separator ','\n"
     << "set datafile commentschars '#'\n"
     << "set key top right\n"
     << "set xlabel 't'\n"
     << "set terminal pngcairo size 900,1200\n"
     << "set output 'paths.png'\n"
     << "set multiplot layout 3,1\n";
  const std::size_t np = paths.size();
  const auto tc = rep.first_crossing(CrossingKind::LagrangianCross);
  const auto td = rep.first_crossing(CrossingKind::ActionBalance);
  auto columns = [&](std::size_t offset, const char* what) {
    std::string s = "plot ";
    for (std::size_t i = 0; i < np; ++i) {
      if (i) s += ", ";
      s += "'" + csv_name + "' every ::1 using 1:" + std::to_string(2 + offset + i) +
           " with lines title '" + what + " " + csv_label(rep.labels[i]) + "'";
    }
    return s + "\n";
  };
  os << "set title 'L_I'\nset ylabel 'L_I'\n" << columns(0, "L_I");
  if (tc) os << "set arrow 1 from " << format_double(*tc) << ", graph 0 to " << format_double(*tc)
             << ", graph 1 nohead dt 2\n";
  os << "set title 'L_I with t_c'\n" << columns(0, "L_I");
  if (td) os << "set arrow 2 from " << format_double(*td) << ", graph 0 to " << format_double(*td)
             << ", graph 1 nohead dt 3\n";
  os << "set title 'S_I([T_A, t])'\nset ylabel 'S_I'\n" << columns(np, "S_I");
  os << "unset multiplot\n";
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(Errc::config, "cannot write " + path.string());
  f << contents;
  if (!f) fail(Errc::config, "write failed for " + path.string());
}

}  // namespace catsim::io
