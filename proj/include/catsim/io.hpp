#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "catsim/evolution.hpp"
#include "catsim/model.hpp"
#include "catsim/observables.hpp"
#include "catsim/pathsel.hpp"

namespace catsim::io {

using json = nlohmann::json;

/// Shortest decimal that round-trips; '.' separator regardless of locale.
std::string format_double(double x);

std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Provenance block written at the top of every artifact.
struct ArtifactHeader {
  std::string command;
  std::uint64_t config_hash = 0;
};

std::string tool_version();
/// "# ..." lines for CSV and gnuplot files.
std::string header_comment(const ArtifactHeader& h);
json header_json(const ArtifactHeader& h);

/// Accepts {re, im}, [re, im] or a plain number.
cplx complex_from_json(const json& j);
json complex_to_json(cplx z);

/// {dim, entries: [[re, im], ...]} with row-major entries.
json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const json& j);
/// [[re, im], ...]
json vector_to_json(const ComplexVector& v);
ComplexVector vector_from_json(const json& j);

/// {mass: {re, im}, potential: {kind, params}, grid: {...}, hbar}
ParticleModel model_from_json(const json& j);
/// {label, form, params}; `default_horizon` is used when a constant profile
/// does not give its own.
PathProfile profile_from_json(const json& j, double default_horizon);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const ArtifactHeader& h);
void write_series_csv(std::ostream& os, const std::vector<ExpectationSeries>& series,
                      const ArtifactHeader& h);
/// time, L_I and S_I per path, future-not-included winner (1-based, 0 when
/// unresolved), future-included winner.
void write_selection_csv(std::ostream& os, const SelectionReport& rep,
                         const std::vector<PathProfile>& paths, const ArtifactHeader& h);

json identity_report_json(const IdentityResidual& r, std::optional<double> order_estimate,
                          std::optional<LinearFit> fit);
/// {t_c, t_d, contradiction, ...}; absent crossings are null.
json selection_summary_json(const SelectionReport& rep, const ArtifactHeader& h);

/// Plot script for the selection CSV: L_I profiles, S_I curves, and the
/// crossing/balance markers.
std::string selection_gnuplot(const SelectionReport& rep, const std::vector<PathProfile>& paths,
                              const std::string& csv_name, const ArtifactHeader& h);

/// Writes the string to disk with '\n' line endings preserved.
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace catsim::io
