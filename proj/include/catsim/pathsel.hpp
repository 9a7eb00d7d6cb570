#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "catsim/model.hpp"

namespace catsim {

struct ConstantProfile {
  double value = 0.0;
};

/// alpha (cos(pi t / T_B) - 1)
struct CosineDipProfile {
  double alpha = 1.0;
  double t_b = 1.0;
};

/// Piecewise-linear through (time, value) samples.
struct TabulatedProfile {
  std::vector<double> times;
  std::vector<double> values;
};

using ProfileForm = std::variant<ConstantProfile, CosineDipProfile, TabulatedProfile>;

/// Imaginary Lagrangian L_I(t) of one path on [t_a, horizon].
class PathProfile {
 public:
  PathProfile(std::string label, ProfileForm form, double horizon, double t_a = 0.0);

  static PathProfile constant(std::string label, double value, double horizon);
  static PathProfile cosine_dip(std::string label, double alpha, double t_b);
  static PathProfile tabulated(std::string label, std::vector<double> times,
                               std::vector<double> values);

  const std::string& label() const { return label_; }
  const ProfileForm& form() const { return form_; }
  double t_a() const { return t_a_; }
  double horizon() const { return horizon_; }

  /// L_I(t)
  double l_i(double t) const;

 private:
  std::string label_;
  ProfileForm form_;
  double horizon_;
  double t_a_;
};

/// S_I([t_a, t]) = integral of L_I. Closed form for constant and cosine-dip
/// profiles; adaptive Simpson (1e-10 relative) for tabulated ones.
double s_i_partial(const PathProfile& p, double t);

/// Adaptive Simpson quadrature of L_I over [t_a, t], regardless of form.
double s_i_numeric(const PathProfile& p, double t, double rel_tol = 1e-10);

/// Time where alpha (cos(pi t / T_B) - 1) = -beta: (T_B / pi) arccos(1 - beta / alpha).
double crossing_time_tc(double alpha, double beta, double t_b);

/// Nonzero root of sin(pi t / T_B) = (1 - beta / alpha)(pi / T_B) t on (t_c, T_B]:
/// the time where the two accumulated imaginary actions balance.
double balance_time_td(double alpha, double beta, double t_b, double tol = 1e-12);

/// -S_I([t_a, t]) / hbar, kept in the log domain.
double path_weight(const PathProfile& p, double t, double hbar = 1.0);

enum class CrossingKind { LagrangianCross, ActionBalance };

struct Crossing {
  double time = 0.0;
  CrossingKind kind = CrossingKind::LagrangianCross;
  std::size_t first = 0;
  std::size_t second = 0;
};

struct SelectionReport {
  std::vector<std::string> labels;
  std::vector<double> times;
  /// s_i[path][k] = S_I([t_a, times[k]])
  std::vector<std::vector<double>> s_i;
  /// Index of the path with the smallest S_I([t_a, t]); nullopt on an unresolved tie.
  std::vector<std::optional<std::size_t>> fni_winner;
  /// Smallest S_I over the full window; the same at every time.
  std::optional<std::size_t> fi_winner;
  std::vector<Crossing> crossings;
  /// Times at which the future-not-included winner could not be decided.
  std::vector<double> unresolved_ties;
  /// The future-not-included verdict changes over time while the
  /// future-included one is fixed.
  bool contradiction = false;

  std::optional<double> first_crossing(CrossingKind kind) const;
};

struct TimelineOptions {
  int grid_points = 2048;
  /// Relative tolerance under which two actions count as equal.
  double tie_tol = 1e-12;
};

SelectionReport preference_timeline(const std::vector<PathProfile>& paths, double t_b,
                                    const TimelineOptions& opts = {});

/// Tabulated L_I(t) = 1/2 m_I qdot(t)^2 - V_I(q(t)) on `samples` points of [0, t_b].
PathProfile l_i_from_model(const ParticleModel& model, const RealFn& q_of_t,
                           const RealFn& qdot_of_t, double t_b, int samples = 2049,
                           std::string label = "model");

}  // namespace catsim
