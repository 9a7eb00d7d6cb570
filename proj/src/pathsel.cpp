#include "catsim/pathsel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "catsim/errors.hpp"
#include "catsim/roots.hpp"

namespace catsim {
namespace {

constexpr double kPi = std::numbers::pi;

void require_regime(double alpha, double beta, double t_b) {
  if (!(alpha > beta && beta > 0.0) || !std::isfinite(alpha))
    fail(Errc::regime_violation, "requires alpha > beta > 0");
  if (!(t_b > 0.0) || !std::isfinite(t_b)) fail(Errc::invalid_argument, "requires T_B > 0");
}

double simpson(double fa, double fm, double fb, double width) {
  return width / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                        double whole, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(fa, flm, fm, m - a);
  const double right = simpson(fm, frm, fb, b - m);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

double tabulated_value(const TabulatedProfile& tab, double t) {
  const auto& ts = tab.times;
  if (t <= ts.front()) return tab.values.front();
  if (t >= ts.back()) return tab.values.back();
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  const auto hi = static_cast<std::size_t>(it - ts.begin());
  const std::size_t lo = hi - 1;
  const double w = (t - ts[lo]) / (ts[hi] - ts[lo]);
  return tab.values[lo] + w * (tab.values[hi] - tab.values[lo]);
}

void check_domain(const PathProfile& p, double t) {
  const double slack = 1e-12 * std::max(1.0, std::abs(p.horizon()));
  if (!(t >= p.t_a() - slack && t <= p.horizon() + slack))
    fail(Errc::out_of_domain, "time " + std::to_string(t) + " outside the profile window [" +
                                  std::to_string(p.t_a()) + ", " + std::to_string(p.horizon()) +
                                  "]");
}

}  // namespace

PathProfile::PathProfile(std::string label, ProfileForm form, double horizon, double t_a)
    : label_(std::move(label)), form_(std::move(form)), horizon_(horizon), t_a_(t_a) {
  if (!(horizon_ > t_a_) || !std::isfinite(horizon_) || !std::isfinite(t_a_))
    fail(Errc::invalid_argument, "path profile: requires a finite window with T_B > T_A");
  if (const auto* tab = std::get_if<TabulatedProfile>(&form_)) {
    if (tab->times.size() < 2 || tab->times.size() != tab->values.size())
      fail(Errc::invalid_argument, "tabulated profile: need matching times/values, at least two");
    for (std::size_t i = 0; i < tab->times.size(); ++i) {
      if (!std::isfinite(tab->times[i]) || !std::isfinite(tab->values[i]))
        fail(Errc::invalid_argument, "tabulated profile: non-finite sample");
      if (i > 0 && !(tab->times[i] > tab->times[i - 1]))
        fail(Errc::invalid_argument, "tabulated profile: times must be strictly increasing");
    }
  } else if (const auto* c = std::get_if<ConstantProfile>(&form_)) {
    if (!std::isfinite(c->value)) fail(Errc::invalid_argument, "constant profile: non-finite");
  } else if (const auto* cd = std::get_if<CosineDipProfile>(&form_)) {
    if (!std::isfinite(cd->alpha) || !(cd->t_b > 0.0))
      fail(Errc::invalid_argument, "cosine-dip profile: requires finite alpha and T_B > 0");
  }
}

PathProfile PathProfile::constant(std::string label, double value, double horizon) {
  return PathProfile(std::move(label), ConstantProfile{value}, horizon);
}

PathProfile PathProfile::cosine_dip(std::string label, double alpha, double t_b) {
  return PathProfile(std::move(label), CosineDipProfile{alpha, t_b}, t_b);
}

PathProfile PathProfile::tabulated(std::string label, std::vector<double> times,
                                   std::vector<double> values) {
  if (times.size() < 2) fail(Errc::invalid_argument, "tabulated profile: need two samples");
  const double t_a = times.front(), horizon = times.back();
  return PathProfile(std::move(label), TabulatedProfile{std::move(times), std::move(values)},
                     horizon, t_a);
}

double PathProfile::l_i(double t) const {
  return std::visit(
      [t](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ConstantProfile>) {
          return f.value;
        } else if constexpr (std::is_same_v<T, CosineDipProfile>) {
          return f.alpha * (std::cos(kPi * t / f.t_b) - 1.0);
        } else {
          return tabulated_value(f, t);
        }
      },
      form_);
}

double s_i_numeric(const PathProfile& p, double t, double rel_tol) {
  check_domain(p, t);
  const double a = p.t_a();
  if (t <= a) return 0.0;
  auto f = [&p](double s) { return p.l_i(s); };
  // Magnitude scale for the relative tolerance.
  constexpr int kPanels = 16;
  double mag = 0.0;
  const double w = (t - a) / kPanels;
  for (int i = 0; i <= 4 * kPanels; ++i) mag = std::max(mag, std::abs(f(a + (t - a) * i / (4.0 * kPanels))));
  const double eps = rel_tol * std::max(mag * (t - a), 1e-300) / kPanels;
  double total = 0.0;
  for (int i = 0; i < kPanels; ++i) {
    const double lo = a + w * i;
    const double hi = i + 1 == kPanels ? t : a + w * (i + 1);
    const double flo = f(lo), fhi = f(hi), fm = f(0.5 * (lo + hi));
    total += adaptive_simpson(f, lo, hi, flo, fm, fhi, simpson(flo, fm, fhi, hi - lo), eps, 48);
  }
  return total;
}

double s_i_partial(const PathProfile& p, double t) {
  check_domain(p, t);
  t = std::clamp(t, p.t_a(), p.horizon());
  const double a = p.t_a();
  if (const auto* c = std::get_if<ConstantProfile>(&p.form())) return c->value * (t - a);
  if (const auto* cd = std::get_if<CosineDipProfile>(&p.form())) {
    const double k = kPi / cd->t_b;
    return cd->alpha * ((std::sin(k * t) - std::sin(k * a)) / k - (t - a));
  }
  return s_i_numeric(p, t);
}

double crossing_time_tc(double alpha, double beta, double t_b) {
  require_regime(alpha, beta, t_b);
  return t_b / kPi * std::acos(1.0 - beta / alpha);
}

double balance_time_td(double alpha, double beta, double t_b, double tol) {
  require_regime(alpha, beta, t_b);
  const double c = 1.0 - beta / alpha;
  const double k = kPi / t_b;
  auto f = [=](double t) { return std::sin(k * t) - c * k * t; };
  auto df = [=](double t) { return k * (std::cos(k * t) - c); };
  // f > 0 at t_c (tan x > x on (0, pi/2)) and f(T_B) = -c pi < 0.
  const double lo = crossing_time_tc(alpha, beta, t_b);
  RootOptions opts;
  opts.bracket_width = 1e-6 * t_b;
  opts.residual_tol = tol;
  if (c == 0.0) return t_b;
  const double root = bisect_newton(f, df, lo, t_b, opts);
  if (!(std::abs(f(root)) <= std::max(tol, 1e-15)))
    fail(Errc::no_root_in_interval, "balance_time_td: Newton refinement did not reach tolerance");
  return root;
}

double path_weight(const PathProfile& p, double t, double hbar) {
  if (!(hbar > 0.0)) fail(Errc::invalid_argument, "path_weight: hbar must be positive");
  return -s_i_partial(p, t) / hbar;
}

std::optional<double> SelectionReport::first_crossing(CrossingKind kind) const {
  for (const auto& c : crossings)
    if (c.kind == kind) return c.time;
  return std::nullopt;
}

namespace {

// Sign-change scan of d on the grid with bracketed refinement.
template <class D, class DD>
void scan_crossings(const std::vector<double>& times, const D& d, const DD& dd, CrossingKind kind,
                    std::size_t i, std::size_t j, std::size_t first_index,
                    std::vector<Crossing>& out) {
  std::vector<double> v(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) v[k] = d(times[k]);
  RootOptions ro;
  ro.bracket_width = 1e-6 * std::max(1.0, std::abs(times.back() - times.front()));
  ro.residual_tol = 0.0;
  ro.x_tol = 1e-16;
  for (std::size_t k = first_index; k + 1 < times.size(); ++k) {
    if (v[k] != 0.0 && v[k + 1] != 0.0 && (v[k] > 0.0) != (v[k + 1] > 0.0)) {
      const double t = bisect_newton(d, dd, times[k], times[k + 1], ro);
      out.push_back({t, kind, i, j});
    } else if (v[k + 1] == 0.0 && k + 2 < times.size() && v[k] != 0.0 && v[k + 2] != 0.0 &&
               (v[k] > 0.0) != (v[k + 2] > 0.0)) {
      out.push_back({times[k + 1], kind, i, j});
    }
  }
}

}  // namespace

SelectionReport preference_timeline(const std::vector<PathProfile>& paths, double t_b,
                                    const TimelineOptions& opts) {
  if (paths.empty()) fail(Errc::invalid_argument, "preference_timeline: no paths");
  if (opts.grid_points < 2) fail(Errc::invalid_argument, "preference_timeline: grid too small");
  const double t_a = paths.front().t_a();
  for (const auto& p : paths) {
    if (p.t_a() != t_a) fail(Errc::invalid_argument, "preference_timeline: paths differ in T_A");
    check_domain(p, t_b);
  }
  if (!(t_b > t_a)) fail(Errc::invalid_argument, "preference_timeline: requires T_B > T_A");

  SelectionReport rep;
  const std::size_t n = static_cast<std::size_t>(opts.grid_points);
  const std::size_t np = paths.size();
  for (const auto& p : paths) rep.labels.push_back(p.label());
  rep.times.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    rep.times[k] = k + 1 == n ? t_b : t_a + (t_b - t_a) * static_cast<double>(k) / (n - 1);
  rep.s_i.assign(np, std::vector<double>(n));
  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t k = 0; k < n; ++k) rep.s_i[i][k] = s_i_partial(paths[i], rep.times[k]);

  auto argmin = [&](std::size_t k, bool at_start) -> std::optional<std::size_t> {
    double best = rep.s_i[0][k], scale = 0.0;
    for (std::size_t i = 0; i < np; ++i) {
      best = std::min(best, rep.s_i[i][k]);
      scale = std::max(scale, std::abs(rep.s_i[i][k]));
    }
    std::vector<std::size_t> tied;
    for (std::size_t i = 0; i < np; ++i)
      if (rep.s_i[i][k] - best <= opts.tie_tol * scale) tied.push_back(i);
    if (tied.size() == 1) return tied.front();
    if (!at_start) return std::nullopt;
    // Every action vanishes at T_A; the verdict there is the right limit,
    // decided by the smallest L_I.
    double lbest = paths[tied[0]].l_i(rep.times[k]), lscale = 0.0;
    for (std::size_t i : tied) {
      lbest = std::min(lbest, paths[i].l_i(rep.times[k]));
      lscale = std::max(lscale, std::abs(paths[i].l_i(rep.times[k])));
    }
    std::vector<std::size_t> ltied;
    for (std::size_t i : tied)
      if (paths[i].l_i(rep.times[k]) - lbest <= opts.tie_tol * lscale) ltied.push_back(i);
    if (ltied.size() == 1) return ltied.front();
    return std::nullopt;
  };

  rep.fni_winner.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    rep.fni_winner[k] = argmin(k, k == 0);
    if (!rep.fni_winner[k]) rep.unresolved_ties.push_back(rep.times[k]);
  }
  rep.fi_winner = argmin(n - 1, false);

  for (std::size_t i = 0; i < np; ++i) {
    for (std::size_t j = i + 1; j < np; ++j) {
      const PathProfile& pi = paths[i];
      const PathProfile& pj = paths[j];
      auto dl = [&](double t) { return pi.l_i(t) - pj.l_i(t); };
      auto ds = [&](double t) { return s_i_partial(pi, t) - s_i_partial(pj, t); };
      scan_crossings(rep.times, dl, std::function<double(double)>{}, CrossingKind::LagrangianCross,
                     i, j, 0, rep.crossings);
      scan_crossings(rep.times, ds, std::function<double(double)>(dl), CrossingKind::ActionBalance,
                     i, j, 1, rep.crossings);
    }
  }
  std::stable_sort(rep.crossings.begin(), rep.crossings.end(),
                   [](const Crossing& a, const Crossing& b) { return a.time < b.time; });

  std::set<std::size_t> winners;
  for (const auto& w : rep.fni_winner)
    if (w) winners.insert(*w);
  rep.contradiction = rep.fi_winner.has_value() && winners.size() > 1;
  return rep;
}

PathProfile l_i_from_model(const ParticleModel& model, const RealFn& q_of_t,
                           const RealFn& qdot_of_t, double t_b, int samples, std::string label) {
  if (samples < 2) fail(Errc::invalid_argument, "l_i_from_model: need at least two samples");
  if (!(t_b > 0.0)) fail(Errc::invalid_argument, "l_i_from_model: requires T_B > 0");
  std::vector<double> times(static_cast<std::size_t>(samples));
  std::vector<double> values(times.size());
  for (int k = 0; k < samples; ++k) {
    const double t = k + 1 == samples ? t_b : t_b * k / (samples - 1);
    const double q = q_of_t(t), qdot = qdot_of_t(t);
    const double l = 0.5 * model.mass.im * qdot * qdot - model.potential.v_im(q);
    if (!std::isfinite(l)) fail(Errc::invalid_argument, "l_i_from_model: non-finite L_I");
    times[static_cast<std::size_t>(k)] = t;
    values[static_cast<std::size_t>(k)] = l;
  }
  return PathProfile::tabulated(std::move(label), std::move(times), std::move(values));
}

}  // namespace catsim
