#pragma once

#include <cmath>
#include <functional>

#include "catsim/errors.hpp"

namespace catsim {

struct RootOptions {
  /// Bisection continues until the bracket is narrower than this.
  double bracket_width = 1e-6;
  /// Newton stops once |f(x)| <= residual_tol or the update is below x_tol.
  double residual_tol = 1e-12;
  double x_tol = 1e-15;
  int max_newton = 50;
};

/// Root of f in [lo, hi] (f(lo), f(hi) of opposite sign): bisection down to
/// the bracket width, then Newton steps with df, falling back to bisection
/// whenever a Newton step would leave the bracket.
inline double bisect_newton(const std::function<double(double)>& f,
                            const std::function<double(double)>& df, double lo, double hi,
                            const RootOptions& opts = {}) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    fail(Errc::no_root_in_interval, "bisect_newton: no sign change on the bracket");
  while (hi - lo > opts.bracket_width) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < opts.max_newton; ++i) {
    const double fx = f(x);
    if (std::abs(fx) <= opts.residual_tol) return x;
    if ((fx > 0.0) == (flo > 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    const double d = df ? df(x) : 0.0;
    double next = d != 0.0 ? x - fx / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= opts.x_tol * std::max(1.0, std::abs(x))) return next;
    x = next;
  }
  return x;
}

}  // namespace catsim
