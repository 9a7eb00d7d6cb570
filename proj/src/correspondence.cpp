#include <cmath>
#include <limits>

#include "catsim/errors.hpp"
#include "catsim/observables.hpp"

namespace catsim {

CorrespondenceReport correspondence_experiment(const ComplexMatrix& h, const ComplexMatrix& q,
                                               const ComplexMatrix& o, const ComplexVector& a0,
                                               const ComplexVector& b_final, double t_a,
                                               double t_b, const std::vector<double>& times,
                                               const CorrespondenceOptions& opts) {
  require_square_finite(h, "correspondence_experiment");
  if (q.rows() != h.rows() || o.rows() != h.rows() || a0.size() != h.rows() ||
      b_final.size() != h.rows())
    fail(Errc::dimension_mismatch, "correspondence_experiment: dimensions differ");
  if (!(t_b > t_a)) fail(Errc::invalid_argument, "correspondence_experiment: requires T_B > T_A");
  for (double t : times)
    if (t < t_a || t > t_b)
      fail(Errc::invalid_argument, "correspondence_experiment: grid outside [T_A, T_B]");

  CorrespondenceReport rep;
  const SpectralData sd = eigendecompose(h, opts.propagation.eigen);
  if (sd.dim() > 1) {
    rep.imaginary_gap = sd.eigenvalues(0).imag() - sd.eigenvalues(1).imag();
    rep.degenerate = rep.imaginary_gap < opts.gap_threshold;
    if (rep.degenerate && !opts.allow_degenerate)
      fail(Errc::degenerate_imaginary_parts,
           "correspondence_experiment: gap between the two largest imaginary parts is " +
               std::to_string(rep.imaginary_gap));
    rep.expected_rate = rep.imaginary_gap / opts.hbar;
  } else {
    rep.imaginary_gap = std::numeric_limits<double>::infinity();
  }

  PropagationOptions prop = opts.propagation;
  prop.hbar = opts.hbar;
  const Trajectory a = sample_A(h, make_state(a0, StateLabel::A, t_a), times, prop);
  const Trajectory b = sample_B(h, make_state(b_final, StateLabel::B, t_b), times, prop);
  const ExpectationSeries ba = expect_BA(o, a, b);
  const ExpectationSeries qaa = expect_QAA(o, q, a);

  std::vector<double> x, y;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double d = std::abs(ba.values[k] - qaa.values[k]);
    rep.times.push_back(times[k]);
    rep.ba.push_back(ba.values[k]);
    rep.q_aa.push_back(qaa.values[k]);
    rep.delta.push_back(d);
    if (std::isfinite(d)) rep.max_delta = std::max(rep.max_delta, d);
    if (std::isfinite(d) && d > opts.fit_floor) {
      x.push_back(t_b - times[k]);
      y.push_back(std::log(d));
    }
  }
  rep.fit = fit_line(x, y);
  rep.decay_detected = rep.fit.points >= 3 && rep.fit.r_squared >= 0.9 && rep.fit.rate > 1e-3;
  return rep;
}

}  // namespace catsim
