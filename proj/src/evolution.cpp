#include "catsim/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "catsim/errors.hpp"

namespace catsim {

std::string_view label_name(StateLabel label) noexcept {
  switch (label) {
    case StateLabel::A: return "A";
    case StateLabel::B: return "B";
    case StateLabel::ANormalized: return "A_N";
  }
  return "?";
}

namespace {

constexpr double kNormHigh = 1e150;
constexpr double kNormLow = 1e-150;
// Exponent magnitude beyond which the exact propagator factors out the
// growth before exponentiating.
constexpr double kExponentShift = 300.0;

void guard_norm(StateVector& s) {
  const double n = norm(s.amplitudes);
  if ((n > kNormHigh || (n < kNormLow && n > 0.0)) && std::isfinite(n)) {
    s.amplitudes /= n;
    s.log_scale += std::log(n);
  }
}

// Classical RK4 step for y' = f(y); `f(y, out)` writes the derivative.
template <class Deriv>
struct Rk4 {
  Deriv f;
  ComplexVector k1, k2, k3, k4, tmp;

  ComplexVector step(const ComplexVector& y, double h) {
    f(y, k1);
    tmp = y + (0.5 * h) * k1;
    f(tmp, k2);
    tmp = y + (0.5 * h) * k2;
    f(tmp, k3);
    tmp = y + h * k3;
    f(tmp, k4);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  /// Step-doubling estimate of the relative local error of one step of size h.
  double local_error(const ComplexVector& y, double h) {
    const ComplexVector full = step(y, h);
    const ComplexVector half = step(step(y, 0.5 * h), 0.5 * h);
    const double scale = std::max(half.norm(), 1e-300);
    return (full - half).norm() / (15.0 * scale);
  }
};

template <class Deriv>
Rk4<Deriv> make_rk4(Deriv f) {
  return Rk4<Deriv>{std::move(f), {}, {}, {}, {}, {}};
}

int step_count(double span, double step) {
  if (!(step > 0.0) || !std::isfinite(step))
    fail(Errc::invalid_argument, "RK4 step must be positive and finite");
  const double n = std::ceil(std::abs(span) / step - 1e-9);
  return std::max(1, static_cast<int>(n));
}

void check_local_error(double err, double tol, double h) {
  if (!(err <= tol))
    fail(Errc::step_too_large, "RK4 local error estimate " + std::to_string(err) +
                                   " exceeds tolerance at step " + std::to_string(h));
}

}  // namespace

std::vector<double> Trajectory::times() const {
  std::vector<double> t;
  t.reserve(samples.size());
  for (const auto& s : samples) t.push_back(s.time);
  return t;
}

Propagator::Propagator(ComplexMatrix generator, const PropagationOptions& opts)
    : generator_(std::move(generator)), opts_(opts) {
  require_square_finite(generator_, "propagator");
  if (!(opts_.hbar > 0.0)) fail(Errc::invalid_argument, "propagator: hbar must be positive");
  if (opts_.method == Stepper::EigenbasisExact) spectral_ = eigendecompose(generator_, opts_.eigen);
}

StateVector Propagator::exact(const StateVector& start, double t1) const {
  const double dt = t1 - start.time;
  const ComplexVector c = matvec(spectral_->eigvecs_inverse, start.amplitudes);
  const Eigen::Index n = c.size();
  double shift = 0.0;
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < n; ++k)
    if (c(k) != cplx(0.0, 0.0))
      top = std::max(top, spectral_->eigenvalues(k).imag() * dt / opts_.hbar);
  if (std::isfinite(top) && std::abs(top) > kExponentShift) shift = top;
  ComplexVector coeff(n);
  for (Eigen::Index k = 0; k < n; ++k)
    coeff(k) = c(k) * std::exp(-kI * spectral_->eigenvalues(k) * dt / opts_.hbar - shift);
  StateVector out{matvec(spectral_->eigvecs, coeff), t1, start.label, start.log_scale + shift};
  guard_norm(out);
  return out;
}

StateVector Propagator::rk4(const StateVector& start, double t1, int* steps_since_check) const {
  const double span = t1 - start.time;
  StateVector out = start;
  out.time = t1;
  if (span == 0.0) return out;
  const int n = step_count(span, opts_.step);
  const double h = span / n;
  const cplx factor = -kI / opts_.hbar;
  auto rk = make_rk4([&](const ComplexVector& y, ComplexVector& dy) {
    apply_into(generator_, y, dy);
    dy *= factor;
  });
  int local = 0;
  int& since = steps_since_check ? *steps_since_check : local;
  for (int i = 0; i < n; ++i) {
    if (since % std::max(1, opts_.error_check_interval) == 0)
      check_local_error(rk.local_error(out.amplitudes, h), opts_.local_error_tol, h);
    ++since;
    out.amplitudes = rk.step(out.amplitudes, h);
    guard_norm(out);
  }
  return out;
}

StateVector Propagator::advance(const StateVector& start, double t1) const {
  if (start.dim() != generator_.rows())
    fail(Errc::dimension_mismatch, "propagate: state dimension differs from the generator");
  require_finite(start.amplitudes, "propagate");
  if (!std::isfinite(t1)) fail(Errc::invalid_argument, "propagate: non-finite time");
  return opts_.method == Stepper::EigenbasisExact ? exact(start, t1) : rk4(start, t1, nullptr);
}

Trajectory Propagator::sample(const StateVector& start, std::span<const double> times) const {
  if (start.dim() != generator_.rows())
    fail(Errc::dimension_mismatch, "sample: state dimension differs from the generator");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) fail(Errc::invalid_argument, "sample: times must increase");
  Trajectory traj;
  traj.stepper = opts_.method;
  traj.step_size = opts_.method == Stepper::RK4 ? opts_.step
                   : times.size() > 1          ? times[1] - times[0]
                                               : 0.0;
  traj.samples.resize(times.size());
  if (opts_.method == Stepper::EigenbasisExact) {
    for (std::size_t i = 0; i < times.size(); ++i) traj.samples[i] = exact(start, times[i]);
    return traj;
  }
  // RK4: march outwards from the start time in both directions.
  const auto split = std::lower_bound(times.begin(), times.end(), start.time);
  const auto first_fwd = static_cast<std::size_t>(split - times.begin());
  int since = 0;
  StateVector cur = start;
  for (std::size_t i = first_fwd; i < times.size(); ++i) {
    cur = rk4(cur, times[i], &since);
    traj.samples[i] = cur;
  }
  cur = start;
  since = 0;
  for (std::size_t i = first_fwd; i-- > 0;) {
    cur = rk4(cur, times[i], &since);
    traj.samples[i] = cur;
  }
  return traj;
}

StateVector propagate_A(const ComplexMatrix& h, const StateVector& a0, double t1,
                        const PropagationOptions& opts) {
  StateVector out = Propagator(h, opts).advance(a0, t1);
  out.label = StateLabel::A;
  return out;
}

StateVector propagate_B(const ComplexMatrix& h, const StateVector& b0, double t1,
                        const PropagationOptions& opts) {
  StateVector out = Propagator(h.adjoint(), opts).advance(b0, t1);
  out.label = StateLabel::B;
  return out;
}

ComplexMatrix q_adjoint_generator(const ComplexMatrix& h, const ComplexMatrix& q) {
  require_square_finite(h, "q_adjoint_generator");
  if (q.rows() != h.rows()) fail(Errc::dimension_mismatch, "q_adjoint_generator: Q dimension");
  Eigen::LLT<ComplexMatrix> llt(q);
  if (llt.info() != Eigen::Success)
    fail(Errc::invalid_argument, "q_adjoint_generator: Q is not positive definite");
  return llt.solve(ComplexMatrix(h.adjoint() * q));
}

std::vector<double> uniform_grid(double t0, double t1, double step) {
  if (!(t1 >= t0) || !std::isfinite(t0) || !std::isfinite(t1))
    fail(Errc::invalid_argument, "uniform_grid: requires t0 <= t1");
  if (t1 == t0) return {t0};
  const int n = step_count(t1 - t0, step);
  std::vector<double> t(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) t[static_cast<std::size_t>(i)] = t0 + (t1 - t0) * i / n;
  return t;
}

Trajectory sample_A(const ComplexMatrix& h, const StateVector& a0, std::span<const double> times,
                    const PropagationOptions& opts) {
  Trajectory tr = Propagator(h, opts).sample(a0, times);
  for (auto& s : tr.samples) s.label = StateLabel::A;
  return tr;
}

Trajectory sample_B(const ComplexMatrix& h, const StateVector& b_final,
                    std::span<const double> times, const PropagationOptions& opts) {
  Trajectory tr = Propagator(h.adjoint(), opts).sample(b_final, times);
  for (auto& s : tr.samples) s.label = StateLabel::B;
  return tr;
}

Trajectory sample_B_q(const ComplexMatrix& h, const ComplexMatrix& q, const StateVector& b_final,
                      std::span<const double> times, const PropagationOptions& opts) {
  Trajectory tr = Propagator(q_adjoint_generator(h, q), opts).sample(b_final, times);
  for (auto& s : tr.samples) s.label = StateLabel::B;
  return tr;
}

ComplexVector normalized_with_phase(const ComplexVector& v) {
  const double n = v.norm();
  if (!(n > 0.0)) fail(Errc::invalid_argument, "normalize: zero vector");
  Eigen::Index big = 0;
  v.cwiseAbs().maxCoeff(&big);
  const cplx phase = std::abs(v(big)) > 0.0 ? std::conj(v(big)) / std::abs(v(big)) : cplx(1.0);
  return v * (phase / n);
}

double fidelity(const ComplexVector& u, const ComplexVector& v) {
  const double nu = u.squaredNorm(), nv = v.squaredNorm();
  if (!(nu > 0.0) || !(nv > 0.0)) return 0.0;
  return std::norm(inner(u, v)) / (nu * nv);
}

Trajectory propagate_A_normalized(const ComplexMatrix& h, const StateVector& a0, double t1,
                                  double step, const NormalizedOptions& opts) {
  require_square_finite(h, "propagate_A_normalized");
  if (a0.dim() != h.rows()) fail(Errc::dimension_mismatch, "propagate_A_normalized: dimension");
  if (std::abs(a0.amplitudes.norm() - 1.0) > 1e-8)
    fail(Errc::invalid_argument, "propagate_A_normalized: initial state must have unit norm");
  if (!(t1 >= a0.time)) fail(Errc::invalid_argument, "propagate_A_normalized: t1 precedes t0");
  const ComplexMatrix h_a = hermitian_split(h).anti_hermitian;
  const cplx factor = -kI / opts.hbar;
  auto rk = make_rk4([&](const ComplexVector& y, ComplexVector& dy) {
    apply_into(h, y, dy);
    const cplx mean_a = bilinear(y, h_a, y) / inner(y, y).real();
    dy -= mean_a * y;
    dy *= factor;
  });

  Trajectory traj;
  traj.stepper = Stepper::RK4;
  auto record = [&](const ComplexVector& y, double t) {
    traj.samples.push_back(StateVector{normalized_with_phase(y), t, StateLabel::ANormalized, 0.0});
    // Report the integrator's own norm, not the renormalized copy.
    traj.samples.back().amplitudes *= y.norm();
  };
  ComplexVector y = a0.amplitudes;
  record(y, a0.time);
  if (t1 == a0.time) {
    traj.step_size = step;
    return traj;
  }
  const int n = step_count(t1 - a0.time, step);
  const double dt = (t1 - a0.time) / n;
  traj.step_size = dt;
  const int every = std::max(1, opts.record_every);
  const int check = std::max(1, opts.error_check_interval);
  for (int i = 0; i < n; ++i) {
    if (i % check == 0) check_local_error(rk.local_error(y, dt), opts.local_error_tol, dt);
    y = rk.step(y, dt);
    if ((i + 1) % every == 0 || i + 1 == n) record(y, a0.time + (t1 - a0.time) * (i + 1) / n);
  }
  return traj;
}

}  // namespace catsim
