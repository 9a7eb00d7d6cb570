#pragma once

#include <optional>
#include <span>
#include <vector>

#include "catsim/linalg.hpp"
#include "catsim/spectral.hpp"
#include "catsim/state.hpp"

namespace catsim {

enum class Stepper { EigenbasisExact, RK4 };

struct PropagationOptions {
  Stepper method = Stepper::EigenbasisExact;
  /// RK4 step; trajectories subdivide each sampling interval into equal steps
  /// no longer than this.
  double step = 1e-2;
  double hbar = 1.0;
  /// Ceiling on the step-doubling estimate of the RK4 relative local error.
  double local_error_tol = 1e-6;
  /// The local error is re-estimated every this many RK4 steps.
  int error_check_interval = 256;
  EigenOptions eigen{};
};

struct Trajectory {
  std::vector<StateVector> samples;
  Stepper stepper = Stepper::EigenbasisExact;
  double step_size = 0.0;

  std::size_t size() const { return samples.size(); }
  std::vector<double> times() const;
};

/// Evolution i hbar d/dt psi = G psi for a fixed generator G. Eigenbasis data
/// is computed once on construction for the exact method.
class Propagator {
 public:
  Propagator(ComplexMatrix generator, const PropagationOptions& opts);

  /// State at time t1 starting from `start` (t1 may precede start.time).
  StateVector advance(const StateVector& start, double t1) const;
  /// Samples at the given ascending times.
  Trajectory sample(const StateVector& start, std::span<const double> times) const;

  const ComplexMatrix& generator() const { return generator_; }
  const PropagationOptions& options() const { return opts_; }
  const SpectralData* spectral() const { return spectral_ ? &*spectral_ : nullptr; }

 private:
  StateVector exact(const StateVector& start, double t1) const;
  StateVector rk4(const StateVector& start, double t1, int* steps_since_check) const;

  ComplexMatrix generator_;
  PropagationOptions opts_;
  std::optional<SpectralData> spectral_;
};

/// |A(t1)> = exp(-i H (t1 - t0) / hbar) |A(t0)>.
StateVector propagate_A(const ComplexMatrix& h, const StateVector& a0, double t1,
                        const PropagationOptions& opts = {});
/// Same with H^dagger; t1 < b0.time runs backwards from a final-time state.
StateVector propagate_B(const ComplexMatrix& h, const StateVector& b0, double t1,
                        const PropagationOptions& opts = {});

/// Generator for the bra <B(t)|_Q = <B(t)| Q under the Q-weighted pairing:
/// Q^{-1} H^dagger Q, which keeps <B(t)|_Q A(t)> constant in time.
ComplexMatrix q_adjoint_generator(const ComplexMatrix& h, const ComplexMatrix& q);

/// Ascending uniform grid t0, t0 + step, ..., t1 (step adjusted so that t1 is hit).
std::vector<double> uniform_grid(double t0, double t1, double step);

Trajectory sample_A(const ComplexMatrix& h, const StateVector& a0, std::span<const double> times,
                    const PropagationOptions& opts = {});
/// B given at b_final.time (typically T_B), sampled at the requested times.
Trajectory sample_B(const ComplexMatrix& h, const StateVector& b_final,
                    std::span<const double> times, const PropagationOptions& opts = {});
Trajectory sample_B_q(const ComplexMatrix& h, const ComplexMatrix& q, const StateVector& b_final,
                      std::span<const double> times, const PropagationOptions& opts = {});

struct NormalizedOptions {
  double hbar = 1.0;
  double local_error_tol = 1e-6;
  int error_check_interval = 256;
  /// Keep every n-th RK4 step in the trajectory (the final step is always kept).
  int record_every = 1;
};

/// RK4 integration of the norm-preserving flow
///   i hbar d/dt |A>_N = H |A>_N - <A|H_a|A>_N |A>_N
/// from a unit-norm a0. The stored samples have their global phase fixed so
/// that the largest-magnitude amplitude is real and positive.
Trajectory propagate_A_normalized(const ComplexMatrix& h, const StateVector& a0, double t1,
                                  double step, const NormalizedOptions& opts = {});

/// Unit-norm copy with the largest-magnitude amplitude made real-positive.
ComplexVector normalized_with_phase(const ComplexVector& v);
/// |<u|v>|^2 / (|u|^2 |v|^2)
double fidelity(const ComplexVector& u, const ComplexVector& v);

}  // namespace catsim
