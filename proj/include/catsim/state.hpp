#pragma once

#include <string_view>

#include "catsim/linalg.hpp"

namespace catsim {

enum class StateLabel { A, B, ANormalized };

std::string_view label_name(StateLabel label) noexcept;

/// Amplitudes at a given time. The physical state is
/// amplitudes * exp(log_scale); log_scale is nonzero only after the
/// propagators rescaled to keep magnitudes representable.
struct StateVector {
  ComplexVector amplitudes;
  double time = 0.0;
  StateLabel label = StateLabel::A;
  double log_scale = 0.0;

  Eigen::Index dim() const { return amplitudes.size(); }
};

inline StateVector make_state(ComplexVector amplitudes, StateLabel label = StateLabel::A,
                              double time = 0.0) {
  return StateVector{std::move(amplitudes), time, label, 0.0};
}

}  // namespace catsim
