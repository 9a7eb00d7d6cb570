#include "catsim/errors.hpp"

namespace catsim {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "input.invalid_argument";
    case Errc::dimension_mismatch: return "input.dimension_mismatch";
    case Errc::not_diagonalizable: return "spectral.not_diagonalizable";
    case Errc::no_convergence: return "spectral.no_convergence";
    case Errc::grid_too_coarse: return "model.grid_too_coarse";
    case Errc::grid_too_short: return "observables.grid_too_short";
    case Errc::step_too_large: return "evolution.step_too_large";
    case Errc::packet_too_wide: return "observables.packet_too_wide";
    case Errc::degenerate_imaginary_parts: return "observables.degenerate_imaginary_parts";
    case Errc::denominator_underflow: return "observables.denominator_underflow";
    case Errc::out_of_domain: return "pathsel.out_of_domain";
    case Errc::regime_violation: return "pathsel.regime_violation";
    case Errc::no_root_in_interval: return "pathsel.no_root_in_interval";
    case Errc::tie_unresolved: return "pathsel.tie_unresolved";
    case Errc::config: return "config.invalid";
  }
  return "unknown";
}

bool is_numerical(Errc code) noexcept {
  switch (code) {
    case Errc::not_diagonalizable:
    case Errc::no_convergence:
    case Errc::step_too_large:
    case Errc::degenerate_imaginary_parts:
    case Errc::denominator_underflow:
    case Errc::no_root_in_interval:
    case Errc::tie_unresolved:
      return true;
    default:
      return false;
  }
}

}  // namespace catsim
