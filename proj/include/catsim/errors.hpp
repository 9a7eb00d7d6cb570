#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace catsim {

enum class Errc {
  invalid_argument,
  dimension_mismatch,
  not_diagonalizable,
  no_convergence,
  grid_too_coarse,
  grid_too_short,
  step_too_large,
  packet_too_wide,
  degenerate_imaginary_parts,
  denominator_underflow,
  out_of_domain,
  regime_violation,
  no_root_in_interval,
  tie_unresolved,
  config,
};

/// Stable dotted identifier, e.g. "spectral.not_diagonalizable".
std::string_view errc_name(Errc code) noexcept;

/// True for failures of the numerics (as opposed to malformed input).
bool is_numerical(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const char* what) {
  if (!cond) fail(code, what);
}

}  // namespace catsim
