#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mrp {

enum class Errc {
  invalid_argument,
  not_stochastic,
  not_irreducible,
  zero_stationary_entry,
  symbol_out_of_range,
  outside_domain,
  denominator_vanishes,
  not_self_map,
  not_monotone_system,
  last_symbol_mismatch,
  inadmissible_word,
  not_primitive,
  no_row_positive_state,
  budget_exceeded,
  length_mismatch,
  hypothesis_violated,
  degenerate_curve,
  exact_mode_unavailable,
  config_invalid,
};

std::string_view errc_name(Errc code);

/// Library-wide exception. Every thrown error carries a machine-checkable
/// code; the message adds context for humans.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace mrp
