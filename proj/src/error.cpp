#include "mrp/error.hpp"

namespace mrp {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::not_stochastic: return "NotStochastic";
    case Errc::not_irreducible: return "NotIrreducible";
    case Errc::zero_stationary_entry: return "ZeroStationaryEntry";
    case Errc::symbol_out_of_range: return "SymbolOutOfRange";
    case Errc::outside_domain: return "OutsideDomain";
    case Errc::denominator_vanishes: return "DenominatorVanishes";
    case Errc::not_self_map: return "NotSelfMap";
    case Errc::not_monotone_system: return "NotMonotoneSystem";
    case Errc::last_symbol_mismatch: return "LastSymbolMismatch";
    case Errc::inadmissible_word: return "InadmissibleWord";
    case Errc::not_primitive: return "NotPrimitive";
    case Errc::no_row_positive_state: return "NoRowPositiveState";
    case Errc::budget_exceeded: return "BudgetExceeded";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::hypothesis_violated: return "HypothesisViolated";
    case Errc::degenerate_curve: return "DegenerateCurve";
    case Errc::exact_mode_unavailable: return "ExactModeUnavailable";
    case Errc::config_invalid: return "ConfigInvalid";
  }
  return "Unknown";
}

}  // namespace mrp
