#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrp/map_system.hpp"
#include "mrp/splitting.hpp"

namespace mrp {

/// Maps, ambient box and shift in one arithmetic: double, or exact
/// rationals when every input is rational.
template <class T>
struct OracleSystem {
  std::vector<BasicMap<T>> maps;
  BasicBox<T> ambient;
  BasicMarkovShift<T> shift;

  int k() const { return shift.size(); }
  std::size_t dim() const { return ambient.dim(); }
};

OracleSystem<double> make_oracle_system(const MapSystem& sys);
/// Throws ExactModeUnavailable when the rational rows do not sum to one.
OracleSystem<Rational> make_exact_oracle_system(const MapSystem& sys);

inline constexpr std::uint64_t kEnumerationBudget = std::uint64_t{1} << 24;

/// P^-(S_n^x(s)): total inverse measure of the length-n words w with
/// x in pi_s(f_{w0} o ... o f_{w(n-1)}(M)) (closed intervals). Exact for
/// m = 1 in rational mode, an upper bound otherwise. Throws BudgetExceeded
/// when k^n > 2^24.
template <class T>
T measure_S(const OracleSystem<T>& sys, const T& x, std::size_t s, std::size_t n);

/// P^-(Sigma_ell^W): total inverse measure of the length ell*N words none
/// of whose blocks at offsets 0, N, ..., (ell-1)N equals W.
template <class T>
T measure_sigma(const BasicMarkovShift<T>& shift, const Word& w, std::size_t ell);

/// Replaces every N-block of c equal to w by w_prime. Throws LengthMismatch.
Word substitute_F(const Word& c, const Word& w, const Word& w_prime);

/// `points` equally spaced values of pi_s(M), endpoints included.
template <class T>
std::vector<T> x_grid(const BasicBox<T>& ambient, std::size_t s, std::size_t points = 33);

enum class Verdict { holds, holds_relaxed, fails };
std::string_view to_string(Verdict v);

template <class T>
struct OracleRow {
  std::size_t ell = 0;
  T x{};
  T lhs{}, rhs{};
  /// Words of length ell*N covered by the enumeration (pruned subtrees included).
  std::uint64_t words = 0;
  /// |Sigma_x^ell(s)|, the words whose image projection contains x.
  std::uint64_t members = 0;
  bool bound_holds = false;
  bool injective = false;
  bool measure_monotone = false;
  bool exact_enclosure = false;

  bool ok() const { return bound_holds && injective && measure_monotone; }
  Verdict verdict() const;
};

template <class T>
struct GeometricRow {
  std::size_t ell = 0;
  T sigma{}, bound{};
  bool holds = false;
};

template <class T>
struct OracleReport {
  /// W is the lower-measure word of the pair, w_prime the other.
  Word w, w_prime;
  bool swapped = false;
  std::size_t s = 0;
  T measure_w{}, measure_w_prime{};
  T rho{}, rho0{};
  std::vector<OracleRow<T>> rows;
  std::vector<GeometricRow<T>> geometric;

  std::size_t block_length() const { return w.size(); }
  bool all_hold() const;
};

struct OracleOptions {
  std::size_t ell_max = 6;
  std::size_t geometric_ell_max = 10;
  unsigned threads = 1;
};

/// For each ell <= ell_max and each grid x: the bound
/// P^-(S_{ell N}^x(s)) <= P^-(Sigma_ell^W), injectivity of F_ell on
/// Sigma_x^ell(s) and P^-(C) <= P^-(F_ell(C)) per word; then
/// P^-(Sigma_ell^W) <= (1 - rho0)^ell for ell <= geometric_ell_max.
/// Throws HypothesisViolated when P^-(W) = 0 or the reverse images of the
/// pair meet in some projection; BudgetExceeded.
template <class T>
OracleReport<T> verify_bounds(const OracleSystem<T>& sys, const NormalizedPair& pair, const std::vector<T>& grid,
                              std::size_t s, const OracleOptions& options = {});

/// Rho as in the geometric bound: min_j q_{j w0} q_{w0 w1} ... q_{w(N-2) w(N-1)}.
template <class T>
T geometric_rho(const BasicMarkovShift<T>& shift, const Word& w);

}  // namespace mrp
