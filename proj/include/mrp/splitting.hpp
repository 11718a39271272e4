#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mrp/map_system.hpp"

namespace mrp {

enum class Certification { theorem_d, injective_1d };
std::string_view to_string(Certification c);

/// Two P-admissible words with a common last symbol whose forward images
/// M1 = f_{a_last} o ... o f_{a_first}(M) and M2 (likewise for b) stay
/// projection-wise disjoint under every further composition.
struct SplitWitness {
  Word word_a, word_b;
  ExactBox m1, m2;
  Certification certified_by = Certification::theorem_d;
  /// Under theorem_d: true when M2 x M1 (rather than M1 x M2) lies in the order cone.
  bool swapped = false;
};

/// Checks the order separation sup < inf per coordinate (orientation by the
/// monotone type, either labelling of the pair accepted). One-dimensional
/// systems of injective maps are certified by plain disjointness instead
/// when no monotone type exists or the separation fails.
/// Throws NotMonotoneSystem, LastSymbolMismatch, InadmissibleWord.
std::optional<SplitWitness> check_theorem_d(const MapSystem& sys, const Word& word_a, const Word& word_b);

struct HorizonLevel {
  std::size_t n = 0;
  std::uint64_t checked = 0;
  /// Prefixes at which the exact chained enclosures are disjoint in every projection.
  std::uint64_t certified = 0;
};

struct HorizonViolation {
  Word omega;
  std::size_t coordinate = 0;
  Interval hull_a, hull_b;
};

struct HorizonReport {
  std::size_t n_max = 0;
  bool exhaustive = true;
  std::vector<HorizonLevel> levels;
  std::optional<HorizonViolation> violation;

  bool certified() const;
  /// "violated", "certified" or "not falsified".
  std::string status() const;
};

struct HorizonOptions {
  /// 0 enumerates every prefix of every length up to n_max; otherwise that
  /// many uniformly drawn symbol sequences of length n_max are checked.
  std::size_t omega_samples = 0;
  std::uint64_t seed = 0;
  std::size_t cloud_size = 256;
  unsigned threads = 1;
};

/// Pushes point clouds of M1 and M2 and their exact enclosures along every
/// checked prefix omega. Overlapping hulls of cloud projections falsify
/// splitting (images of the connected box are connected); disjoint
/// enclosures certify the prefix.
HorizonReport verify_split_horizon(const MapSystem& sys, const Word& word_a, const Word& word_b, std::size_t n_max,
                                   const HorizonOptions& options = {});

/// Pairs of P-admissible words of length <= max_len with equal last symbol,
/// ordered by total length, then length of a, then a and b lexicographically;
/// returns the first one certified by check_theorem_d.
std::optional<SplitWitness> search_witness(const MapSystem& sys, std::size_t max_len);

enum class NormalizeMode {
  /// Reversed witness words, padded through the graph of Q (needs a primitive shift).
  primitive,
  /// Additionally prefixed by a Q-path from the first row-positive state u,
  /// so that p_{xi0 j} > 0 for every j.
  row_positive,
};

enum class TailPolicy {
  /// Shortest equal-length pair.
  free,
  /// Extend both words until their last symbols agree.
  match_last,
};

struct NormalizedPair {
  Word xi, eta;
  std::size_t length() const { return xi.size(); }
};

/// Q-admissible equal-length words with xi0 = eta0 whose reverse images
/// f_{xi0} o ... o f_{xi(N-1)}(M) inherit the splitting of the witness.
/// Throws NotPrimitive, NoRowPositiveState, HypothesisViolated (no connector
/// within k^2 steps).
NormalizedPair normalize_witness(const MapSystem& sys, const SplitWitness& witness,
                                 NormalizeMode mode = NormalizeMode::primitive, TailPolicy tail = TailPolicy::free);

}  // namespace mrp
