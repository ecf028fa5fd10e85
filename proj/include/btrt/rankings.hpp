#pragma once

#include <cstdint>
#include <vector>

#include "btrt/rng.hpp"

namespace btrt {

/// A rank vector over n_o objects: ranks[k] is the rank of object k, with
/// 1 the most preferred. Judge input must be a strict ranking (a permutation
/// of 1..n_o); consensus output may be a weak ordering, where tied objects
/// share a value and the used values are exactly 1..G for G groups.
struct Ranking {
  std::vector<int> ranks;

  Ranking() = default;
  explicit Ranking(std::vector<int> r) : ranks(std::move(r)) {}

  int object_count() const { return static_cast<int>(ranks.size()); }
};

/// Binary pairwise preferences for one judge: bit (i,j), i < j in
/// lexicographic order, is 1 iff object i is preferred to object j.
/// Sampled vectors may be intransitive; vectors derived from a ranking
/// never are.
struct PairVector {
  std::vector<std::uint8_t> bits;

  PairVector() = default;
  explicit PairVector(std::vector<std::uint8_t> b) : bits(std::move(b)) {}
};

struct ConsensusResult {
  Ranking ranking;  // weak ordering
  double tau = 0.0; // mean tau_x against the inputs, in [-1, 1]
};

inline int pair_count(int n_objects) { return n_objects * (n_objects - 1) / 2; }

/// Index of pair (i, j), i < j, in the lexicographic layout shared with the
/// design module.
inline int pair_index(int i, int j, int n_objects) {
  return i * n_objects - i * (i + 1) / 2 + (j - i - 1);
}

bool is_strict_ranking(const Ranking& r);
bool is_weak_ordering(const Ranking& r);

Ranking reversed(const Ranking& r);

/// Pairwise preferences implied by a strict ranking: bit(i,j) = 1 iff
/// rank(i) < rank(j). Throws validation_error for non-permutations.
PairVector ranking_to_pair_vector(const Ranking& r);

/// True iff the pair vector equals ranking_to_pair_vector(r) for some strict
/// ranking r, i.e. the implied tournament has no cycle.
bool is_transitive(const PairVector& pv, int n_objects);

/// Nearest strict ranking to a (possibly intransitive) pair vector, by
/// Hamming distance over all n_objects! permutations. Ties are broken by a
/// uniform draw from the supplied engine. Requires n_objects <= 8.
Ranking repair_to_nearest_ranking(const PairVector& pv, int n_objects, Rng& rng);

/// Emond-Mond extended rank correlation. Handles ties in either argument:
/// the score matrix entry for an ordered pair (i, j) is +1 when i is ranked
/// before or tied with j and -1 otherwise.
double tau_x(const Ranking& a, const Ranking& b);

/// Exact consensus: the weak ordering maximizing mean tau_x against the
/// inputs, found by enumerating every ordered set partition of the objects.
/// Ties between orderings are broken toward the lexicographically smallest
/// rank vector. Requires n_objects <= 8.
ConsensusResult kemeny_consensus(const std::vector<Ranking>& rankings);

}  // namespace btrt
