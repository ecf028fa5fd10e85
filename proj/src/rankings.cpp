#include "btrt/rankings.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <numeric>
#include <string>

#include "btrt/errors.hpp"

namespace btrt {

namespace {

constexpr int kMaxExactObjects = 8;

void require_valid_pair_vector(const PairVector& pv, int n_objects) {
  if (n_objects < 1) throw validation_error("pair vector: object count must be positive");
  const auto expected = static_cast<std::size_t>(pair_count(n_objects));
  if (pv.bits.size() != expected) {
    throw validation_error("pair vector length " + std::to_string(pv.bits.size()) +
                           " does not match " + std::to_string(n_objects) + " objects (expected " +
                           std::to_string(expected) + ")");
  }
  for (auto b : pv.bits) {
    if (b != 0 && b != 1) throw validation_error("pair vector entries must be 0 or 1");
  }
}

std::uint32_t pack_bits(const PairVector& pv) {
  std::uint32_t packed = 0;
  for (std::size_t k = 0; k < pv.bits.size(); ++k)
    if (pv.bits[k]) packed |= (1u << k);
  return packed;
}

/// All strict rankings of n objects together with their packed pair vectors,
/// built once per object count and shared read-only afterwards.
struct PermTable {
  std::vector<std::vector<int>> rank_vectors;
  std::vector<std::uint32_t> packed_pairs;
};

const PermTable& perm_table(int n_objects) {
  static const std::array<PermTable, kMaxExactObjects + 1> tables = [] {
    std::array<PermTable, kMaxExactObjects + 1> all;
    for (int n = 1; n <= kMaxExactObjects; ++n) {
      std::vector<int> order(n);
      std::iota(order.begin(), order.end(), 0);
      PermTable& t = all[n];
      do {
        // order[r] = object at rank r+1
        std::vector<int> ranks(n);
        for (int r = 0; r < n; ++r) ranks[order[r]] = r + 1;
        std::uint32_t packed = 0;
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j)
            if (ranks[i] < ranks[j]) packed |= (1u << pair_index(i, j, n));
        t.rank_vectors.push_back(std::move(ranks));
        t.packed_pairs.push_back(packed);
      } while (std::next_permutation(order.begin(), order.end()));
    }
    return all;
  }();
  return tables[n_objects];
}

}  // namespace

bool is_strict_ranking(const Ranking& r) {
  const int n = r.object_count();
  if (n == 0) return false;
  std::vector<bool> seen(n, false);
  for (int v : r.ranks) {
    if (v < 1 || v > n || seen[v - 1]) return false;
    seen[v - 1] = true;
  }
  return true;
}

bool is_weak_ordering(const Ranking& r) {
  const int n = r.object_count();
  if (n == 0) return false;
  int groups = 0;
  std::vector<bool> seen(n, false);
  for (int v : r.ranks) {
    if (v < 1 || v > n) return false;
    if (!seen[v - 1]) {
      seen[v - 1] = true;
      ++groups;
    }
  }
  // tied values must form a contiguous block 1..groups
  for (int g = 0; g < groups; ++g)
    if (!seen[g]) return false;
  return true;
}

Ranking reversed(const Ranking& r) {
  int max_rank = 0;
  for (int v : r.ranks) max_rank = std::max(max_rank, v);
  Ranking out = r;
  for (int& v : out.ranks) v = max_rank + 1 - v;
  return out;
}

PairVector ranking_to_pair_vector(const Ranking& r) {
  if (!is_strict_ranking(r)) {
    throw validation_error("not a strict ranking: ranks must be a permutation of 1..n");
  }
  const int n = r.object_count();
  PairVector pv;
  pv.bits.resize(pair_count(n));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      pv.bits[pair_index(i, j, n)] = r.ranks[i] < r.ranks[j] ? 1 : 0;
  return pv;
}

bool is_transitive(const PairVector& pv, int n_objects) {
  require_valid_pair_vector(pv, n_objects);
  // A complete tournament is acyclic iff its win counts are 0,1,...,n-1.
  std::vector<int> wins(n_objects, 0);
  for (int i = 0; i < n_objects; ++i) {
    for (int j = i + 1; j < n_objects; ++j) {
      if (pv.bits[pair_index(i, j, n_objects)])
        ++wins[i];
      else
        ++wins[j];
    }
  }
  std::vector<bool> seen(n_objects, false);
  for (int w : wins) {
    if (seen[w]) return false;
    seen[w] = true;
  }
  return true;
}

Ranking repair_to_nearest_ranking(const PairVector& pv, int n_objects, Rng& rng) {
  require_valid_pair_vector(pv, n_objects);
  if (n_objects > kMaxExactObjects) {
    throw unsupported_size_error("repair requires n_objects <= " +
                                 std::to_string(kMaxExactObjects) + ", got " +
                                 std::to_string(n_objects));
  }
  const PermTable& table = perm_table(n_objects);
  const std::uint32_t packed = pack_bits(pv);

  int best = pair_count(n_objects) + 1;
  std::vector<std::size_t> argmins;
  for (std::size_t p = 0; p < table.packed_pairs.size(); ++p) {
    const int d = std::popcount(packed ^ table.packed_pairs[p]);
    if (d < best) {
      best = d;
      argmins.clear();
      argmins.push_back(p);
    } else if (d == best) {
      argmins.push_back(p);
    }
  }
  std::size_t pick = 0;
  if (argmins.size() > 1) {
    pick = std::uniform_int_distribution<std::size_t>(0, argmins.size() - 1)(rng);
  }
  return Ranking(table.rank_vectors[argmins[pick]]);
}

double tau_x(const Ranking& a, const Ranking& b) {
  if (a.object_count() != b.object_count()) {
    throw validation_error("tau_x: rankings have different object counts");
  }
  if (!is_weak_ordering(a) || !is_weak_ordering(b)) {
    throw validation_error("tau_x: arguments must be valid (weak) rankings");
  }
  const int n = a.object_count();
  if (n < 2) return 1.0;
  long long sum = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int sa = a.ranks[i] <= a.ranks[j] ? 1 : -1;
      const int sb = b.ranks[i] <= b.ranks[j] ? 1 : -1;
      sum += sa * sb;
    }
  }
  return static_cast<double>(sum) / static_cast<double>(n * (n - 1));
}

namespace {

/// Enumerates ordered set partitions of `remaining`, accumulating the
/// integer tau_x score against the combined score matrix S. `score_step(G,
/// rest)` adds the contribution of placing group G ahead of everything in
/// rest: +S_ij - S_ji across the boundary and S_ij + S_ji inside the group.
struct ConsensusSearch {
  int n = 0;
  const std::vector<std::vector<long long>>* combined = nullptr;
  std::vector<int> current;
  std::vector<int> best_ranks;
  long long best_score = 0;
  bool has_best = false;

  void run(std::uint32_t remaining, int group, long long score) {
    if (remaining == 0) {
      if (!has_best || score > best_score ||
          (score == best_score &&
           std::lexicographical_compare(current.begin(), current.end(), best_ranks.begin(),
                                        best_ranks.end()))) {
        best_score = score;
        best_ranks = current;
        has_best = true;
      }
      return;
    }
    const auto& S = *combined;
    // iterate nonempty subsets of remaining as the next tied group
    for (std::uint32_t sub = remaining; sub != 0; sub = (sub - 1) & remaining) {
      const std::uint32_t rest = remaining & ~sub;
      long long delta = 0;
      for (int i = 0; i < n; ++i) {
        if (!(sub & (1u << i))) continue;
        current[i] = group;
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          if (sub & (1u << j)) {
            if (i < j) delta += S[i][j] + S[j][i];
          } else if (rest & (1u << j)) {
            delta += S[i][j] - S[j][i];
          }
        }
      }
      run(rest, group + 1, score + delta);
    }
  }
};

}  // namespace

ConsensusResult kemeny_consensus(const std::vector<Ranking>& rankings) {
  if (rankings.empty()) throw validation_error("consensus: empty ranking list");
  const int n = rankings.front().object_count();
  if (n > kMaxExactObjects) {
    throw unsupported_size_error("exact consensus requires n_objects <= " +
                                 std::to_string(kMaxExactObjects) + ", got " + std::to_string(n));
  }
  for (const Ranking& r : rankings) {
    if (r.object_count() != n) throw validation_error("consensus: inconsistent object counts");
    if (!is_weak_ordering(r)) throw validation_error("consensus: invalid ranking in input");
  }

  // Combined integer score matrix over all judges.
  std::vector<std::vector<long long>> S(n, std::vector<long long>(n, 0));
  for (const Ranking& r : rankings) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        S[i][j] += r.ranks[i] <= r.ranks[j] ? 1 : -1;
      }
  }

  ConsensusSearch search;
  search.n = n;
  search.combined = &S;
  search.current.assign(n, 0);
  search.run((n >= 32 ? 0xffffffffu : (1u << n) - 1u), 1, 0);

  ConsensusResult result;
  result.ranking = Ranking(search.best_ranks);
  const double denom =
      static_cast<double>(rankings.size()) * static_cast<double>(n) * (n - 1);
  result.tau = n < 2 ? 1.0 : static_cast<double>(search.best_score) / denom;
  return result;
}

}  // namespace btrt
