// Copyright 2026 The forkcore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "forkcore/errors.hpp"
#include "forkcore/model.hpp"

namespace forkcore {

enum class ClassTag {
  non_interleaving,
  minimally_interleaving,
  k_interleaving,
  non_critically_interleaving,
  monotone_general,
};

inline std::string to_string(ClassTag tag) {
  switch (tag) {
    case ClassTag::non_interleaving: return "non-interleaving";
    case ClassTag::minimally_interleaving: return "minimally-interleaving";
    case ClassTag::k_interleaving: return "k-interleaving";
    case ClassTag::non_critically_interleaving: return "non-critically-interleaving";
    case ClassTag::monotone_general: return "monotone-general";
  }
  return "?";
}

inline std::optional<ClassTag> class_tag_from_string(std::string_view name) {
  for (ClassTag tag : {ClassTag::non_interleaving, ClassTag::minimally_interleaving,
                       ClassTag::k_interleaving, ClassTag::non_critically_interleaving,
                       ClassTag::monotone_general}) {
    if (to_string(tag) == name) return tag;
  }
  return std::nullopt;
}

/// Classification of one order in a two-alternative problem.
///
/// degree is the interleaving degree: with preferred alternative P and
/// minimal loyalty l (smallest j with (P, j) > (other, n)), degree = l - 1.
/// Degree 0 is non-interleaving, degree 1 minimally-interleaving, and an
/// order of degree d satisfies every k-interleaving bound with k >= d.
///
/// nci reports whether the order satisfies the threshold chain
/// (P, j) > (O, n) > (O, n-j) > (P, j-1) for j = nci_threshold; the only
/// candidate threshold is the minimal loyalty.
struct OrderClass {
  int degree = 0;
  int preferred = 0;
  int loyalty = 1;
  bool nci = false;
  int nci_threshold = 0;
  ClassTag tag = ClassTag::non_interleaving;
};

inline OrderClass classify_order(const PreferenceOrder& order) {
  if (order.m() != 2) {
    throw validation_error("classification requires exactly two alternatives");
  }
  const int n = order.n();
  OrderClass result;
  result.preferred = order.prefers({0, n}, {1, n}) ? 0 : 1;
  const int p = result.preferred;
  const int o = 1 - p;
  result.loyalty = n;
  for (int j = 1; j <= n; ++j) {
    if (order.prefers({p, j}, {o, n})) {
      result.loyalty = j;
      break;
    }
  }
  result.degree = result.loyalty - 1;

  // Threshold chain at j = loyalty; size-0 terms drop out.
  const int j = result.loyalty;
  bool chain = true;
  if (n - j >= 1 && j - 1 >= 1) {
    chain = order.prefers({o, n - j}, {p, j - 1});
  } else if (j - 1 >= 1) {  // j = n: the chain contracts to (O, n) > (P, n-1)
    chain = order.prefers({o, n}, {p, j - 1});
  }
  result.nci = chain;
  result.nci_threshold = chain ? j : 0;

  if (result.degree == 0) {
    result.tag = ClassTag::non_interleaving;
  } else if (result.degree == 1) {
    result.tag = ClassTag::minimally_interleaving;
  } else if (result.nci) {
    result.tag = ClassTag::non_critically_interleaving;
  } else {
    result.tag = ClassTag::k_interleaving;
  }
  return result;
}

/// Per-agent preferred alternative and minimal loyalty.
struct AgentLoyalty {
  int preferred = 0;
  int loyalty = 1;
};

inline std::vector<AgentLoyalty> loyalty_vector(const Profile& profile) {
  if (profile.m() != 2) {
    throw validation_error("loyalty vector requires exactly two alternatives");
  }
  std::vector<AgentLoyalty> result;
  result.reserve(profile.n());
  for (const PreferenceOrder& order : profile.orders()) {
    const OrderClass cls = classify_order(order);
    result.push_back({cls.preferred, cls.loyalty});
  }
  return result;
}

struct CohesionResult {
  bool cohesive = false;
  std::optional<int> witness;  // an alternative where all-together is stable
};

/// A profile is cohesive iff placing everyone at some alternative S is
/// stable: for every j in [1, n], fewer than j agents prefer (other, j) to
/// (S, n). Both alternatives are checked, in index order.
inline CohesionResult is_cohesive(const Profile& profile) {
  if (profile.m() != 2) {
    throw validation_error("cohesiveness check requires exactly two alternatives");
  }
  const int n = profile.n();
  for (int s = 0; s < 2; ++s) {
    const int other = 1 - s;
    bool stable = true;
    for (int j = 1; j <= n && stable; ++j) {
      int willing = 0;
      for (int agent = 0; agent < n; ++agent) {
        if (profile.order(agent).prefers({other, j}, {s, n})) ++willing;
      }
      if (willing >= j) stable = false;
    }
    if (stable) return {true, s};
  }
  return {false, std::nullopt};
}

/// Sufficient condition for uniqueness via loyalty: on each side, every
/// agent preferring that side is loyal at the side's own size. An empty
/// side is vacuously fine. True implies a unique stable assignment; false
/// decides nothing.
inline bool check_prop1_uniqueness(const Profile& profile) {
  const std::vector<AgentLoyalty> loyalties = loyalty_vector(profile);
  for (int side = 0; side < 2; ++side) {
    int side_size = 0;
    int max_loyalty = 0;
    for (const AgentLoyalty& al : loyalties) {
      if (al.preferred != side) continue;
      ++side_size;
      max_loyalty = std::max(max_loyalty, al.loyalty);
    }
    if (side_size > 0 && max_loyalty > side_size) return false;
  }
  return true;
}

namespace detail {

/// The largest self-supporting coalition at `side`: the agents willing to
/// hold (side, j*) against a full community elsewhere, where j* is the
/// largest j with at least j such agents. Matches the first move of the
/// greedy rule initialized at the opposite side.
inline std::vector<int> self_supporting_coalition(const std::vector<AgentLoyalty>& loyalties,
                                                  int side, int n) {
  int best_j = 0;
  for (int j = 1; j <= n; ++j) {
    int willing = 0;
    for (const AgentLoyalty& al : loyalties) {
      if (al.preferred == side && al.loyalty <= j) ++willing;
    }
    if (willing >= j) best_j = j;
  }
  std::vector<int> coalition;
  if (best_j == 0) return coalition;
  for (std::size_t agent = 0; agent < loyalties.size(); ++agent) {
    if (loyalties[agent].preferred == side && loyalties[agent].loyalty <= best_j) {
      coalition.push_back(static_cast<int>(agent));
    }
  }
  return coalition;
}

}  // namespace detail

/// Sufficient condition for uniqueness on non-critically-interleaving
/// profiles. With V_A' and V_B' the self-supporting coalitions of the two
/// sides, uniqueness follows when no leftover A-preferring agent is
/// (n - |V_B'|)-loyal and no leftover B-preferring agent is (n - |V_A'|)-
/// loyal. Requires every order to be non-critically-interleaving.
inline bool check_prop2_uniqueness(const Profile& profile) {
  if (profile.m() != 2) {
    throw validation_error("uniqueness condition requires exactly two alternatives");
  }
  const int n = profile.n();
  std::vector<AgentLoyalty> loyalties;
  loyalties.reserve(n);
  for (int agent = 0; agent < n; ++agent) {
    const OrderClass cls = classify_order(profile.order(agent));
    if (!cls.nci) {
      throw validation_error("agent " + std::to_string(agent) +
                             " is not non-critically-interleaving");
    }
    loyalties.push_back({cls.preferred, cls.loyalty});
  }
  const std::vector<int> core_a = detail::self_supporting_coalition(loyalties, 0, n);
  const std::vector<int> core_b = detail::self_supporting_coalition(loyalties, 1, n);
  std::vector<bool> in_core(n, false);
  for (int agent : core_a) in_core[agent] = true;
  for (int agent : core_b) in_core[agent] = true;
  const int bound_a = n - static_cast<int>(core_b.size());
  const int bound_b = n - static_cast<int>(core_a.size());
  for (int agent = 0; agent < n; ++agent) {
    if (in_core[agent]) continue;
    const AgentLoyalty& al = loyalties[agent];
    const int bound = al.preferred == 0 ? bound_a : bound_b;
    if (al.loyalty <= bound) return false;
  }
  return true;
}

/// Deterministic pseudo-random stream (splitmix64). Used instead of
/// <random> distributions so generated profiles are identical across
/// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform value in [0, bound); bound >= 1.
  int below(int bound) {
    return static_cast<int>((static_cast<unsigned __int128>(next()) *
                             static_cast<unsigned __int128>(bound)) >>
                            64);
  }

 private:
  std::uint64_t state_;
};

namespace detail {

/// Uniform random interleaving of m chains of length n, as a monotone order.
inline PreferenceOrder random_monotone_order(Rng& rng, int n, int m) {
  std::vector<int> remaining(m, n);
  int total = n * m;
  std::vector<int> word;
  word.reserve(total);
  while (total > 0) {
    int pick = rng.below(total);
    for (int alt = 0; alt < m; ++alt) {
      if (pick < remaining[alt]) {
        word.push_back(alt);
        --remaining[alt];
        break;
      }
      pick -= remaining[alt];
    }
    --total;
  }
  return order_from_word(word, n, m);
}

/// Uniform random monotone order with interleaving degree exactly `degree`:
/// the word starts with n - degree copies of the preferred letter, then the
/// other chain's head, then a uniform interleaving of the two tails.
inline PreferenceOrder random_order_with_degree(Rng& rng, int n, int preferred, int degree) {
  const int other = 1 - preferred;
  std::vector<int> word;
  word.reserve(static_cast<std::size_t>(2) * n);
  for (int i = 0; i < n - degree; ++i) word.push_back(preferred);
  word.push_back(other);
  int tail_preferred = degree;
  int tail_other = n - 1;
  while (tail_preferred + tail_other > 0) {
    const int pick = rng.below(tail_preferred + tail_other);
    if (pick < tail_preferred) {
      word.push_back(preferred);
      --tail_preferred;
    } else {
      word.push_back(other);
      --tail_other;
    }
  }
  return order_from_word(word, n, 2);
}

/// The unique order satisfying the minimal interleaving chain
/// (P,2) > (O,n) > (P,1) > (O,n-1) together with monotonicity.
inline PreferenceOrder minimally_interleaving_order(int n, int preferred) {
  const int p = preferred;
  const int o = 1 - p;
  std::vector<Outcome> ranking;
  ranking.reserve(static_cast<std::size_t>(2) * n);
  for (int size = n; size >= 2; --size) ranking.push_back({p, size});
  ranking.push_back({o, n});
  ranking.push_back({p, 1});
  for (int size = n - 1; size >= 1; --size) ranking.push_back({o, size});
  return PreferenceOrder(std::move(ranking), n, 2);
}

inline std::vector<std::string> default_labels(int m) {
  std::vector<std::string> labels;
  labels.reserve(m);
  for (int i = 0; i < m; ++i) {
    if (i < 26) {
      labels.push_back(std::string(1, static_cast<char>('A' + i)));
    } else {
      labels.push_back("S" + std::to_string(i));
    }
  }
  return labels;
}

}  // namespace detail

/// Requested preference class for profile generation; `k` is the degree
/// bound for k-interleaving requests and ignored otherwise.
struct ClassRequest {
  ClassTag tag = ClassTag::monotone_general;
  int k = 0;
};

/// Deterministic seeded profile whose orders all fall into the requested
/// class. For degree-tagged classes the first agent realizes the requested
/// degree exactly and the rest stay at or below it.
inline Profile generate_profile(int n, int m, ClassRequest cls, std::uint64_t seed) {
  if (n < 1) throw validation_error("generation requires n >= 1");
  if (m < 2) throw validation_error("generation requires m >= 2");
  if (cls.tag != ClassTag::monotone_general && m != 2) {
    throw validation_error("interleaving classes are defined for exactly two alternatives");
  }
  Rng rng(seed);
  // Fold the parameters in so distinct requests with the same seed diverge.
  rng = Rng(rng.next() ^ (static_cast<std::uint64_t>(n) << 40) ^
            (static_cast<std::uint64_t>(m) << 24) ^
            (static_cast<std::uint64_t>(static_cast<int>(cls.tag)) << 8) ^
            static_cast<std::uint64_t>(cls.k));

  std::vector<PreferenceOrder> orders;
  orders.reserve(n);
  switch (cls.tag) {
    case ClassTag::non_interleaving:
      for (int agent = 0; agent < n; ++agent) {
        orders.push_back(expand_threshold({rng.below(2), 1}, n));
      }
      break;
    case ClassTag::minimally_interleaving: {
      if (n < 2) throw validation_error("minimally-interleaving orders need n >= 2");
      for (int agent = 0; agent < n; ++agent) {
        const int preferred = rng.below(2);
        const bool minimal = agent == 0 ? true : rng.below(2) == 1;
        orders.push_back(minimal ? detail::minimally_interleaving_order(n, preferred)
                                 : expand_threshold({preferred, 1}, n));
      }
      break;
    }
    case ClassTag::k_interleaving: {
      if (cls.k < 0 || cls.k > n - 1) {
        throw validation_error("k-interleaving degree " + std::to_string(cls.k) +
                               " not realizable for n = " + std::to_string(n));
      }
      for (int agent = 0; agent < n; ++agent) {
        const int degree = agent == 0 ? cls.k : rng.below(cls.k + 1);
        orders.push_back(detail::random_order_with_degree(rng, n, rng.below(2), degree));
      }
      break;
    }
    case ClassTag::non_critically_interleaving:
      for (int agent = 0; agent < n; ++agent) {
        orders.push_back(expand_threshold({rng.below(2), 1 + rng.below(n)}, n));
      }
      break;
    case ClassTag::monotone_general:
      for (int agent = 0; agent < n; ++agent) {
        orders.push_back(detail::random_monotone_order(rng, n, m));
      }
      break;
  }
  return Profile(detail::default_labels(m), std::move(orders));
}

}  // namespace forkcore
