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

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "forkcore/errors.hpp"

namespace forkcore {

/// Default guard for exhaustive enumerations (orders, assignments, candidates).
inline constexpr std::uint64_t kDefaultCap = 10'000'000;

/// An alternative a community may adopt, identified by its position in the
/// problem's alternative list.
struct Alternative {
  std::string label;
  int index = 0;
};

/// The object agents rank: being in a community of `size` members that has
/// adopted alternative `alt` (an index into the problem's alternative list).
struct Outcome {
  int alt = 0;
  int size = 0;

  friend bool operator==(const Outcome&, const Outcome&) = default;
  friend auto operator<=>(const Outcome&, const Outcome&) = default;
};

inline std::string to_string(const Outcome& o) {
  return "(" + std::to_string(o.alt) + "," + std::to_string(o.size) + ")";
}

namespace detail {

// Test instrumentation: when set, every rank comparison bumps the counter.
inline thread_local std::uint64_t* comparison_counter = nullptr;

struct ComparisonCounterGuard {
  explicit ComparisonCounterGuard(std::uint64_t* counter) : previous_(comparison_counter) {
    comparison_counter = counter;
  }
  ~ComparisonCounterGuard() { comparison_counter = previous_; }
  ComparisonCounterGuard(const ComparisonCounterGuard&) = delete;
  ComparisonCounterGuard& operator=(const ComparisonCounterGuard&) = delete;

 private:
  std::uint64_t* previous_;
};

}  // namespace detail

/// Checks that `ranking` is a strict total order over all m*n outcomes
/// (a permutation of {0..m-1} x [1..n]) that is monotone in community size
/// per alternative. Returns the first violation found, or nullopt if valid.
inline std::optional<std::string> validate_order(const std::vector<Outcome>& ranking, int n,
                                                 int m) {
  if (n < 1) return "agent count must be at least 1";
  if (m < 2) return "at least two alternatives required";
  const std::size_t expected = static_cast<std::size_t>(n) * static_cast<std::size_t>(m);
  if (ranking.size() != expected) {
    return "ranking has " + std::to_string(ranking.size()) + " outcomes, expected " +
           std::to_string(expected);
  }
  std::vector<int> position(expected, -1);
  for (std::size_t pos = 0; pos < ranking.size(); ++pos) {
    const Outcome& o = ranking[pos];
    if (o.alt < 0 || o.alt >= m) {
      return "unknown alternative index " + std::to_string(o.alt) + " at position " +
             std::to_string(pos);
    }
    if (o.size < 1 || o.size > n) {
      return "size " + std::to_string(o.size) + " out of range [1," + std::to_string(n) +
             "] at position " + std::to_string(pos);
    }
    int& slot = position[static_cast<std::size_t>(o.alt) * n + (o.size - 1)];
    if (slot >= 0) return "duplicate outcome " + to_string(o);
    slot = static_cast<int>(pos);
  }
  // Permutation established (all distinct, counts match). Monotonicity:
  // for each alternative, larger sizes must rank strictly above smaller ones.
  for (int alt = 0; alt < m; ++alt) {
    for (int size = 1; size < n; ++size) {
      const int lo = position[static_cast<std::size_t>(alt) * n + (size - 1)];
      const int hi = position[static_cast<std::size_t>(alt) * n + size];
      if (hi > lo) {
        return "monotonicity violated: " + to_string({alt, size + 1}) +
               " must rank above " + to_string({alt, size});
      }
    }
  }
  return std::nullopt;
}

/// A strict total order over all m*n outcomes, monotone in size per
/// alternative. Immutable; comparisons are O(1) via a precomputed rank table.
class PreferenceOrder {
 public:
  PreferenceOrder(std::vector<Outcome> ranking, int n, int m)
      : n_(n), m_(m), ranking_(std::move(ranking)) {
    if (auto violation = validate_order(ranking_, n, m)) {
      throw validation_error("invalid preference order: " + *violation);
    }
    rank_.assign(ranking_.size(), 0);
    for (std::size_t pos = 0; pos < ranking_.size(); ++pos) {
      const Outcome& o = ranking_[pos];
      rank_[static_cast<std::size_t>(o.alt) * n_ + (o.size - 1)] = static_cast<int>(pos);
    }
  }

  int n() const { return n_; }
  int m() const { return m_; }
  const std::vector<Outcome>& ranking() const { return ranking_; }

  /// Position of `o` in the ranking; 0 is most preferred.
  int rank(const Outcome& o) const {
    check(o);
    return rank_[static_cast<std::size_t>(o.alt) * n_ + (o.size - 1)];
  }

  /// True iff x ranks strictly above y.
  bool prefers(const Outcome& x, const Outcome& y) const {
    if (detail::comparison_counter != nullptr) ++*detail::comparison_counter;
    return rank(x) < rank(y);
  }

  friend bool operator==(const PreferenceOrder& a, const PreferenceOrder& b) {
    return a.n_ == b.n_ && a.m_ == b.m_ && a.ranking_ == b.ranking_;
  }

 private:
  void check(const Outcome& o) const {
    if (o.alt < 0 || o.alt >= m_) {
      throw validation_error("unknown alternative index " + std::to_string(o.alt));
    }
    if (o.size < 1 || o.size > n_) {
      throw validation_error("size " + std::to_string(o.size) + " out of range [1," +
                             std::to_string(n_) + "]");
    }
  }

  int n_;
  int m_;
  std::vector<Outcome> ranking_;
  std::vector<int> rank_;
};

inline bool prefers(const PreferenceOrder& order, const Outcome& x, const Outcome& y) {
  return order.prefers(x, y);
}

inline std::optional<std::string> validate_order(const PreferenceOrder& order, int n, int m) {
  return validate_order(order.ranking(), n, m);
}

/// A forking problem: n agents with one preference order each over the
/// outcomes of m named alternatives.
class Profile {
 public:
  Profile(std::vector<std::string> alternatives, std::vector<PreferenceOrder> orders)
      : alternatives_(std::move(alternatives)), orders_(std::move(orders)) {
    if (orders_.empty()) throw validation_error("profile needs at least one agent");
    if (alternatives_.size() < 2) throw validation_error("profile needs at least two alternatives");
    for (std::size_t i = 0; i < alternatives_.size(); ++i) {
      if (alternatives_[i].empty()) throw validation_error("alternative labels must be non-empty");
      for (std::size_t j = i + 1; j < alternatives_.size(); ++j) {
        if (alternatives_[i] == alternatives_[j]) {
          throw validation_error("duplicate alternative label '" + alternatives_[i] + "'");
        }
      }
    }
    const int n = static_cast<int>(orders_.size());
    const int m = static_cast<int>(alternatives_.size());
    for (int agent = 0; agent < n; ++agent) {
      if (orders_[agent].n() != n || orders_[agent].m() != m) {
        throw validation_error("agent " + std::to_string(agent) +
                               ": order shape does not match profile (n=" + std::to_string(n) +
                               ", m=" + std::to_string(m) + ")");
      }
    }
  }

  int n() const { return static_cast<int>(orders_.size()); }
  int m() const { return static_cast<int>(alternatives_.size()); }
  const std::vector<std::string>& alternatives() const { return alternatives_; }
  const std::string& alternative_label(int alt) const { return alternatives_.at(alt); }
  Alternative alternative(int alt) const { return {alternatives_.at(alt), alt}; }

  std::optional<int> alternative_index(std::string_view label) const {
    for (std::size_t i = 0; i < alternatives_.size(); ++i) {
      if (alternatives_[i] == label) return static_cast<int>(i);
    }
    return std::nullopt;
  }

  const PreferenceOrder& order(int agent) const {
    if (agent < 0 || agent >= n()) {
      throw validation_error("invalid agent id " + std::to_string(agent));
    }
    return orders_[agent];
  }
  const std::vector<PreferenceOrder>& orders() const { return orders_; }

 private:
  std::vector<std::string> alternatives_;
  std::vector<PreferenceOrder> orders_;
};

/// A total map from agents to alternatives; community sizes are derived.
class Assignment {
 public:
  Assignment(std::vector<int> placement, int m) : placement_(std::move(placement)), sizes_(m, 0) {
    if (placement_.empty()) throw validation_error("assignment needs at least one agent");
    if (m < 2) throw validation_error("assignment needs at least two alternatives");
    for (std::size_t agent = 0; agent < placement_.size(); ++agent) {
      const int alt = placement_[agent];
      if (alt < 0 || alt >= m) {
        throw validation_error("agent " + std::to_string(agent) + " placed at invalid alternative " +
                               std::to_string(alt));
      }
      ++sizes_[alt];
    }
  }

  int n() const { return static_cast<int>(placement_.size()); }
  int m() const { return static_cast<int>(sizes_.size()); }
  int alternative_of(int agent) const {
    if (agent < 0 || agent >= n()) {
      throw validation_error("invalid agent id " + std::to_string(agent));
    }
    return placement_[agent];
  }
  int community_size(int alt) const { return sizes_.at(alt); }
  Outcome induced_outcome(int agent) const {
    const int alt = alternative_of(agent);
    return {alt, sizes_[alt]};
  }
  const std::vector<int>& placement() const { return placement_; }
  const std::vector<int>& sizes() const { return sizes_; }

  friend bool operator==(const Assignment& a, const Assignment& b) {
    return a.placement_ == b.placement_;
  }

 private:
  std::vector<int> placement_;
  std::vector<int> sizes_;
};

/// True iff `agent` prefers assignment f over assignment g, i.e. prefers the
/// (alternative, community size) pair f induces for them over the one g does.
inline bool induced_preference_over_assignments(const Profile& profile, int agent,
                                                const Assignment& f, const Assignment& g) {
  if (f.n() != profile.n() || g.n() != profile.n() || f.m() != profile.m() ||
      g.m() != profile.m()) {
    throw validation_error("assignment shape does not match profile");
  }
  return profile.order(agent).prefers(f.induced_outcome(agent), g.induced_outcome(agent));
}

/// Compact form of a non-critically-interleaving order: the preferred
/// alternative plus the smallest community size at which the agent would
/// still choose it over a full community at the other alternative.
/// Threshold 1 is the non-interleaving case.
struct ThresholdPreference {
  int preferred = 0;
  int threshold = 1;
};

/// Expands a threshold preference into its canonical full order for two
/// alternatives. With preferred alternative P, other O, and threshold j the
/// result is (P,n)..(P,j), (O,n)..(O,n-j+1), (O,n-j)..(O,1), (P,j-1)..(P,1),
/// which is monotone and satisfies (P,j) > (O,n) > (O,n-j) > (P,j-1).
/// Comparisons not pinned by those constraints are fixed by this layout.
inline PreferenceOrder expand_threshold(const ThresholdPreference& tp, int n) {
  if (n < 1) throw validation_error("agent count must be at least 1");
  if (tp.preferred != 0 && tp.preferred != 1) {
    throw validation_error("threshold preference needs a two-alternative problem");
  }
  if (tp.threshold < 1 || tp.threshold > n) {
    throw validation_error("threshold " + std::to_string(tp.threshold) + " out of range [1," +
                           std::to_string(n) + "]");
  }
  const int p = tp.preferred;
  const int o = 1 - p;
  const int j = tp.threshold;
  std::vector<Outcome> ranking;
  ranking.reserve(static_cast<std::size_t>(2) * n);
  for (int size = n; size >= j; --size) ranking.push_back({p, size});
  for (int size = n; size >= 1; --size) ranking.push_back({o, size});
  for (int size = j - 1; size >= 1; --size) ranking.push_back({p, size});
  return PreferenceOrder(std::move(ranking), n, 2);
}

/// Number of monotone strict total orders over m chains of n sizes:
/// (m*n)! / (n!)^m, computed as a product of binomials. Saturates at
/// UINT64_MAX on overflow.
inline std::uint64_t monotone_order_count(int n, int m) {
  if (n < 1 || m < 1) throw validation_error("monotone_order_count requires n >= 1, m >= 1");
  auto binomial = [](std::uint64_t top, std::uint64_t k) -> std::uint64_t {
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
      // result * (top - k + i) / i stays integral at every step.
      const std::uint64_t numer = top - k + i;
      if (result > UINT64_MAX / numer) return UINT64_MAX;
      result = result * numer / i;
    }
    return result;
  };
  std::uint64_t total = 1;
  for (int i = 2; i <= m; ++i) {
    const std::uint64_t c = binomial(static_cast<std::uint64_t>(i) * n, n);
    if (c == UINT64_MAX || total > UINT64_MAX / c) return UINT64_MAX;
    total *= c;
  }
  return total;
}

namespace detail {

inline PreferenceOrder order_from_word(const std::vector<int>& word, int n, int m) {
  std::vector<Outcome> ranking;
  ranking.reserve(word.size());
  std::vector<int> seen(m, 0);
  for (int alt : word) {
    ++seen[alt];
    ranking.push_back({alt, n - seen[alt] + 1});
  }
  return PreferenceOrder(std::move(ranking), n, m);
}

}  // namespace detail

/// Invokes `fn` with every monotone order for (n, m) exactly once, in
/// canonical (lexicographic interleaving-word) order. Return false from `fn`
/// to stop early.
inline void for_each_monotone_order(int n, int m,
                                    const std::function<bool(const PreferenceOrder&)>& fn) {
  if (n < 1 || m < 2) throw validation_error("enumeration requires n >= 1, m >= 2");
  std::vector<int> word;
  word.reserve(static_cast<std::size_t>(n) * m);
  for (int alt = 0; alt < m; ++alt) {
    for (int i = 0; i < n; ++i) word.push_back(alt);
  }
  do {
    if (!fn(detail::order_from_word(word, n, m))) return;
  } while (std::next_permutation(word.begin(), word.end()));
}

/// Materializes all monotone orders for (n, m) in canonical order.
/// Refuses with a cap error when the count exceeds `cap`.
inline std::vector<PreferenceOrder> enumerate_monotone_orders(int n, int m,
                                                              std::uint64_t cap = kDefaultCap) {
  const std::uint64_t count = monotone_order_count(n, m);
  if (count > cap) {
    throw cap_error("enumerating " + std::to_string(count) + " monotone orders for (n=" +
                    std::to_string(n) + ", m=" + std::to_string(m) + ") exceeds cap " +
                    std::to_string(cap));
  }
  std::vector<PreferenceOrder> orders;
  orders.reserve(static_cast<std::size_t>(count));
  for_each_monotone_order(n, m, [&](const PreferenceOrder& order) {
    orders.push_back(order);
    return true;
  });
  return orders;
}

}  // namespace forkcore
