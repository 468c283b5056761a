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

#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "forkcore/errors.hpp"
#include "forkcore/model.hpp"
#include "forkcore/multiway.hpp"
#include "forkcore/solver.hpp"

namespace forkcore {

/// All stable assignments of a profile, in lexicographic placement order.
/// May be empty for three or more alternatives.
inline std::vector<Assignment> enumerate_stable(const Profile& profile,
                                                std::uint64_t cap = kDefaultCap) {
  const std::uint64_t count = detail::assignment_count(profile.n(), profile.m());
  if (count > cap) {
    throw cap_error("enumerating " + std::to_string(count) + " assignments exceeds cap " +
                    std::to_string(cap));
  }
  std::vector<Assignment> stable;
  detail::for_each_placement(profile.n(), profile.m(), [&](const std::vector<int>& placement) {
    Assignment candidate(placement, profile.m());
    if (is_stable(profile, candidate).stable) stable.push_back(std::move(candidate));
    return true;
  });
  return stable;
}

/// How one coalition member fares: the outcome induced by the honest run
/// versus the manipulated run, both evaluated under the member's true order.
struct Improvement {
  int agent = 0;
  Outcome honest;
  Outcome manipulated;
};

/// Witness that a coalition can profitably misreport against a rule. Every
/// member strictly prefers (under their true order) the manipulated outcome.
struct ManipulationReport {
  std::vector<int> coalition;
  std::vector<PreferenceOrder> misreports;  // parallel to coalition
  Assignment honest_outcome;
  Assignment manipulated_outcome;
  std::vector<Improvement> improvements;  // parallel to coalition
};

struct SearchOptions {
  enum class Engine {
    automatic,     ///< product when it fits the cap, reachability otherwise
    product,       ///< enumerate misreport tuples in canonical order
    reachability,  ///< explore distinguishable report behaviors (same witness verdicts)
  };
  std::uint64_t cap = kDefaultCap;
  Engine engine = Engine::automatic;
};

namespace detail {

inline std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > UINT64_MAX / a) return UINT64_MAX;
  return a * b;
}

inline std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  return a > UINT64_MAX - b ? UINT64_MAX : a + b;
}

inline std::uint64_t binomial_u64(int n, int k) {
  std::uint64_t result = 1;
  for (int i = 1; i <= k; ++i) {
    result = saturating_mul(result, static_cast<std::uint64_t>(n - k + i));
    if (result == UINT64_MAX) return UINT64_MAX;
    result /= static_cast<std::uint64_t>(i);
  }
  return result;
}

/// Total misreport tuples across all coalition sizes 1..max_size.
inline std::uint64_t manipulation_candidate_count(int n, std::uint64_t orders_per_agent,
                                                  int max_size) {
  std::uint64_t total = 0;
  for (int s = 1; s <= max_size; ++s) {
    std::uint64_t term = binomial_u64(n, s);
    for (int i = 0; i < s; ++i) term = saturating_mul(term, orders_per_agent);
    total = saturating_add(total, term);
  }
  return total;
}

/// Visits coalitions of exactly `size` in lexicographic id order.
inline void for_each_coalition(int n, int size, const std::function<bool(const std::vector<int>&)>& fn) {
  std::vector<int> members(size);
  for (int i = 0; i < size; ++i) members[i] = i;
  while (true) {
    if (!fn(members)) return;
    int pos = size - 1;
    while (pos >= 0 && members[pos] == n - size + pos) --pos;
    if (pos < 0) return;
    ++members[pos];
    for (int i = pos + 1; i < size; ++i) members[i] = members[i - 1] + 1;
  }
}

/// Rebuilds the misreported profile, re-runs the rule through the public
/// checked path, and confirms every coalition member strictly improves.
/// Any disagreement is a bug in the search, not in the input.
inline ManipulationReport validated_report(const Profile& profile, Rule rule,
                                           const std::vector<int>& coalition,
                                           std::vector<PreferenceOrder> misreports,
                                           const Assignment& honest,
                                           const Assignment& manipulated) {
  std::vector<PreferenceOrder> reported_orders;
  reported_orders.reserve(profile.n());
  for (int agent = 0; agent < profile.n(); ++agent) reported_orders.push_back(profile.order(agent));
  for (std::size_t i = 0; i < coalition.size(); ++i) {
    reported_orders[coalition[i]] = misreports[i];
  }
  Profile misreported(profile.alternatives(), std::move(reported_orders));
  const SolveResult replay = solve(misreported, rule);
  if (!(replay.assignment == manipulated)) {
    throw internal_error("manipulation witness failed replay validation");
  }
  std::vector<Improvement> improvements;
  improvements.reserve(coalition.size());
  for (int member : coalition) {
    const Outcome before = honest.induced_outcome(member);
    const Outcome after = manipulated.induced_outcome(member);
    if (!profile.order(member).prefers(after, before)) {
      throw internal_error("manipulation witness does not improve agent " + std::to_string(member));
    }
    improvements.push_back({member, before, after});
  }
  return {coalition, std::move(misreports), honest, manipulated, std::move(improvements)};
}

/// Canonical exhaustive search: coalitions by increasing size then
/// lexicographic ids, misreports in the canonical order-enumeration order.
/// Returns the first profitable manipulation encountered.
inline std::optional<ManipulationReport> product_manipulation_search(const Profile& profile,
                                                                     Rule rule, int max_size,
                                                                     std::uint64_t cap) {
  const int n = profile.n();
  const int home = rule == Rule::RA ? 0 : 1;
  const int away = 1 - home;
  std::vector<const PreferenceOrder*> reported = order_pointers(profile);
  const Assignment honest = run_greedy(reported, home, away, KSelection::max_feasible, nullptr);

  // An agent whose honest outcome is already their global optimum can never
  // strictly improve, so coalitions containing one cannot be witnesses.
  std::vector<bool> improvable(n);
  for (int agent = 0; agent < n; ++agent) {
    improvable[agent] = !(profile.order(agent).ranking().front() == honest.induced_outcome(agent));
  }

  const std::vector<PreferenceOrder> misreport_space = enumerate_monotone_orders(n, 2, cap);
  std::optional<ManipulationReport> found;
  for (int size = 1; size <= max_size && !found; ++size) {
    for_each_coalition(n, size, [&](const std::vector<int>& coalition) {
      for (int member : coalition) {
        if (!improvable[member]) return true;
      }
      std::vector<std::size_t> odometer(coalition.size(), 0);
      while (true) {
        for (std::size_t i = 0; i < coalition.size(); ++i) {
          reported[coalition[i]] = &misreport_space[odometer[i]];
        }
        const Assignment outcome =
            run_greedy(reported, home, away, KSelection::max_feasible, nullptr);
        bool all_improve = true;
        for (int member : coalition) {
          if (!profile.order(member).prefers(outcome.induced_outcome(member),
                                             honest.induced_outcome(member))) {
            all_improve = false;
            break;
          }
        }
        if (all_improve) {
          std::vector<PreferenceOrder> misreports;
          misreports.reserve(coalition.size());
          for (std::size_t i = 0; i < coalition.size(); ++i) {
            misreports.push_back(misreport_space[odometer[i]]);
          }
          found = validated_report(profile, rule, coalition, std::move(misreports), honest, outcome);
          break;
        }
        std::size_t pos = coalition.size();
        while (pos > 0) {
          --pos;
          if (++odometer[pos] < misreport_space.size()) break;
          odometer[pos] = 0;
          if (pos == 0) {
            pos = SIZE_MAX;
            break;
          }
        }
        if (pos == SIZE_MAX) break;
      }
      for (int member : coalition) reported[member] = &profile.order(member);
      return !found.has_value();
    });
  }
  return found;
}

/// Exhaustive-equivalent coalition manipulation search for two alternatives.
///
/// The greedy rule consults a reported order only through the map
/// sigma(a) = min away-size tempting the agent when a agents remain on the
/// start side; monotone orders correspond exactly to the nondecreasing such
/// maps. A run evaluates each member's sigma only at the visited values of
/// a, and only through comparisons with b + j for the current b, so reports
/// are enumerated as per-round buckets: "willing at any next size"
/// (sigma <= b+1), an exact value in [b+2, n], or "never". Bucket choices
/// across rounds are chained so each explored behavior is realized by at
/// least one monotone order, and every monotone order's behavior is
/// explored, which makes witness existence agree with the product search.
/// Branches where some member can no longer beat their honest outcome even
/// in the best case are pruned.
class ReachabilityManipulationSearch {
 public:
  static constexpr int kMaxAgents = 6;

  ReachabilityManipulationSearch(const Profile& profile, Rule rule, std::uint64_t node_budget)
      : profile_(profile),
        n_(profile.n()),
        home_(rule == Rule::RA ? 0 : 1),
        away_(1 - home_),
        rule_(rule),
        node_budget_(node_budget) {
    if (n_ > kMaxAgents) {
      throw cap_error("reachability manipulation search supports at most " +
                      std::to_string(kMaxAgents) + " agents, got " + std::to_string(n_));
    }
    honest_.emplace(
        run_greedy(order_pointers(profile_), home_, away_, KSelection::max_feasible, nullptr));
    sigma_.assign(n_, std::vector<int>(n_ + 1, 0));
    for (int agent = 0; agent < n_; ++agent) {
      for (int a = 1; a <= n_; ++a) {
        sigma_[agent][a] = min_tempting_away_size(profile_.order(agent), home_, away_, a);
      }
    }
    away_best_improves_.assign(n_, false);
    home_improves_at_.assign(n_, std::vector<bool>(n_ + 1, false));
    improving_masks_.assign(n_, 0);
    for (int agent = 0; agent < n_; ++agent) {
      const PreferenceOrder& order = profile_.order(agent);
      const Outcome honest_outcome = honest_->induced_outcome(agent);
      away_best_improves_[agent] = order.prefers({away_, n_}, honest_outcome);
      for (int a = 1; a <= n_; ++a) {
        home_improves_at_[agent][a] = order.prefers({home_, a}, honest_outcome);
      }
      for (int mask = 0; mask < (1 << n_); ++mask) {
        const int b = std::popcount(static_cast<unsigned>(mask));
        const Outcome outcome =
            (mask >> agent) & 1 ? Outcome{away_, b} : Outcome{home_, n_ - b};
        if (order.prefers(outcome, honest_outcome)) {
          improving_masks_[agent] |= std::uint64_t{1} << mask;
        }
      }
    }
  }

  std::optional<ManipulationReport> run(int max_size) {
    for (int size = 1; size <= max_size; ++size) {
      std::optional<ManipulationReport> found;
      for_each_coalition(n_, size, [&](const std::vector<int>& coalition) {
        found = search_coalition(coalition);
        return !found.has_value();
      });
      if (found) return found;
    }
    return std::nullopt;
  }

 private:
  static constexpr int kMoved = 0;  // bound encoding: member already moved

  struct PathStep {
    int a = 0;
    int b = 0;
    std::vector<int> realized;  // per member: chosen sigma value at this a (n+1 = never)
  };

  std::optional<ManipulationReport> search_coalition(const std::vector<int>& coalition) {
    coalition_ = &coalition;
    std::uint64_t improving_all = ~std::uint64_t{0};
    for (int member : coalition) improving_all &= improving_masks_[member];
    if (improving_all == 0) return std::nullopt;
    improving_all_ = improving_all;
    visited_.clear();
    path_.clear();
    witness_mask_.reset();
    witness_path_.clear();
    std::vector<int> bounds(coalition.size(), n_ + 1);  // unconstrained
    explore(0u, bounds);
    if (!witness_mask_.has_value()) return std::nullopt;
    return materialize(coalition);
  }

  // State key: away mask in the low bits, then 3 bits per member bound.
  std::uint32_t state_key(std::uint32_t away_mask, const std::vector<int>& bounds) const {
    std::uint32_t key = away_mask;
    int shift = n_;
    for (int bound : bounds) {
      key |= static_cast<std::uint32_t>(bound) << shift;
      shift += 3;
    }
    return key;
  }

  void explore(std::uint32_t away_mask, const std::vector<int>& bounds) {
    if (witness_mask_.has_value()) return;
    const int b = std::popcount(away_mask);
    const int a = n_ - b;
    const std::vector<int>& coalition = *coalition_;

    // Best-case prune: every member must still be able to beat honest.
    for (std::size_t i = 0; i < coalition.size(); ++i) {
      const int member = coalition[i];
      if ((away_mask >> member) & 1u) {
        if (!away_best_improves_[member]) return;
      } else if (!away_best_improves_[member] && !home_improves_at_[member][a]) {
        return;
      }
    }

    const std::uint32_t key = state_key(away_mask, bounds);
    if (visited_.contains(key)) return;

    spend_node();
    if (a == 0) {
      record_terminal(away_mask);
      visited_.insert(key);
      return;
    }

    // Fixed contribution of truthful agents still on the start side.
    std::vector<int> truth_hist(a + 2, 0);
    std::vector<int> truth_home;
    for (int agent = 0; agent < n_; ++agent) {
      if ((away_mask >> agent) & 1u) continue;
      if (is_member(agent)) continue;
      truth_home.push_back(agent);
      const int sigma = sigma_[agent][a];
      if (sigma <= n_) ++truth_hist[sigma > b ? sigma - b : 1];
    }

    // Per-member choice lists: realized sigma values at this a. All three
    // vectors are indexed by coalition position; `active` lists the
    // positions of members still on the start side.
    std::vector<std::vector<int>> choices(coalition.size());
    std::vector<std::size_t> odometer(coalition.size(), 0);
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < coalition.size(); ++i) {
      const int member = coalition[i];
      if ((away_mask >> member) & 1u) continue;
      active.push_back(i);
      std::vector<int>& list = choices[i];
      const int bound = bounds[i];
      list.push_back(std::min(bound, b + 1));  // willing at any next size
      for (int value = b + 2; value <= std::min(bound, n_); ++value) list.push_back(value);
      if (bound == n_ + 1) list.push_back(n_ + 1);  // never
    }

    std::vector<int> member_value(coalition.size(), n_ + 1);
    while (true) {
      spend_node();
      std::vector<int> hist = truth_hist;
      for (std::size_t idx : active) {
        const int value = choices[idx][odometer[idx]];
        member_value[idx] = value;
        if (value <= n_) ++hist[value > b ? value - b : 1];
      }
      int k = 0;
      int willing_up_to = 0;
      for (int j = 1; j <= a; ++j) {
        willing_up_to += hist[j];
        if (willing_up_to >= j) k = j;
      }

      path_.push_back(make_step(a, b, active, member_value));
      if (k == 0) {
        record_terminal(away_mask);
      } else {
        std::uint32_t next_mask = away_mask;
        for (int agent : truth_home) {
          if (sigma_[agent][a] <= b + k) next_mask |= 1u << agent;
        }
        std::vector<int> next_bounds = bounds;
        for (std::size_t idx : active) {
          if (member_value[idx] <= b + k) {
            next_mask |= 1u << coalition[idx];
            next_bounds[idx] = kMoved;
          } else {
            next_bounds[idx] = member_value[idx];
          }
        }
        explore(next_mask, next_bounds);
      }
      path_.pop_back();
      if (witness_mask_.has_value()) return;

      // Advance the odometer; done when it wraps around.
      bool advanced = false;
      for (std::size_t pos = active.size(); pos > 0;) {
        --pos;
        const std::size_t idx = active[pos];
        if (++odometer[idx] < choices[idx].size()) {
          advanced = true;
          break;
        }
        odometer[idx] = 0;
      }
      if (!advanced) break;
    }
    visited_.insert(key);
  }

  PathStep make_step(int a, int b, const std::vector<std::size_t>& active,
                     const std::vector<int>& member_value) const {
    PathStep step;
    step.a = a;
    step.b = b;
    step.realized.assign(coalition_->size(), -1);  // -1: member not at home here
    for (std::size_t idx : active) step.realized[idx] = member_value[idx];
    return step;
  }

  void record_terminal(std::uint32_t mask) {
    if ((improving_all_ >> mask) & 1u) {
      witness_mask_ = mask;
      witness_path_ = path_;
    }
  }

  void spend_node() {
    if (nodes_ >= node_budget_) {
      throw cap_error("manipulation search exceeded its node budget of " +
                      std::to_string(node_budget_));
    }
    ++nodes_;
  }

  bool is_member(int agent) const {
    for (int member : *coalition_) {
      if (member == agent) return true;
    }
    return false;
  }

  /// Turns the recorded per-round sigma choices of one member into a full
  /// monotone order realizing them.
  PreferenceOrder order_from_path(std::size_t member_index) const {
    std::vector<int> sigma(n_ + 1, n_ + 1);
    int current = n_ + 1;
    std::size_t step = 0;
    for (int a = n_; a >= 1; --a) {
      while (step < witness_path_.size() && witness_path_[step].a > a) ++step;
      if (step < witness_path_.size() && witness_path_[step].a == a &&
          witness_path_[step].realized[member_index] >= 0) {
        current = witness_path_[step].realized[member_index];
      }
      sigma[a] = current;
    }
    std::vector<Outcome> ranking;
    ranking.reserve(static_cast<std::size_t>(2) * n_);
    int ai = n_;
    int si = n_;
    while (ai >= 1 || si >= 1) {
      if (ai >= 1 && (si < 1 || sigma[ai] > si)) {
        ranking.push_back({home_, ai--});
      } else {
        ranking.push_back({away_, si--});
      }
    }
    return PreferenceOrder(std::move(ranking), n_, 2);
  }

  ManipulationReport materialize(const std::vector<int>& coalition) const {
    std::vector<PreferenceOrder> misreports;
    misreports.reserve(coalition.size());
    for (std::size_t i = 0; i < coalition.size(); ++i) misreports.push_back(order_from_path(i));
    std::vector<int> placement(n_, home_);
    for (int agent = 0; agent < n_; ++agent) {
      if ((*witness_mask_ >> agent) & 1u) placement[agent] = away_;
    }
    Assignment manipulated(std::move(placement), 2);
    return validated_report(profile_, rule_, coalition, std::move(misreports), *honest_,
                            manipulated);
  }

  const Profile& profile_;
  int n_;
  int home_;
  int away_;
  Rule rule_;
  std::uint64_t node_budget_;
  std::uint64_t nodes_ = 0;

  std::optional<Assignment> honest_;
  std::vector<std::vector<int>> sigma_;            // [agent][a] -> min tempting away size, n+1 = never
  std::vector<bool> away_best_improves_;           // (away, n) beats honest
  std::vector<std::vector<bool>> home_improves_at_;  // [agent][a]: (home, a) beats honest
  std::vector<std::uint64_t> improving_masks_;     // bit per away-mask that improves the agent

  const std::vector<int>* coalition_ = nullptr;
  std::uint64_t improving_all_ = 0;
  std::unordered_set<std::uint32_t> visited_;
  std::vector<PathStep> path_;
  std::optional<std::uint32_t> witness_mask_;
  std::vector<PathStep> witness_path_;
};

}  // namespace detail

/// Exhaustively searches for a profitable coalition misreport against the
/// rule. Coalitions are tried in increasing size, then lexicographic id
/// order; misreports range over all monotone orders. Small instances use
/// the canonical product enumeration (the witness is then the first in
/// canonical order); instances whose product space exceeds the cap fall
/// back to the exhaustive-equivalent reachability engine, which reports the
/// same existence verdicts. Returns nullopt when no coalition of size up to
/// max_coalition can profit.
inline std::optional<ManipulationReport> find_manipulation(const Profile& profile, Rule rule,
                                                           int max_coalition,
                                                           SearchOptions options = {}) {
  detail::require_two_alternatives(profile, "manipulation search");
  const int n = profile.n();
  if (max_coalition < 1) throw validation_error("max coalition size must be at least 1");
  const int max_size = std::min(max_coalition, n);
  const std::uint64_t orders_per_agent = monotone_order_count(n, 2);
  const std::uint64_t candidates =
      detail::manipulation_candidate_count(n, orders_per_agent, max_size);

  using Engine = SearchOptions::Engine;
  Engine engine = options.engine;
  if (engine == Engine::automatic) {
    engine = candidates <= options.cap ? Engine::product : Engine::reachability;
  }
  if (engine == Engine::product) {
    if (candidates > options.cap) {
      throw cap_error("manipulation search over " + std::to_string(candidates) +
                      " candidate profiles exceeds cap " + std::to_string(options.cap));
    }
    return detail::product_manipulation_search(profile, rule, max_size, options.cap);
  }
  detail::ReachabilityManipulationSearch search(profile, rule, options.cap);
  return search.run(max_size);
}

struct AuditRow {
  std::string id;
  int n = 0;
  std::uint64_t stable_count = 0;
  bool unique = false;
  bool manipulable = false;
  std::optional<int> witness_coalition_size;
};

/// Cross-tabulation of uniqueness versus manipulability over a corpus.
struct AuditSummary {
  std::vector<AuditRow> rows;
  int unique_manipulable = 0;
  int unique_clean = 0;
  int multi_manipulable = 0;
  int multi_clean = 0;
};

inline AuditSummary audit_strategyproofness(const std::vector<Profile>& corpus, Rule rule,
                                            int max_coalition, SearchOptions options = {},
                                            std::vector<std::string> ids = {}) {
  if (!ids.empty() && ids.size() != corpus.size()) {
    throw validation_error("audit ids must match the corpus size");
  }
  AuditSummary summary;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Profile& profile = corpus[i];
    AuditRow row;
    row.id = ids.empty() ? "profile-" + std::to_string(i) : ids[i];
    row.n = profile.n();
    row.stable_count = enumerate_stable(profile, options.cap).size();
    row.unique = row.stable_count == 1;
    const auto report = find_manipulation(profile, rule, max_coalition, options);
    row.manipulable = report.has_value();
    if (report) row.witness_coalition_size = static_cast<int>(report->coalition.size());
    if (row.unique) {
      (row.manipulable ? summary.unique_manipulable : summary.unique_clean) += 1;
    } else {
      (row.manipulable ? summary.multi_manipulable : summary.multi_clean) += 1;
    }
    summary.rows.push_back(std::move(row));
  }
  return summary;
}

}  // namespace forkcore
