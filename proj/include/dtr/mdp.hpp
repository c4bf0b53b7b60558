#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dtr/errors.hpp"

namespace dtr {

/// Absolute tolerance for value comparisons and argmax tie detection.
inline constexpr double kValueTolerance = 1e-9;

/// Kernel rows whose sum deviates from 1 by more than this are rejected;
/// smaller deviations are renormalized at construction.
inline constexpr double kRowSumTolerance = 1e-6;

/// Ordered malignancy stages labeled 1..count, increasing in severity.
struct StateSpace {
  int count = 0;

  bool contains(int s) const { return s >= 1 && s <= count; }
};

/// Admissible actions per state. Time-homogeneous: the same sets apply at
/// every decision epoch.
class ActionSet {
public:
  /// per_state[s-1] lists the admissible action identifiers of state s.
  explicit ActionSet(std::vector<std::vector<int>> per_state);

  int num_states() const { return static_cast<int>(per_state_.size()); }
  const std::vector<int>& for_state(int s) const { return per_state_.at(s - 1); }
  bool is_admissible(int s, int a) const;
  /// Position of action a within for_state(s); throws InvalidPolicyError if absent.
  int index_of(int s, int a) const;
  /// Union of the per-state sets, ascending.
  std::vector<int> global() const;
  int max_actions_per_state() const;

private:
  std::vector<std::vector<int>> per_state_;
};

/// Time-indexed transition probabilities p_t(j | i, a) for decision epochs
/// t = 1..N-1. Rows are stored per (t, state, action-index) aligned with the
/// ActionSet ordering.
class TransitionKernel {
public:
  /// rows[t-1][s-1][k][j-1] = p_t(j | s, a_k) with a_k = actions.for_state(s)[k].
  /// Each row must sum to 1 within kRowSumTolerance; conforming rows are
  /// renormalized exactly, larger deviations raise InvalidDistributionError.
  TransitionKernel(std::vector<std::vector<std::vector<std::vector<double>>>> rows,
                   const StateSpace& states, const ActionSet& actions);

  int horizon_epochs() const { return static_cast<int>(rows_.size()); }
  std::span<const double> row(int t, int s, int action_index) const {
    return rows_.at(t - 1).at(s - 1).at(action_index);
  }
  const std::vector<std::vector<std::vector<std::vector<double>>>>& raw() const {
    return rows_;
  }

private:
  std::vector<std::vector<std::vector<std::vector<double>>>> rows_;
};

/// Stage rewards r_t(a, i, j) plus terminal rewards r_N(j), both in
/// net-benefit units.
struct RewardSpec {
  /// stage[t-1][s-1][k][j-1], k aligned with the ActionSet ordering.
  std::vector<std::vector<std::vector<std::vector<double>>>> stage;
  /// terminal[j-1] = r_N(j).
  std::vector<double> terminal;
};

/// A finite-horizon MDP: decisions at epochs 1..N-1, terminal observation at N.
/// Immutable after construction; solving and evaluation are pure functions.
class FiniteHorizonMDP {
public:
  FiniteHorizonMDP(StateSpace states, ActionSet actions, int horizon,
                   TransitionKernel kernel, RewardSpec rewards);

  const StateSpace& states() const { return states_; }
  const ActionSet& actions() const { return actions_; }
  int horizon() const { return horizon_; }
  const TransitionKernel& kernel() const { return kernel_; }
  const RewardSpec& rewards() const { return rewards_; }

  double stage_reward(int t, int s, int action_index, int j) const {
    return rewards_.stage[t - 1][s - 1][action_index][j - 1];
  }
  double terminal_reward(int j) const { return rewards_.terminal[j - 1]; }

  nlohmann::json to_json() const;
  static FiniteHorizonMDP from_json(const nlohmann::json& doc);

private:
  StateSpace states_;
  ActionSet actions_;
  int horizon_;
  TransitionKernel kernel_;
  RewardSpec rewards_;
};

/// Deterministic Markov decision rules d_t(s); d[t-1][s-1] is an action id.
struct Policy {
  std::vector<std::vector<int>> d;

  int action(int t, int s) const { return d.at(t - 1).at(s - 1); }
  bool operator==(const Policy&) const = default;
};

/// Output of backward induction: the optimal action matrix, the value
/// function u*_t(s) for t = 1..N (row N holds the terminal rewards), and the
/// full argmax set wherever values tie within kValueTolerance.
struct PolicySolution {
  Policy policy;
  std::vector<std::vector<double>> value;
  std::vector<std::vector<std::vector<int>>> optimal_actions;

  double value_at(int t, int s) const { return value.at(t - 1).at(s - 1); }
};

/// Expected stage reward sum_j r_t(a,i,j) p_t(j | i, a) for one kernel row.
/// The row must be a probability vector within kValueTolerance.
double expected_stage_reward(const RewardSpec& rewards, std::span<const double> row,
                             int t, int i, int a_index);

/// Exact dynamic-programming solution. Ties in the argmax resolve to the
/// lowest action identifier; all actions within kValueTolerance of the
/// maximum are recorded in optimal_actions.
PolicySolution backward_induction(const FiniteHorizonMDP& mdp);

/// Expected total additive utility of following `policy` from initial state
/// s, computed by exact forward recursion over the state distribution.
double evaluate_policy(const FiniteHorizonMDP& mdp, const Policy& policy, int s);

/// Result of exhaustive policy enumeration: per initial state, the best
/// achievable value and one policy attaining it.
struct EnumerationResult {
  std::vector<double> value;
  std::vector<Policy> policy;
};

/// Test oracle: evaluates every deterministic Markov policy from every
/// initial state. Raises SizeLimitError when the policy space exceeds
/// `max_policies`.
EnumerationResult enumerate_optimal(const FiniteHorizonMDP& mdp,
                                    std::uint64_t max_policies = 1'000'000);

}  // namespace dtr
