#include "dtr/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

namespace dtr {

namespace {

std::string at(int t, int s) {
  return "(t=" + std::to_string(t) + ", s=" + std::to_string(s) + ")";
}

}  // namespace

ActionSet::ActionSet(std::vector<std::vector<int>> per_state)
    : per_state_(std::move(per_state)) {
  if (per_state_.empty()) {
    throw std::invalid_argument("ActionSet: no states");
  }
  for (std::size_t s = 0; s < per_state_.size(); ++s) {
    auto& actions = per_state_[s];
    if (actions.empty()) {
      throw std::invalid_argument("ActionSet: state " + std::to_string(s + 1) +
                                  " has no admissible actions");
    }
    std::sort(actions.begin(), actions.end());
    if (std::adjacent_find(actions.begin(), actions.end()) != actions.end()) {
      throw std::invalid_argument("ActionSet: duplicate action in state " +
                                  std::to_string(s + 1));
    }
  }
}

bool ActionSet::is_admissible(int s, int a) const {
  const auto& actions = per_state_.at(s - 1);
  return std::binary_search(actions.begin(), actions.end(), a);
}

int ActionSet::index_of(int s, int a) const {
  const auto& actions = per_state_.at(s - 1);
  const auto it = std::lower_bound(actions.begin(), actions.end(), a);
  if (it == actions.end() || *it != a) {
    throw InvalidPolicyError("action " + std::to_string(a) +
                             " is not admissible in state " + std::to_string(s));
  }
  return static_cast<int>(it - actions.begin());
}

std::vector<int> ActionSet::global() const {
  std::set<int> all;
  for (const auto& actions : per_state_) all.insert(actions.begin(), actions.end());
  return {all.begin(), all.end()};
}

int ActionSet::max_actions_per_state() const {
  std::size_t m = 0;
  for (const auto& actions : per_state_) m = std::max(m, actions.size());
  return static_cast<int>(m);
}

namespace {

/// Validates one kernel row and renormalizes it to sum exactly 1.
void normalize_row(std::vector<double>& row, int t, int s) {
  double sum = 0.0;
  for (double p : row) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw InvalidDistributionError("kernel row at " + at(t, s) +
                                     " has an entry outside [0, 1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kRowSumTolerance) {
    throw InvalidDistributionError("kernel row at " + at(t, s) + " sums to " +
                                   std::to_string(sum) + ", not 1");
  }
  // Idempotent: rows already normalized to rounding error are left untouched,
  // so serialization round-trips preserve kernels bit for bit.
  if (std::abs(sum - 1.0) <= 1e-14) return;
  for (double& p : row) p /= sum;
}

}  // namespace

TransitionKernel::TransitionKernel(
    std::vector<std::vector<std::vector<std::vector<double>>>> rows,
    const StateSpace& states, const ActionSet& actions)
    : rows_(std::move(rows)) {
  const std::size_t num_states = static_cast<std::size_t>(states.count);
  if (rows_.empty()) {
    throw std::invalid_argument("TransitionKernel: no decision epochs");
  }
  for (std::size_t ti = 0; ti < rows_.size(); ++ti) {
    if (rows_[ti].size() != num_states) {
      throw std::invalid_argument("TransitionKernel: epoch " + std::to_string(ti + 1) +
                                  " does not cover every state");
    }
    for (std::size_t si = 0; si < num_states; ++si) {
      auto& per_action = rows_[ti][si];
      const std::size_t expected = actions.for_state(static_cast<int>(si + 1)).size();
      if (per_action.size() != expected) {
        throw std::invalid_argument("TransitionKernel: state " + std::to_string(si + 1) +
                                    " needs one row per admissible action");
      }
      for (auto& row : per_action) {
        if (row.size() != num_states) {
          throw std::invalid_argument("TransitionKernel: row length mismatch at " +
                                      at(static_cast<int>(ti + 1), static_cast<int>(si + 1)));
        }
        normalize_row(row, static_cast<int>(ti + 1), static_cast<int>(si + 1));
      }
    }
  }
}

FiniteHorizonMDP::FiniteHorizonMDP(StateSpace states, ActionSet actions, int horizon,
                                   TransitionKernel kernel, RewardSpec rewards)
    : states_(states),
      actions_(std::move(actions)),
      horizon_(horizon),
      kernel_(std::move(kernel)),
      rewards_(std::move(rewards)) {
  if (states_.count < 1) throw std::invalid_argument("FiniteHorizonMDP: J must be >= 1");
  if (horizon_ < 2) throw std::invalid_argument("FiniteHorizonMDP: N must be >= 2");
  if (actions_.num_states() != states_.count) {
    throw std::invalid_argument("FiniteHorizonMDP: action set does not match state count");
  }
  if (kernel_.horizon_epochs() != horizon_ - 1) {
    throw std::invalid_argument("FiniteHorizonMDP: kernel must cover epochs 1..N-1");
  }
  if (rewards_.terminal.size() != static_cast<std::size_t>(states_.count)) {
    throw std::invalid_argument("FiniteHorizonMDP: terminal reward must cover every state");
  }
  if (rewards_.stage.size() != static_cast<std::size_t>(horizon_ - 1)) {
    throw std::invalid_argument("FiniteHorizonMDP: stage rewards must cover epochs 1..N-1");
  }
  for (int t = 1; t <= horizon_ - 1; ++t) {
    const auto& per_state = rewards_.stage[t - 1];
    if (per_state.size() != static_cast<std::size_t>(states_.count)) {
      throw std::invalid_argument("FiniteHorizonMDP: stage rewards missing states at t=" +
                                  std::to_string(t));
    }
    for (int s = 1; s <= states_.count; ++s) {
      const auto& per_action = per_state[s - 1];
      if (per_action.size() != actions_.for_state(s).size()) {
        throw std::invalid_argument("FiniteHorizonMDP: stage rewards missing actions at " +
                                    at(t, s));
      }
      for (const auto& row : per_action) {
        if (row.size() != static_cast<std::size_t>(states_.count)) {
          throw std::invalid_argument("FiniteHorizonMDP: stage reward row length at " +
                                      at(t, s));
        }
        for (double r : row) {
          if (!std::isfinite(r)) {
            throw std::invalid_argument("FiniteHorizonMDP: non-finite stage reward at " +
                                        at(t, s));
          }
        }
      }
    }
  }
  for (double r : rewards_.terminal) {
    if (!std::isfinite(r)) {
      throw std::invalid_argument("FiniteHorizonMDP: non-finite terminal reward");
    }
  }
}

double expected_stage_reward(const RewardSpec& rewards, std::span<const double> row,
                             int t, int i, int a_index) {
  double sum = 0.0;
  for (double p : row) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw InvalidDistributionError("expected_stage_reward: row entry outside [0, 1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kRowSumTolerance) {
    throw InvalidDistributionError("expected_stage_reward: row sums to " +
                                   std::to_string(sum) + ", not 1");
  }
  const auto& r = rewards.stage.at(t - 1).at(i - 1).at(a_index);
  double value = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) value += r.at(j) * row[j];
  return value;
}

PolicySolution backward_induction(const FiniteHorizonMDP& mdp) {
  const int num_states = mdp.states().count;
  const int horizon = mdp.horizon();

  PolicySolution out;
  out.value.assign(horizon, std::vector<double>(num_states, 0.0));
  out.policy.d.assign(horizon - 1, std::vector<int>(num_states, 0));
  out.optimal_actions.assign(horizon - 1, std::vector<std::vector<int>>(num_states));

  for (int s = 1; s <= num_states; ++s) {
    out.value[horizon - 1][s - 1] = mdp.terminal_reward(s);
  }

  for (int t = horizon - 1; t >= 1; --t) {
    const auto& next = out.value[t];
    for (int s = 1; s <= num_states; ++s) {
      const auto& actions = mdp.actions().for_state(s);
      double best = -std::numeric_limits<double>::infinity();
      std::vector<double> q(actions.size());
      for (std::size_t k = 0; k < actions.size(); ++k) {
        const auto row = mdp.kernel().row(t, s, static_cast<int>(k));
        double value = 0.0;
        for (int j = 1; j <= num_states; ++j) {
          value += row[j - 1] * (mdp.stage_reward(t, s, static_cast<int>(k), j) +
                                 next[j - 1]);
        }
        q[k] = value;
        best = std::max(best, value);
      }
      auto& ties = out.optimal_actions[t - 1][s - 1];
      for (std::size_t k = 0; k < actions.size(); ++k) {
        if (q[k] >= best - kValueTolerance) ties.push_back(actions[k]);
      }
      out.policy.d[t - 1][s - 1] = ties.front();
      out.value[t - 1][s - 1] = best;
    }
  }
  return out;
}

double evaluate_policy(const FiniteHorizonMDP& mdp, const Policy& policy, int s) {
  const int num_states = mdp.states().count;
  if (!mdp.states().contains(s)) {
    throw std::invalid_argument("evaluate_policy: invalid initial state");
  }
  if (policy.d.size() != static_cast<std::size_t>(mdp.horizon() - 1)) {
    throw InvalidPolicyError("policy must cover decision epochs 1..N-1");
  }

  std::vector<double> dist(num_states, 0.0);
  dist[s - 1] = 1.0;
  double total = 0.0;

  for (int t = 1; t <= mdp.horizon() - 1; ++t) {
    std::vector<double> next_dist(num_states, 0.0);
    for (int i = 1; i <= num_states; ++i) {
      if (dist[i - 1] == 0.0) continue;
      const int a = policy.action(t, i);
      const int k = mdp.actions().index_of(i, a);  // throws if inadmissible
      const auto row = mdp.kernel().row(t, i, k);
      for (int j = 1; j <= num_states; ++j) {
        total += dist[i - 1] * row[j - 1] * mdp.stage_reward(t, i, k, j);
        next_dist[j - 1] += dist[i - 1] * row[j - 1];
      }
    }
    dist = std::move(next_dist);
  }
  for (int j = 1; j <= num_states; ++j) {
    total += dist[j - 1] * mdp.terminal_reward(j);
  }
  return total;
}

EnumerationResult enumerate_optimal(const FiniteHorizonMDP& mdp,
                                    std::uint64_t max_policies) {
  const int num_states = mdp.states().count;
  const int epochs = mdp.horizon() - 1;

  std::uint64_t total = 1;
  for (int t = 1; t <= epochs; ++t) {
    for (int s = 1; s <= num_states; ++s) {
      const std::uint64_t k = mdp.actions().for_state(s).size();
      if (total > max_policies / k) {
        throw SizeLimitError("enumerate_optimal: more than " +
                             std::to_string(max_policies) + " policies");
      }
      total *= k;
    }
  }

  EnumerationResult out;
  out.value.assign(num_states, -std::numeric_limits<double>::infinity());
  out.policy.assign(num_states, Policy{});

  // Mixed-radix counter over the (t, s) decision slots.
  std::vector<int> digits(static_cast<std::size_t>(epochs) * num_states, 0);
  Policy policy;
  policy.d.assign(epochs, std::vector<int>(num_states, 0));

  for (std::uint64_t index = 0; index < total; ++index) {
    for (int t = 1; t <= epochs; ++t) {
      for (int s = 1; s <= num_states; ++s) {
        const int digit = digits[static_cast<std::size_t>(t - 1) * num_states + (s - 1)];
        policy.d[t - 1][s - 1] = mdp.actions().for_state(s)[digit];
      }
    }
    for (int s = 1; s <= num_states; ++s) {
      const double value = evaluate_policy(mdp, policy, s);
      if (value > out.value[s - 1]) {
        out.value[s - 1] = value;
        out.policy[s - 1] = policy;
      }
    }
    // Increment the counter.
    for (std::size_t slot = 0; slot < digits.size(); ++slot) {
      const int s = static_cast<int>(slot % num_states) + 1;
      const int radix = static_cast<int>(mdp.actions().for_state(s).size());
      if (++digits[slot] < radix) break;
      digits[slot] = 0;
    }
  }
  return out;
}

nlohmann::json FiniteHorizonMDP::to_json() const {
  nlohmann::json doc;
  doc["J"] = states_.count;
  doc["N"] = horizon_;
  nlohmann::json actions = nlohmann::json::array();
  for (int s = 1; s <= states_.count; ++s) actions.push_back(actions_.for_state(s));
  doc["actions"] = std::move(actions);
  doc["kernel"] = kernel_.raw();
  doc["stage_reward"] = rewards_.stage;
  doc["terminal_reward"] = rewards_.terminal;
  return doc;
}

FiniteHorizonMDP FiniteHorizonMDP::from_json(const nlohmann::json& doc) {
  StateSpace states{doc.at("J").get<int>()};
  ActionSet actions(doc.at("actions").get<std::vector<std::vector<int>>>());
  const int horizon = doc.at("N").get<int>();
  TransitionKernel kernel(
      doc.at("kernel").get<std::vector<std::vector<std::vector<std::vector<double>>>>>(),
      states, actions);
  RewardSpec rewards{
      doc.at("stage_reward").get<std::vector<std::vector<std::vector<std::vector<double>>>>>(),
      doc.at("terminal_reward").get<std::vector<double>>()};
  return FiniteHorizonMDP(states, std::move(actions), horizon, std::move(kernel),
                          std::move(rewards));
}

}  // namespace dtr
