#pragma once

#include <array>
#include <string>

#include "rmab/rng.hpp"

namespace rmab {

// Weekly engagement state of one beneficiary. The numeric encoding
// NE -> 0, E -> 1 is fixed repo-wide and doubles as the reward.
enum class State : int { NotEngaging = 0, Engaging = 1 };

// Weekly planner action on one arm: place a service call or not.
enum class Action : int { Passive = 0, Active = 1 };

constexpr int idx(State s) { return static_cast<int>(s); }
constexpr int idx(Action a) { return static_cast<int>(a); }

constexpr double reward(State s) { return static_cast<double>(idx(s)); }

constexpr State state_from_index(int i) {
  return i == 0 ? State::NotEngaging : State::Engaging;
}

inline const char* to_string(State s) {
  return s == State::NotEngaging ? "NE" : "E";
}
inline const char* to_string(Action a) {
  return a == Action::Passive ? "p" : "a";
}

// Two-state Gilbert-Elliot beneficiary dynamics: one row-stochastic 2x2
// matrix per action, rows indexed by current state, columns by next state
// (column 0 = NE, column 1 = E).
//
// Rows estimated from zero samples carry a `missing` flag instead of
// fabricated numbers; rows filled in by the imputation step are flagged
// `imputed`. Both flag sets are indexed [action][from-state].
struct TransitionModel {
  // prob[action][from][to]
  std::array<std::array<std::array<double, 2>, 2>, 2> prob{};
  std::array<std::array<bool, 2>, 2> row_missing{};
  std::array<std::array<bool, 2>, 2> row_imputed{};

  double p(Action a, State from, State to) const {
    return prob[idx(a)][idx(from)][idx(to)];
  }
  // Probability of landing in E from `from` under `a`.
  double to_engaging(Action a, State from) const {
    return prob[idx(a)][idx(from)][idx(State::Engaging)];
  }
  bool any_missing() const {
    return row_missing[0][0] || row_missing[0][1] || row_missing[1][0] ||
           row_missing[1][1];
  }
  // The four free parameters in the order
  // (P^p_{NE,E}, P^p_{E,E}, P^a_{NE,E}, P^a_{E,E}).
  std::array<double, 4> four_vector() const;
  // Passive free parameters (P^p_{NE,E}, P^p_{E,E}).
  std::array<double, 2> passive_vector() const;
};

// Builds a model from the four free P_{s,E} parameters.
TransitionModel make_model(double p_ne_e_passive, double p_e_e_passive,
                           double p_ne_e_active, double p_e_e_active);

// Checks both matrices are row-stochastic with entries in [0, 1].
// Rows whose sum is within 1e-9 of 1 are renormalized silently; larger
// deviations, out-of-range entries and missing rows raise DataError
// naming the offending matrix and row.
TransitionModel validate_transition_model(const TransitionModel& m);

// One stochastic step: draws the next state from the row of the action's
// matrix indexed by the current state. Deterministic given the rng state.
State evolve(State s, Action a, const TransitionModel& m, Rng& rng);

}  // namespace rmab
