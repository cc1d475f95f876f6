#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rmab/model.hpp"
#include "rmab/rng.hpp"
#include "rmab/whittle.hpp"

namespace rmab {

constexpr int kNeverCalled = -1;

// Snapshot of the cohort at the start of a week, everything a policy may
// look at. Selection functions are pure; the caller owns state mutation
// between weeks.
struct CohortState {
  struct Arm {
    State state = State::NotEngaging;
    int cluster = 0;
    std::int64_t enrollment_day = 0;
    int weeks_since_last_call = kNeverCalled;
  };
  std::vector<Arm> arms;
  int week = 0;
};

enum class PolicyKind { Whittle, RoundRobin, Random, Myopic, Csoc };

const char* to_string(PolicyKind p);
PolicyKind policy_from_string(const std::string& s);

// Arms allowed to receive a call this week: never called, or last called
// at least eta weeks ago (the post-call sleeping window). Ascending ids.
std::vector<int> eligible_arms(const CohortState& cohort, int eta);

// The m eligible arms with the largest precomputed index for their
// (cluster, current state); ties break by ascending arm id. Returns
// ascending arm ids. Throws DataError when an arm's cluster is not
// covered by the table.
std::vector<int> select_whittle(const CohortState& cohort,
                                const IndexTable& table, int m,
                                std::span<const int> eligible);

// Systematic rotation: never-called arms first in ascending enrollment
// order, then previously-called arms longest-ago first, so the cycle
// restarts in enrollment order once everyone has been reached. Sleeping
// arms are skipped and the next in order substituted.
std::vector<int> select_round_robin(const CohortState& cohort, int m,
                                    std::span<const int> eligible);

// Greedy on the immediate next step: ranks eligible arms by the engagement
// probability a call would buy right now, P^a_{s,E} for the arm's current
// state. Ties break by ascending arm id.
std::vector<int> select_myopic(const CohortState& cohort,
                               std::span<const TransitionModel> cluster_models,
                               int m, std::span<const int> eligible);

// Uniform sample of min(m, |eligible|) arms without replacement.
std::vector<int> select_random(int m, std::span<const int> eligible, Rng& rng);

// Current standard of care: no planner-initiated calls, ever.
std::vector<int> select_csoc();

}  // namespace rmab
