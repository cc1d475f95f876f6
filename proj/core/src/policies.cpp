#include "rmab/policies.hpp"

#include <algorithm>
#include <sstream>

#include "rmab/errors.hpp"

namespace rmab {

namespace {

// Top-m arm ids by descending score, arm id ascending on ties; result is
// returned in ascending arm id order.
std::vector<int> top_m_by_score(std::vector<std::pair<double, int>>& scored,
                                int m) {
  const auto cmp = [](const std::pair<double, int>& a,
                      const std::pair<double, int>& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  };
  const std::size_t take = std::min<std::size_t>(m, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + take, scored.end(), cmp);
  std::vector<int> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(scored[i].second);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

const char* to_string(PolicyKind p) {
  switch (p) {
    case PolicyKind::Whittle: return "whittle";
    case PolicyKind::RoundRobin: return "round_robin";
    case PolicyKind::Random: return "random";
    case PolicyKind::Myopic: return "myopic";
    case PolicyKind::Csoc: return "csoc";
  }
  return "?";
}

PolicyKind policy_from_string(const std::string& s) {
  if (s == "whittle") return PolicyKind::Whittle;
  if (s == "round_robin" || s == "rr") return PolicyKind::RoundRobin;
  if (s == "random") return PolicyKind::Random;
  if (s == "myopic") return PolicyKind::Myopic;
  if (s == "csoc") return PolicyKind::Csoc;
  throw DataError("unknown policy: " + s);
}

std::vector<int> eligible_arms(const CohortState& cohort, int eta) {
  std::vector<int> out;
  out.reserve(cohort.arms.size());
  for (std::size_t i = 0; i < cohort.arms.size(); ++i) {
    const int since = cohort.arms[i].weeks_since_last_call;
    if (since == kNeverCalled || since >= eta) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> select_whittle(const CohortState& cohort,
                                const IndexTable& table, int m,
                                std::span<const int> eligible) {
  std::vector<std::pair<double, int>> scored;
  scored.reserve(eligible.size());
  for (const int id : eligible) {
    const auto& arm = cohort.arms[id];
    if (arm.cluster < 0 || arm.cluster >= table.clusters()) {
      std::ostringstream os;
      os << "index table has no entry for cluster " << arm.cluster
         << " (arm " << id << ")";
      throw DataError(os.str());
    }
    scored.emplace_back(table.at(arm.cluster, arm.state), id);
  }
  return top_m_by_score(scored, m);
}

std::vector<int> select_round_robin(const CohortState& cohort, int m,
                                    std::span<const int> eligible) {
  std::vector<int> order(eligible.begin(), eligible.end());
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& aa = cohort.arms[a];
    const auto& ab = cohort.arms[b];
    const bool never_a = aa.weeks_since_last_call == kNeverCalled;
    const bool never_b = ab.weeks_since_last_call == kNeverCalled;
    if (never_a != never_b) return never_a;
    if (!never_a && aa.weeks_since_last_call != ab.weeks_since_last_call) {
      return aa.weeks_since_last_call > ab.weeks_since_last_call;
    }
    if (aa.enrollment_day != ab.enrollment_day) {
      return aa.enrollment_day < ab.enrollment_day;
    }
    return a < b;
  });
  const std::size_t take = std::min<std::size_t>(m, order.size());
  std::vector<int> out(order.begin(), order.begin() + take);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> select_myopic(const CohortState& cohort,
                               std::span<const TransitionModel> cluster_models,
                               int m, std::span<const int> eligible) {
  std::vector<std::pair<double, int>> scored;
  scored.reserve(eligible.size());
  for (const int id : eligible) {
    const auto& arm = cohort.arms[id];
    if (arm.cluster < 0 ||
        arm.cluster >= static_cast<int>(cluster_models.size())) {
      std::ostringstream os;
      os << "no model for cluster " << arm.cluster << " (arm " << id << ")";
      throw DataError(os.str());
    }
    const double score =
        cluster_models[arm.cluster].to_engaging(Action::Active, arm.state);
    scored.emplace_back(score, id);
  }
  return top_m_by_score(scored, m);
}

std::vector<int> select_random(int m, std::span<const int> eligible,
                               Rng& rng) {
  std::vector<int> pool(eligible.begin(), eligible.end());
  const std::size_t take = std::min<std::size_t>(m, pool.size());
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  std::vector<int> out(pool.begin(), pool.begin() + take);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> select_csoc() { return {}; }

}  // namespace rmab
