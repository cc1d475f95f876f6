#include "rmab/model.hpp"

#include <cmath>
#include <sstream>

#include "rmab/errors.hpp"

namespace rmab {

namespace {

constexpr double kRowSumTolerance = 1e-9;
// Slack for entries fractionally outside [0,1] from float noise; anything
// beyond this is a real bug in the caller.
constexpr double kEntrySlack = 1e-12;

std::string row_name(int action, int from) {
  std::ostringstream os;
  os << (action == 0 ? "passive" : "active") << " row "
     << to_string(state_from_index(from));
  return os.str();
}

}  // namespace

std::array<double, 4> TransitionModel::four_vector() const {
  return {to_engaging(Action::Passive, State::NotEngaging),
          to_engaging(Action::Passive, State::Engaging),
          to_engaging(Action::Active, State::NotEngaging),
          to_engaging(Action::Active, State::Engaging)};
}

std::array<double, 2> TransitionModel::passive_vector() const {
  return {to_engaging(Action::Passive, State::NotEngaging),
          to_engaging(Action::Passive, State::Engaging)};
}

TransitionModel make_model(double p_ne_e_passive, double p_e_e_passive,
                           double p_ne_e_active, double p_e_e_active) {
  TransitionModel m;
  m.prob[0][0] = {1.0 - p_ne_e_passive, p_ne_e_passive};
  m.prob[0][1] = {1.0 - p_e_e_passive, p_e_e_passive};
  m.prob[1][0] = {1.0 - p_ne_e_active, p_ne_e_active};
  m.prob[1][1] = {1.0 - p_e_e_active, p_e_e_active};
  return m;
}

TransitionModel validate_transition_model(const TransitionModel& m) {
  TransitionModel out = m;
  for (int a = 0; a < 2; ++a) {
    for (int s = 0; s < 2; ++s) {
      if (m.row_missing[a][s]) {
        throw DataError("transition model has missing " + row_name(a, s) +
                        "; impute before use");
      }
      double sum = 0.0;
      for (int t = 0; t < 2; ++t) {
        const double v = m.prob[a][s][t];
        if (!std::isfinite(v) || v < -kEntrySlack || v > 1.0 + kEntrySlack) {
          std::ostringstream os;
          os << "transition probability out of [0,1] in " << row_name(a, s)
             << ": " << v;
          throw DataError(os.str());
        }
        sum += v;
      }
      if (std::abs(sum - 1.0) > kRowSumTolerance) {
        std::ostringstream os;
        os << "transition matrix not row-stochastic: " << row_name(a, s)
           << " sums to " << sum;
        throw DataError(os.str());
      }
      for (int t = 0; t < 2; ++t) {
        double v = out.prob[a][s][t] / sum;
        if (v < 0.0) v = 0.0;
        if (v > 1.0) v = 1.0;
        out.prob[a][s][t] = v;
      }
    }
  }
  return out;
}

State evolve(State s, Action a, const TransitionModel& m, Rng& rng) {
  const double to_e = m.to_engaging(a, s);
  return rng.uniform01() < to_e ? State::Engaging : State::NotEngaging;
}

}  // namespace rmab
