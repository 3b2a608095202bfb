#include "fsfm/retention.hpp"

#include <algorithm>
#include <cmath>

#include "fsfm/error.hpp"

namespace fsfm {

double retention(double t_days, double lambda) {
    if (t_days < 0.0) throw Error(ErrorCode::NegativeTime, "elapsed time must be >= 0");
    if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidConfig, "decay rate must be > 0");
    return std::exp(-lambda * t_days);
}

ReinforcementCoefficients ReinforcementCoefficients::from(const PolicyConfig& c) {
    return {c.kappa_frequency, c.kappa_emotional, c.kappa_contextual, c.kappa_social};
}

double reinforcement_factor(const ReinforcementSignal& s, std::int64_t frequency,
                            const ReinforcementCoefficients& k) {
    if (!s.security_compliance) return 0.0;
    const double n = static_cast<double>(std::max<std::int64_t>(frequency, 0));
    return (1.0 + k.frequency * std::log1p(n)) * (1.0 + k.emotional * s.emotional_valence) *
           (1.0 + k.contextual * s.contextual_relevance) * (1.0 + k.social * s.social_consensus);
}

double retention_extended(double t_days, double lambda, const ReinforcementSignal& signal,
                          std::int64_t frequency, const ReinforcementCoefficients& k) {
    const double base = retention(t_days, lambda);
    return std::min(1.0, base * reinforcement_factor(signal, frequency, k));
}

double staircase_value(double day, double lambda, const std::vector<ReinforcementEvent>& events) {
    double anchor_day = 0.0;
    double plateau = 1.0;
    for (const auto& e : events) {
        if (e.at_day > day) break;
        anchor_day = e.at_day;
        plateau = e.plateau;
    }
    return std::clamp(plateau * std::exp(-lambda * (day - anchor_day)), 0.0, 1.0);
}

RetentionTrajectory simulate_staircase(double lambda, std::vector<ReinforcementEvent> events,
                                       double horizon_days, double step_days) {
    if (!(step_days > 0.0)) throw Error(ErrorCode::InvalidConfig, "step must be > 0");
    if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidConfig, "decay rate must be > 0");
    if (horizon_days < 0.0) throw Error(ErrorCode::NegativeTime, "horizon must be >= 0");
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        if (e.at_day < 0.0) throw Error(ErrorCode::NegativeTime, "event day must be >= 0");
        if (!(e.plateau > 0.0 && e.plateau <= 1.0)) {
            throw Error(ErrorCode::InvalidConfig, "event plateau must lie in (0, 1]");
        }
        if (i > 0 && !(e.at_day > events[i - 1].at_day)) {
            throw Error(ErrorCode::NonMonotonicEvents, "event days must be strictly increasing");
        }
    }

    std::vector<double> days;
    const auto steps = static_cast<std::int64_t>(std::floor(horizon_days / step_days + 1e-9));
    for (std::int64_t i = 0; i <= steps; ++i) days.push_back(static_cast<double>(i) * step_days);
    for (const auto& e : events) {
        if (e.at_day > horizon_days) continue;
        // Snap a grid sample that lands on an event (up to rounding) onto the event day.
        auto near = std::find_if(days.begin(), days.end(),
                                 [&](double d) { return std::fabs(d - e.at_day) < 1e-9; });
        if (near != days.end()) {
            *near = e.at_day;
        } else {
            days.push_back(e.at_day);
        }
    }
    std::sort(days.begin(), days.end());

    RetentionTrajectory out;
    out.lambda = lambda;
    out.events = std::move(events);
    out.samples.reserve(days.size());
    for (double d : days) out.samples.push_back({d, staircase_value(d, lambda, out.events)});
    return out;
}

}  // namespace fsfm
