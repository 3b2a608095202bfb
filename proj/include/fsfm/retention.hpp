#pragma once

#include <cstdint>
#include <vector>

#include "fsfm/config.hpp"
#include "fsfm/types.hpp"

namespace fsfm {

/// Classical exponential forgetting curve, exp(-lambda * t), t in days.
/// Throws Error{NegativeTime} for t < 0.
double retention(double t_days, double lambda);

struct ReinforcementCoefficients {
    double frequency = 0.5;
    double emotional = 0.5;
    double contextual = 0.5;
    double social = 0.5;

    static ReinforcementCoefficients from(const PolicyConfig& config);
};

/// Multiplicative reinforcement factor applied on top of the classical curve:
///   (1 + kf ln(1 + n)) (1 + ke valence) (1 + kc relevance) (1 + ks consensus),
/// or 0 when the signal is not security compliant.
double reinforcement_factor(const ReinforcementSignal& signal, std::int64_t frequency,
                            const ReinforcementCoefficients& k);

/// min(1, retention(t, lambda) * reinforcement_factor(...)).
double retention_extended(double t_days, double lambda, const ReinforcementSignal& signal,
                          std::int64_t frequency, const ReinforcementCoefficients& k = {});

struct ReinforcementEvent {
    double at_day = 0.0;
    double plateau = 1.0;  // (0, 1]
};

struct RetentionSample {
    double day = 0.0;
    double retention = 0.0;
};

struct RetentionTrajectory {
    std::vector<RetentionSample> samples;
    double lambda = 0.0;
    std::vector<ReinforcementEvent> events;
};

/// Value of the staircase curve at `day`: plateau * exp(-lambda (day - t_event)) for the
/// latest event at or before `day`, starting from plateau 1 at day 0.
double staircase_value(double day, double lambda, const std::vector<ReinforcementEvent>& events);

/// Samples the staircase curve from 0 to horizon_days every step_days. Event days are
/// always included as samples so each reset shows up at its exact plateau.
/// Throws Error{NonMonotonicEvents} or Error{InvalidConfig} on bad arguments.
RetentionTrajectory simulate_staircase(double lambda, std::vector<ReinforcementEvent> events,
                                       double horizon_days, double step_days);

}  // namespace fsfm
