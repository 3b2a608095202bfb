#pragma once

#include <span>

namespace fsfm {

struct WelchResult {
    double t = 0.0;
    double p_value = 1.0;  // two-tailed
    double dof = 0.0;      // Welch-Satterthwaite
};

/// Welch's unequal-variance two-sample t-test, two-tailed.
/// Throws Error{DegenerateSamples} if either sample has fewer than two values or
/// both have zero variance.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

struct Summary {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation (n - 1); 0 for n < 2
    double min = 0.0;
    double max = 0.0;
    double p95 = 0.0;  // linear interpolation between order statistics
};

Summary summarize(std::span<const double> values);

double mean(std::span<const double> values);
/// Unbiased sample variance; 0 for fewer than two values.
double sample_variance(std::span<const double> values);

}  // namespace fsfm
