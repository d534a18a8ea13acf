#pragma once

// Goodness-of-fit and summary statistics used by the experiments.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mallows/rng.hpp"

namespace mallows::stats {

/// (1/2) * sum |p - counts/total| over the full support.
double tv_distance(std::span<const double> probabilities, std::span<const std::uint64_t> counts);

struct ChiSquareResult
{
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

/// Pearson chi-square against exact cell probabilities. Cells whose expected
/// count falls below min_expected are pooled (from the tail) before testing.
ChiSquareResult chi_square_test(std::span<const std::uint64_t> observed, std::span<const double> probabilities,
                                double min_expected = 5.0);

struct KsResult
{
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_survival(double lambda);

/// One-sample KS test of continuous data against a CDF.
KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf);

/// One-sample KS test of nonnegative integer data against a discrete CDF
/// (evaluated on the integer support). The asymptotic p-value is conservative.
KsResult ks_test_discrete(std::span<const int> sample, const std::function<double(int)>& cdf);

/// Two-sample KS distance sup |F1 - F2|.
double ks_distance_two_sample(std::vector<double> a, std::vector<double> b);

/// Linear-interpolation quantile (type 7) of unsorted data.
double quantile(std::vector<double> data, double prob);
double median(std::vector<double> data);

struct Interval
{
    double lo = 0.0;
    double hi = 0.0;
};

/// Percentile bootstrap confidence interval for the median.
Interval bootstrap_median_ci(std::span<const double> data, double level, int resamples, CounterRng rng);

/// Energy distance between two samples of points in R^d (rows are points).
double energy_distance(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b);

}  // namespace mallows::stats
