#include "mallows/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace mallows::stats {

double tv_distance(std::span<const double> probabilities, std::span<const std::uint64_t> counts)
{
    if (probabilities.size() != counts.size()) {
        throw std::invalid_argument("tv_distance: support size mismatch");
    }
    double total = 0.0;
    for (auto c : counts) {
        total += static_cast<double>(c);
    }
    if (total <= 0.0) {
        throw std::invalid_argument("tv_distance: empty histogram");
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        acc += std::abs(probabilities[k] - static_cast<double>(counts[k]) / total);
    }
    return 0.5 * acc;
}

ChiSquareResult chi_square_test(std::span<const std::uint64_t> observed, std::span<const double> probabilities,
                                double min_expected)
{
    if (observed.size() != probabilities.size() || observed.empty()) {
        throw std::invalid_argument("chi_square_test: support size mismatch");
    }
    double total = 0.0;
    for (auto c : observed) {
        total += static_cast<double>(c);
    }

    // Pool cells in ascending order of expected count until each pooled cell
    // reaches min_expected.
    std::vector<std::size_t> order(observed.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return probabilities[a] < probabilities[b]; });

    std::vector<double> obs;
    std::vector<double> exp;
    double pooled_obs = 0.0;
    double pooled_exp = 0.0;
    for (std::size_t k : order) {
        pooled_obs += static_cast<double>(observed[k]);
        pooled_exp += probabilities[k] * total;
        if (pooled_exp >= min_expected) {
            obs.push_back(pooled_obs);
            exp.push_back(pooled_exp);
            pooled_obs = 0.0;
            pooled_exp = 0.0;
        }
    }
    if (pooled_exp > 0.0 || pooled_obs > 0.0) {
        if (exp.empty()) {
            obs.push_back(pooled_obs);
            exp.push_back(pooled_exp);
        } else {
            obs.back() += pooled_obs;
            exp.back() += pooled_exp;
        }
    }

    ChiSquareResult result;
    result.dof = static_cast<int>(obs.size()) - 1;
    for (std::size_t k = 0; k < obs.size(); ++k) {
        if (exp[k] > 0.0) {
            result.statistic += (obs[k] - exp[k]) * (obs[k] - exp[k]) / exp[k];
        } else if (obs[k] > 0.0) {
            result.statistic = INFINITY;
        }
    }
    if (result.dof <= 0) {
        result.p_value = 1.0;
    } else if (!std::isfinite(result.statistic)) {
        result.p_value = 0.0;
    } else {
        result.p_value = boost::math::gamma_q(0.5 * result.dof, 0.5 * result.statistic);
    }
    return result;
}

double kolmogorov_survival(double lambda)
{
    if (lambda <= 0.0) {
        return 1.0;
    }
    if (lambda < 0.3) {
        // The alternating series converges slowly here; use the theta-function form.
        double sum = 0.0;
        double c = M_PI * M_PI / (8.0 * lambda * lambda);
        for (int k = 1; k < 50; k += 2) {
            sum += std::exp(-static_cast<double>(k * k) * c);
        }
        return 1.0 - std::sqrt(2.0 * M_PI) / lambda * sum;
    }
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-18) {
            break;
        }
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

double ks_p_value(double d, std::size_t n)
{
    double sn = std::sqrt(static_cast<double>(n));
    return kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
}

}  // namespace

KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf)
{
    if (sample.empty()) {
        throw std::invalid_argument("ks_test: empty sample");
    }
    std::sort(sample.begin(), sample.end());
    const auto n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t k = 0; k < sample.size(); ++k) {
        double f = cdf(sample[k]);
        d = std::max({d, f - static_cast<double>(k) / n, static_cast<double>(k + 1) / n - f});
    }
    return {d, ks_p_value(d, sample.size())};
}

KsResult ks_test_discrete(std::span<const int> sample, const std::function<double(int)>& cdf)
{
    if (sample.empty()) {
        throw std::invalid_argument("ks_test_discrete: empty sample");
    }
    int top = *std::max_element(sample.begin(), sample.end());
    if (*std::min_element(sample.begin(), sample.end()) < 0) {
        throw std::invalid_argument("ks_test_discrete: negative value");
    }
    std::vector<std::uint64_t> hist(static_cast<std::size_t>(top) + 1, 0);
    for (int v : sample) {
        ++hist[static_cast<std::size_t>(v)];
    }
    const auto n = static_cast<double>(sample.size());
    double d = 0.0;
    double cum = 0.0;
    for (int v = 0; v <= top; ++v) {
        cum += static_cast<double>(hist[static_cast<std::size_t>(v)]);
        d = std::max(d, std::abs(cum / n - cdf(v)));
    }
    return {d, ks_p_value(d, sample.size())};
}

double ks_distance_two_sample(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("ks_distance_two_sample: empty sample");
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t ia = 0;
    std::size_t ib = 0;
    double d = 0.0;
    while (ia < a.size() && ib < b.size()) {
        double v = std::min(a[ia], b[ib]);
        while (ia < a.size() && a[ia] <= v) {
            ++ia;
        }
        while (ib < b.size() && b[ib] <= v) {
            ++ib;
        }
        d = std::max(d, std::abs(static_cast<double>(ia) / static_cast<double>(a.size()) -
                                 static_cast<double>(ib) / static_cast<double>(b.size())));
    }
    return d;
}

double quantile(std::vector<double> data, double prob)
{
    if (data.empty()) {
        throw std::invalid_argument("quantile: empty data");
    }
    std::sort(data.begin(), data.end());
    double h = (static_cast<double>(data.size()) - 1.0) * std::clamp(prob, 0.0, 1.0);
    auto lo = static_cast<std::size_t>(std::floor(h));
    std::size_t hi = std::min(lo + 1, data.size() - 1);
    return data[lo] + (h - static_cast<double>(lo)) * (data[hi] - data[lo]);
}

double median(std::vector<double> data) { return quantile(std::move(data), 0.5); }

Interval bootstrap_median_ci(std::span<const double> data, double level, int resamples, CounterRng rng)
{
    if (data.empty() || resamples <= 0) {
        throw std::invalid_argument("bootstrap_median_ci: empty input");
    }
    std::vector<double> medians;
    medians.reserve(static_cast<std::size_t>(resamples));
    std::vector<double> resample(data.size());
    for (int b = 0; b < resamples; ++b) {
        for (auto& v : resample) {
            v = data[rng.below(data.size())];
        }
        medians.push_back(median(resample));
    }
    double tail = 0.5 * (1.0 - level);
    return {quantile(medians, tail), quantile(medians, 1.0 - tail)};
}

namespace {

double mean_pair_distance(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b,
                          bool same)
{
    // V-statistic form: the diagonal contributes zero for a sample against itself.
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = same ? i + 1 : 0; j < b.size(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a[i].size(); ++k) {
                double d = a[i][k] - b[j][k];
                s += d * d;
            }
            acc += std::sqrt(s);
        }
    }
    if (same) {
        acc *= 2.0;
    }
    return acc / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

}  // namespace

double energy_distance(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b)
{
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("energy_distance: empty sample");
    }
    return 2.0 * mean_pair_distance(a, b, false) - mean_pair_distance(a, a, true) -
           mean_pair_distance(b, b, true);
}

}  // namespace mallows::stats
