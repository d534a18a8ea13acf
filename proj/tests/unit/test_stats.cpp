#include <doctest.h>

#include <cmath>
#include <vector>

#include "mallows/stats.hpp"

using namespace mallows;
using doctest::Approx;

TEST_CASE("tv distance")
{
    std::vector<double> p{0.5, 0.5};
    std::vector<std::uint64_t> c{3, 1};
    CHECK(stats::tv_distance(p, c) == Approx(0.25));
    std::vector<std::uint64_t> bad{1};
    CHECK_THROWS(stats::tv_distance(p, bad));
}

TEST_CASE("chi-square p-values")
{
    // Statistic 3.841459 on one degree of freedom sits at the 5% point.
    std::vector<double> p{0.5, 0.5};
    double delta = std::sqrt(3.841459 * 1000.0 / 4.0);
    std::vector<std::uint64_t> c{static_cast<std::uint64_t>(std::lround(500 + delta)),
                                 static_cast<std::uint64_t>(std::lround(500 - delta))};
    auto r = stats::chi_square_test(c, p);
    CHECK(r.dof == 1);
    CHECK(r.p_value == Approx(0.05).epsilon(0.05));

    std::vector<std::uint64_t> exact{500, 500};
    CHECK(stats::chi_square_test(exact, p).p_value == Approx(1.0));
}

TEST_CASE("chi-square pools sparse cells")
{
    std::vector<double> p{0.97, 0.01, 0.01, 0.01};
    std::vector<std::uint64_t> c{97, 1, 1, 1};
    auto r = stats::chi_square_test(c, p);
    CHECK(r.dof == 0);
    CHECK(r.p_value == 1.0);
}

TEST_CASE("kolmogorov survival")
{
    CHECK(stats::kolmogorov_survival(0.0) == 1.0);
    CHECK(stats::kolmogorov_survival(1.358) == Approx(0.05).epsilon(0.01));
    CHECK(stats::kolmogorov_survival(1.628) == Approx(0.01).epsilon(0.02));
    // Both series agree where they meet.
    CHECK(stats::kolmogorov_survival(0.2999999) == Approx(stats::kolmogorov_survival(0.3)).epsilon(1e-6));
}

TEST_CASE("ks tests accept matching laws")
{
    std::vector<double> grid;
    for (int k = 0; k < 1000; ++k) {
        grid.push_back((k + 0.5) / 1000.0);
    }
    auto r = stats::ks_test(grid, [](double x) { return x; });
    CHECK(r.statistic == Approx(0.0005));
    CHECK(r.p_value > 0.99);

    std::vector<int> ints{0, 1, 2, 3, 0, 1, 2, 3};
    auto d = stats::ks_test_discrete(ints, [](int v) { return (v + 1) / 4.0; });
    CHECK(d.statistic == Approx(0.0));
}

TEST_CASE("quantiles and two-sample distance")
{
    CHECK(stats::quantile({1, 2, 3, 4}, 0.25) == Approx(1.75));
    CHECK(stats::median({5, 1, 3}) == 3.0);
    CHECK(stats::ks_distance_two_sample({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(stats::ks_distance_two_sample({1, 2}, {3, 4}) == 1.0);
}

TEST_CASE("bootstrap interval brackets the median")
{
    std::vector<double> data;
    for (int k = 0; k < 101; ++k) {
        data.push_back(k);
    }
    auto ci = stats::bootstrap_median_ci(data, 0.95, 500, CounterRng::from_seed(1));
    CHECK(ci.lo <= 50.0);
    CHECK(ci.hi >= 50.0);
    CHECK(ci.lo < ci.hi);
}

TEST_CASE("energy distance")
{
    std::vector<std::vector<double>> a{{0.0}, {1.0}};
    std::vector<std::vector<double>> b{{0.0}, {1.0}};
    CHECK(stats::energy_distance(a, b) == Approx(0.0));
    std::vector<std::vector<double>> c{{10.0}, {11.0}};
    CHECK(stats::energy_distance(a, c) > 15.0);
}
