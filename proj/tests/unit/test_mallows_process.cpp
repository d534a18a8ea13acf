#include <doctest.h>

#include <cmath>
#include <vector>

#include "mallows/mallows_process.hpp"
#include "mallows/stats.hpp"

using namespace mallows;
using doctest::Approx;

namespace {

std::vector<std::uint64_t> process_histogram(int n, double q_sim, double q_query, int replicas, std::uint64_t seed)
{
    std::uint64_t size = 1;
    for (int k = 2; k <= n; ++k) {
        size *= static_cast<std::uint64_t>(k);
    }
    std::vector<std::uint64_t> counts(size, 0);
    CounterRng base = CounterRng::from_seed(seed);
    for (int r = 0; r < replicas; ++r) {
        MallowsProcessPath pp = simulate_process(n, q_sim, base.split(static_cast<std::uint64_t>(r)));
        ++counts[permutation_rank(permutation_at(pp, q_query).values())];
    }
    return counts;
}

}  // namespace

TEST_CASE("process starts at the identity")
{
    MallowsProcessPath pp = simulate_process(8, 1.5, CounterRng::from_seed(1));
    CHECK(permutation_at(pp, 0.0) == Permutation::identity(8));
    CHECK(pp.ell_at(0.0) == InversionVector::zeros(8));
    CHECK_THROWS_AS(pp.ell_at(1.6), std::out_of_range);
    CHECK_THROWS_AS(permutation_at(pp, -0.1), std::out_of_range);
}

TEST_CASE("path validation")
{
    std::vector<JumpPath> bad{JumpPath(), JumpPath({0.1, 0.2})};
    CHECK_THROWS_AS(MallowsProcessPath(2, 1.0, bad), std::invalid_argument);
    std::vector<JumpPath> late{JumpPath(), JumpPath({1.5})};
    CHECK_THROWS_AS(MallowsProcessPath(2, 1.0, late), std::invalid_argument);
}

TEST_CASE("round trip, monotone inversions and single-value queries")
{
    CounterRng base = CounterRng::from_seed(2);
    for (int r = 0; r < 50; ++r) {
        MallowsProcessPath pp = simulate_process(25, 2.0, base.split(static_cast<std::uint64_t>(r)));
        InversionVector prev = InversionVector::zeros(25);
        for (double q = 0.0; q <= 2.0; q += 0.05) {
            InversionVector ell = pp.ell_at(q);
            Permutation p = permutation_at(pp, q);
            REQUIRE(left_inversion_vector(p) == ell);
            for (int i = 1; i <= 25; ++i) {
                REQUIRE(ell[i] >= prev[i]);
                REQUIRE(value_at(pp, i, q) == p(i));
            }
            prev = ell;
        }
    }
}

TEST_CASE("unit increments of Inv")
{
    MallowsProcessPath empty(3, 1.0, std::vector<JumpPath>(3));
    CHECK(check_unit_inv_increments(empty).ok);

    CounterRng base = CounterRng::from_seed(3);
    for (int r = 0; r < 20; ++r) {
        CHECK(check_unit_inv_increments(simulate_process(60, 1.2, base.split(static_cast<std::uint64_t>(r)))).ok);
    }

    std::vector<JumpPath> clash{JumpPath(), JumpPath({0.5}), JumpPath({0.5})};
    auto res = check_unit_inv_increments(MallowsProcessPath(3, 1.0, clash));
    CHECK_FALSE(res.ok);
    REQUIRE(res.first_violation.has_value());
    CHECK(*res.first_violation == 0.5);
}

TEST_CASE("every jump is one transposition")
{
    CounterRng base = CounterRng::from_seed(4);
    for (int r = 0; r < 20; ++r) {
        MallowsProcessPath pp = simulate_process(40, 1.5, base.split(static_cast<std::uint64_t>(r)));
        PermutationSweep sweep(Permutation::identity(40));
        for (const JumpEvent& e : merged_jumps(pp, 0.0, pp.q_horizon())) {
            Permutation before = sweep.snapshot();
            int partner = sweep.apply(e.index);
            REQUIRE(partner < e.index);
            Permutation after = permutation_at(pp, e.time);
            REQUIRE(sweep.snapshot() == after);
            REQUIRE(before.transposed(e.index, partner) == after);
            REQUIRE(inv_count(after) == inv_count(before) + 1);
        }
    }
}

TEST_CASE("process marginals match the Mallows law")
{
    struct Case
    {
        int n;
        double q;
    };
    for (Case c : {Case{5, 0.7}, Case{5, 1.0}, Case{4, 0.3}, Case{4, 2.0}}) {
        auto exact = enumerate_mallows(c.n, c.q);
        auto counts = process_histogram(c.n, c.q, c.q, 1'000'000, 100 + static_cast<std::uint64_t>(c.n));
        CHECK_MESSAGE(stats::tv_distance(exact.masses(), counts) < 0.01, "n=" << c.n << " q=" << c.q);
        CHECK_MESSAGE(stats::chi_square_test(counts, exact.masses()).p_value > 1e-3, "n=" << c.n << " q=" << c.q);
    }
}

TEST_CASE("querying inside a longer horizon has the same law")
{
    auto exact = enumerate_mallows(4, 0.5);
    auto restricted = process_histogram(4, 2.5, 0.5, 200'000, 7);
    auto direct = process_histogram(4, 0.5, 0.5, 200'000, 8);
    CHECK(stats::tv_distance(exact.masses(), restricted) < 0.01);
    CHECK(stats::chi_square_test(restricted, exact.masses()).p_value > 1e-3);
    double tv = 0.0;
    for (std::size_t k = 0; k < direct.size(); ++k) {
        tv += std::abs(static_cast<double>(restricted[k]) - static_cast<double>(direct[k])) / 200'000.0;
    }
    CHECK(0.5 * tv < 0.01);
}

TEST_CASE("trajectories")
{
    std::vector<double> grid{-3.0, 0.0, 3.0};
    MallowsProcessPath one = simulate_process(1, std::exp(3.0), CounterRng::from_seed(5));
    auto tr = trajectory(one, 1, grid);
    for (double x : tr.positions) {
        CHECK(x == 1.0);
    }

    // X_i(0) is uniform on {1/n, ..., 1}.
    constexpr int n = 10;
    std::vector<std::uint64_t> counts(n, 0);
    CounterRng base = CounterRng::from_seed(6);
    std::vector<double> zero{0.0};
    for (int r = 0; r < 100'000; ++r) {
        MallowsProcessPath pp = simulate_process(n, 1.0, base.split(static_cast<std::uint64_t>(r)));
        double x = trajectory(pp, 3, zero).positions[0];
        ++counts[static_cast<std::size_t>(std::lround(x * n)) - 1];
    }
    CHECK(stats::chi_square_test(counts, std::vector<double>(n, 1.0 / n)).p_value > 1e-3);

    // Far in the past the permutation is the identity with high probability.
    const int m = 50;
    std::vector<double> past{-2000.0};
    int at_home = 0;
    for (int r = 0; r < 200; ++r) {
        MallowsProcessPath pp = simulate_process(m, 1.0, base.split(1'000'000 + static_cast<std::uint64_t>(r)));
        at_home += trajectory(pp, 17, past).positions[0] == Approx(17.0 / m) ? 1 : 0;
    }
    CHECK(at_home >= 190);

    MallowsProcessPath short_pp = simulate_process(5, 1.0, CounterRng::from_seed(7));
    CHECK_THROWS_AS(trajectory(short_pp, 2, grid), std::out_of_range);
}
