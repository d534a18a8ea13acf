#include "mallows/mallows_process.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mallows {

namespace {

constexpr double kHorizonSlack = 1e-14;

}  // namespace

MallowsProcessPath::MallowsProcessPath(int n, double q_horizon, std::vector<JumpPath> paths)
    : n_{n}, q_horizon_{q_horizon}, paths_{std::move(paths)}
{
    if (n < 1 || static_cast<int>(paths_.size()) != n) {
        throw std::invalid_argument("MallowsProcessPath: need n >= 1 paths");
    }
    if (!(q_horizon >= 0.0)) {
        throw std::invalid_argument("MallowsProcessPath: q_horizon must be >= 0");
    }
    for (int i = 1; i <= n; ++i) {
        const JumpPath& p = path(i);
        if (p.initial_state() != 0 || static_cast<int>(p.jump_count()) > i - 1) {
            throw std::invalid_argument("MallowsProcessPath: path " + std::to_string(i) + " exceeds state " +
                                        std::to_string(i - 1));
        }
        if (!p.empty() && (p.jump_times().front() < 0.0 || p.jump_times().back() > q_horizon)) {
            throw std::invalid_argument("MallowsProcessPath: path " + std::to_string(i) +
                                        " has jumps outside [0, q_horizon]");
        }
    }
}

std::size_t MallowsProcessPath::total_jumps() const
{
    std::size_t total = 0;
    for (const auto& p : paths_) {
        total += p.jump_count();
    }
    return total;
}

void MallowsProcessPath::check_time(double q) const
{
    if (!(q >= 0.0) || q > q_horizon_ * (1.0 + kHorizonSlack)) {
        throw std::out_of_range("MallowsProcessPath: query time " + std::to_string(q) + " outside [0, " +
                                std::to_string(q_horizon_) + "]");
    }
}

void MallowsProcessPath::ell_into(double q, std::span<int> out) const
{
    check_time(q);
    for (int i = 1; i <= n_; ++i) {
        out[static_cast<std::size_t>(i - 1)] = path(i).state_at(q);
    }
}

InversionVector MallowsProcessPath::ell_at(double q) const
{
    std::vector<int> ell(static_cast<std::size_t>(n_));
    ell_into(q, ell);
    return InversionVector(std::move(ell));
}

MallowsProcessPath simulate_process(int n, double q_horizon, const CounterRng& rng, const ProcessOptions& options)
{
    if (n < 1 || !(q_horizon >= 0.0)) {
        throw std::invalid_argument("simulate_process: need n >= 1 and q_horizon >= 0");
    }
    std::vector<JumpPath> paths;
    paths.reserve(static_cast<std::size_t>(n));
    BirthOptions birth;
    birth.max_jumps = options.max_jumps;
    for (int i = 1; i <= n; ++i) {
        CounterRng stream = rng.split(static_cast<std::uint64_t>(i));
        paths.push_back(simulate_birth(RateSpec::finite(i), q_horizon, options.dominator, stream, birth));
    }
    return MallowsProcessPath(n, q_horizon, std::move(paths));
}

Permutation permutation_at(const MallowsProcessPath& pp, double q)
{
    std::vector<int> ell(static_cast<std::size_t>(pp.n()));
    pp.ell_into(q, ell);
    std::vector<int> out(ell.size());
    decode_into(ell, out);
    return Permutation(std::move(out));
}

int value_at(const MallowsProcessPath& pp, int i, double q)
{
    if (i < 1 || i > pp.n()) {
        throw std::out_of_range("value_at: index outside [1, n]");
    }
    std::vector<int> ell(static_cast<std::size_t>(pp.n()));
    pp.ell_into(q, ell);
    // h + 1 is the reverse rank of sigma(i) among sigma(1..j).
    int h = ell[static_cast<std::size_t>(i - 1)];
    int right = 0;
    for (int j = i + 1; j <= pp.n(); ++j) {
        if (h >= ell[static_cast<std::size_t>(j - 1)]) {
            ++h;
        } else {
            ++right;
        }
    }
    return i + right - ell[static_cast<std::size_t>(i - 1)];
}

Trajectory trajectory(const MallowsProcessPath& pp, int i, std::span<const double> t_grid)
{
    Trajectory out;
    out.element = i;
    const double n = pp.n();
    for (double t : t_grid) {
        out.times.push_back(t);
        out.positions.push_back(value_at(pp, i, std::exp(t / n)) / n);
    }
    return out;
}

IncrementCheck check_unit_inv_increments(const MallowsProcessPath& pp)
{
    std::vector<JumpEvent> events = merged_jumps(pp, -1.0, pp.q_horizon());
    for (std::size_t k = 1; k < events.size(); ++k) {
        if (events[k].time == events[k - 1].time) {
            IncrementCheck bad;
            bad.ok = false;
            bad.first_violation = events[k].time;
            bad.detail = "ell_" + std::to_string(events[k - 1].index) + " and ell_" +
                         std::to_string(events[k].index) + " jump simultaneously";
            return bad;
        }
    }
    return {};
}

std::vector<int> element_values(int n, int i, std::span<const double> q_times, const CounterRng& rng,
                                const ProcessOptions& options)
{
    if (i < 1 || i > n) {
        throw std::out_of_range("element_values: index outside [1, n]");
    }
    double horizon = 0.0;
    for (double q : q_times) {
        if (!(q >= 0.0)) {
            throw std::out_of_range("element_values: negative query time");
        }
        horizon = std::max(horizon, q);
    }
    BirthOptions birth;
    birth.max_jumps = options.max_jumps;
    std::vector<JumpPath> tail;
    tail.reserve(static_cast<std::size_t>(n - i + 1));
    for (int j = i; j <= n; ++j) {
        CounterRng stream = rng.split(static_cast<std::uint64_t>(j));
        tail.push_back(simulate_birth(RateSpec::finite(j), horizon, options.dominator, stream, birth));
    }
    std::vector<int> out;
    out.reserve(q_times.size());
    for (double q : q_times) {
        const int ell_i = tail[0].state_at(q);
        int h = ell_i;
        int right = 0;
        for (int j = i + 1; j <= n; ++j) {
            if (h >= tail[static_cast<std::size_t>(j - i)].state_at(q)) {
                ++h;
            } else {
                ++right;
            }
        }
        out.push_back(i + right - ell_i);
    }
    return out;
}

std::vector<JumpEvent> merged_jumps(const MallowsProcessPath& pp, double from, double to)
{
    std::vector<JumpEvent> events;
    for (int i = 1; i <= pp.n(); ++i) {
        for (double t : pp.path(i).jump_times()) {
            if (t > from && t <= to) {
                events.push_back({t, i});
            }
        }
    }
    std::sort(events.begin(), events.end(), [](const JumpEvent& a, const JumpEvent& b) {
        return a.time < b.time || (a.time == b.time && a.index < b.index);
    });
    return events;
}

PermutationSweep::PermutationSweep(const Permutation& start)
    : values_(start.values().begin(), start.values().end()), positions_(values_.size())
{
    for (int p = 1; p <= size(); ++p) {
        positions_[static_cast<std::size_t>(value(p) - 1)] = p;
    }
}

int PermutationSweep::partner(int k) const
{
    // Scanning values downward is O(n / k) on average for near-uniform permutations.
    for (int w = value(k) - 1; w >= 1; --w) {
        if (position(w) < k) {
            return position(w);
        }
    }
    throw std::logic_error("PermutationSweep: ell_" + std::to_string(k) + " is already maximal");
}

int PermutationSweep::apply(int k)
{
    const int p = partner(k);
    const int v = value(k);
    const int w = value(p);
    values_[static_cast<std::size_t>(k - 1)] = w;
    values_[static_cast<std::size_t>(p - 1)] = v;
    positions_[static_cast<std::size_t>(w - 1)] = k;
    positions_[static_cast<std::size_t>(v - 1)] = p;
    return p;
}

}  // namespace mallows
