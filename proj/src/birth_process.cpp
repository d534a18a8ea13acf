#include "mallows/birth_process.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mallows/permutation.hpp"

namespace mallows {

namespace {

constexpr int kPolynomialMaxSize = 64;
constexpr double kPolynomialWindow = 1e-4;
constexpr double kRatioTolerance = 1e-12;

// Writing p_i(j, q) = D(q) / S(q) with S(q) = 1 + q + ... + q^{i-1} gives a
// numerator polynomial of degree i - 2 with coefficients
//   d_m = (j + 1)(m + 1)           for m <= i - j - 2,
//   d_m = (i - j - 1)(i - m - 1)   for m >= i - j - 1.
double numerator_coefficient(int i, int j, int m)
{
    return m <= i - j - 2 ? static_cast<double>(j + 1) * (m + 1) : static_cast<double>(i - j - 1) * (i - m - 1);
}

double rate_polynomial(int i, int j, double q)
{
    if (q <= 1.0) {
        double num = 0.0;
        for (int m = i - 2; m >= 0; --m) {
            num = num * q + numerator_coefficient(i, j, m);
        }
        double den = 0.0;
        for (int m = i - 1; m >= 0; --m) {
            den = den * q + 1.0;
        }
        return num / den;
    }
    // Divide through by q^{i-1} and evaluate in r = 1/q.
    const double r = 1.0 / q;
    double num = 0.0;
    for (int m = 0; m <= i - 2; ++m) {
        num = num * r + numerator_coefficient(i, j, m);
    }
    double den = 0.0;
    for (int m = 0; m <= i - 1; ++m) {
        den = den * r + 1.0;
    }
    return r * num / den;
}

double rate_closed_form(int i, int j, double q)
{
    if (q < 1.0) {
        const double lq = std::log(q);
        double frac = std::exp((i - j - 1) * lq) * std::expm1((j + 1) * lq) / std::expm1(i * lq);
        return (j + 1 - i * frac) / (1.0 - q);
    }
    const double lr = -std::log(q);
    double frac = std::expm1((j + 1) * lr) / std::expm1(i * lr);
    return (j + 1 - i * frac) / (1.0 - q);
}

}  // namespace

double rate_finite(int i, int j, double q)
{
    if (i < 1 || j < 0 || !(q >= 0.0)) {
        throw std::invalid_argument("rate_finite: need i >= 1, j >= 0, q >= 0");
    }
    if (j >= i - 1) {
        return 0.0;
    }
    if (q == 0.0) {
        return j + 1.0;
    }
    if (std::isinf(q)) {
        return 0.0;
    }
    if (i <= kPolynomialMaxSize || std::abs(q - 1.0) < kPolynomialWindow) {
        return rate_polynomial(i, j, q);
    }
    return std::max(0.0, rate_closed_form(i, j, q));
}

double rate_limiting(int j, double t)
{
    if (j < 0 || !(t < 1.0)) {
        throw std::invalid_argument("rate_limiting: need j >= 0 and t < 1");
    }
    return (j + 1.0) / (1.0 - t);
}

JumpPath::JumpPath(std::vector<double> jump_times, int initial_state) : times_{std::move(jump_times)}, initial_{initial_state}
{
    for (std::size_t k = 0; k < times_.size(); ++k) {
        if (!std::isfinite(times_[k]) || (k > 0 && !(times_[k] > times_[k - 1]))) {
            throw std::invalid_argument("JumpPath: jump times must be finite and strictly increasing");
        }
    }
}

int JumpPath::state_at(double t) const
{
    return initial_ + static_cast<int>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
}

int JumpPath::state_before(double t) const
{
    return initial_ + static_cast<int>(std::lower_bound(times_.begin(), times_.end(), t) - times_.begin());
}

RateSpec RateSpec::finite(int i)
{
    if (i < 1) {
        throw std::invalid_argument("RateSpec::finite: i must be >= 1");
    }
    return RateSpec(Kind::finite, i);
}

double RateSpec::operator()(int j, double t) const
{
    switch (kind_) {
    case Kind::finite:
        return rate_finite(i_, j, t);
    case Kind::limiting:
        return rate_limiting(j, t);
    case Kind::zero:
        break;
    }
    return 0.0;
}

double RateSpec::bound(int j, double a, double b) const
{
    switch (kind_) {
    case Kind::finite: {
        if (j >= i_ - 1) {
            return 0.0;
        }
        // D and S have nonnegative coefficients, so on [a, b]
        // p = D/S <= D(b)/S(a) = p(b) S(b)/S(a).
        double pb = rate_finite(i_, j, b);
        if (a >= b) {
            return pb;
        }
        return pb * std::exp(log_geometric_sum(i_, b) - log_geometric_sum(i_, a));
    }
    case Kind::limiting:
        return rate_limiting(j, b);
    case Kind::zero:
        break;
    }
    return 0.0;
}

int RateSpec::absorbing_state() const
{
    switch (kind_) {
    case Kind::finite:
        return i_ - 1;
    case Kind::limiting:
        return std::numeric_limits<int>::max();
    case Kind::zero:
        break;
    }
    return 0;
}

double RateSpec::time_limit() const
{
    return kind_ == Kind::limiting ? 1.0 : std::numeric_limits<double>::infinity();
}

Dominator Dominator::constant(double level)
{
    if (!(level > 0.0) || !std::isfinite(level)) {
        throw std::invalid_argument("Dominator::constant: level must be positive and finite");
    }
    return Dominator(level);
}

namespace {

std::string violation_message(int state, double time, double rate, double bound)
{
    std::ostringstream os;
    os.precision(17);
    os << "dominating rate violated in state " << state << " at time " << time << ": rate " << rate << " > bound "
       << bound;
    return os.str();
}

}  // namespace

DominatorViolation::DominatorViolation(int state_, double time_, double rate_, double bound_)
    : std::runtime_error(violation_message(state_, time_, rate_, bound_)), state{state_}, time{time_}, rate{rate_},
      bound{bound_}
{
}

ExplosionGuard::ExplosionGuard(std::size_t cap)
    : std::runtime_error("jump count exceeded the cap of " + std::to_string(cap))
{
}

JumpPath simulate_birth(const RateSpec& rate, double horizon, const Dominator& dominator, CounterRng& rng,
                        const BirthOptions& options)
{
    if (!(horizon < rate.time_limit())) {
        throw std::invalid_argument("simulate_birth: horizon outside the rate's domain");
    }
    std::vector<double> times;
    double s = options.start;
    int j = 0;
    double width = horizon - s;
    const double min_width = 1e-14 * std::max(1.0, std::abs(horizon));

    while (s < horizon && j < rate.absorbing_state()) {
        double block_end = horizon;
        double level = 0.0;
        if (dominator.is_constant()) {
            level = dominator.level();
        } else {
            width = std::min(std::max(width, min_width), horizon - s);
            block_end = s + width;
            level = rate.bound(j, s, block_end);
            const double current = rate(j, s);
            while (level > 2.0 * current && width > min_width) {
                width *= 0.5;
                block_end = s + width;
                level = rate.bound(j, s, block_end);
            }
        }
        if (level <= 0.0) {
            s = block_end;
            width *= 2.0;
            continue;
        }
        double proposal = s + rng.exponential(level);
        if (proposal >= block_end) {
            s = block_end;
            width *= 2.0;
            continue;
        }
        s = proposal;
        double value = rate(j, s);
        double ratio = value / level;
        if (ratio > 1.0 + kRatioTolerance || !(ratio >= 0.0)) {
            throw DominatorViolation(j, s, value, level);
        }
        if (rng.uniform() <= ratio) {
            if (!times.empty() && !(s > times.back())) {
                continue;
            }
            times.push_back(s);
            ++j;
            if (times.size() > options.max_jumps) {
                throw ExplosionGuard(options.max_jumps);
            }
        }
    }
    return JumpPath(std::move(times));
}

JumpPath simulate_limiting_by_timechange(double horizon, CounterRng& rng)
{
    if (!(horizon < 1.0)) {
        throw std::invalid_argument("simulate_limiting_by_timechange: horizon must be < 1");
    }
    std::vector<double> times;
    if (horizon <= 0.0) {
        return JumpPath();
    }
    const double tau = -std::log1p(-horizon);
    double s = 0.0;
    for (int j = 0;; ++j) {
        s += rng.exponential(j + 1.0);
        if (s > tau) {
            break;
        }
        double t = -std::expm1(-s);
        if (!times.empty() && !(t > times.back())) {
            continue;
        }
        times.push_back(t);
    }
    return JumpPath(std::move(times));
}

double calibrated_dominator_level(int n, double q_horizon)
{
    if (n < 1 || !(q_horizon >= 0.0)) {
        throw std::invalid_argument("calibrated_dominator_level: need n >= 1 and q_horizon >= 0");
    }
    constexpr int kGrid = 64;
    double peak = 0.0;
    for (int i : {n, std::max(1, n / 2), std::max(1, 3 * n / 4)}) {
        for (int gj = 0; gj <= kGrid; ++gj) {
            int j = static_cast<int>(std::lround(static_cast<double>(gj) * (i - 1) / kGrid));
            for (int gq = 0; gq <= kGrid; ++gq) {
                double q = q_horizon * gq / kGrid;
                peak = std::max(peak, rate_finite(i, j, q));
            }
        }
    }
    return std::max(2.0 * peak, 1.0);
}

}  // namespace mallows
