#pragma once

// Pure-birth counting processes with time-dependent rates, sampled exactly by
// Poisson thinning. Two rate families are provided:
//
//   finite(i):  p_i(j, q), the jump rate j -> j+1 of the i-th left inversion
//               count of the birth Mallows process in the q-clock;
//   limiting:   (j + 1) / (1 - t) on [0, 1).

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mallows/rng.hpp"

namespace mallows {

/// p_i(j, q) for i >= 1, j >= 0, q >= 0; zero for j >= i - 1.
double rate_finite(int i, int j, double q);

/// (j + 1) / (1 - t); throws for t >= 1.
double rate_limiting(int j, double t);

class JumpPath
{
  public:
    JumpPath() = default;
    /// Validates that times are finite and strictly increasing.
    explicit JumpPath(std::vector<double> jump_times, int initial_state = 0);

    std::span<const double> jump_times() const { return times_; }
    int initial_state() const { return initial_; }
    std::size_t jump_count() const { return times_.size(); }
    bool empty() const { return times_.empty(); }

    /// Right-continuous state: initial + #{jumps <= t}.
    int state_at(double t) const;
    /// Left limit: initial + #{jumps < t}.
    int state_before(double t) const;

  private:
    std::vector<double> times_;
    int initial_ = 0;
};

class RateSpec
{
  public:
    enum class Kind
    {
        finite,
        limiting,
        zero
    };

    static RateSpec finite(int i);
    static RateSpec limiting() { return RateSpec(Kind::limiting, 0); }
    static RateSpec zero() { return RateSpec(Kind::zero, 0); }

    Kind kind() const { return kind_; }
    int size_index() const { return i_; }

    double operator()(int j, double t) const;

    /// An upper bound for the rate in state j over the time interval [a, b].
    double bound(int j, double a, double b) const;

    /// States at or above this value have rate 0.
    int absorbing_state() const;

    /// Rates are defined on [0, time_limit()).
    double time_limit() const;

  private:
    RateSpec(Kind kind, int i) : kind_{kind}, i_{i} {}

    Kind kind_;
    int i_;
};

/// Proposal intensity for thinning. The adaptive variant uses, for the current
/// state, the rigorous bound of RateSpec::bound over a block that is shrunk
/// until it is within a factor 2 of the current rate.
class Dominator
{
  public:
    static Dominator constant(double level);
    static Dominator adaptive() { return Dominator(0.0); }

    bool is_constant() const { return level_ > 0.0; }
    double level() const { return level_; }

  private:
    explicit Dominator(double level) : level_{level} {}
    double level_;
};

class DominatorViolation : public std::runtime_error
{
  public:
    DominatorViolation(int state, double time, double rate, double bound);
    int state;
    double time;
    double rate;
    double bound;
};

class ExplosionGuard : public std::runtime_error
{
  public:
    explicit ExplosionGuard(std::size_t cap);
};

struct BirthOptions
{
    std::size_t max_jumps = 10'000'000;
    double start = 0.0;
};

/// Exact sample of the birth process started in state 0 at options.start, observed up to horizon.
JumpPath simulate_birth(const RateSpec& rate, double horizon, const Dominator& dominator, CounterRng& rng,
                        const BirthOptions& options = {});

/// Limiting process via homogeneous rates j + 1 on [0, -log(1 - horizon)] mapped back by s -> 1 - e^{-s}.
JumpPath simulate_limiting_by_timechange(double horizon, CounterRng& rng);

/// Constant proposal level for all finite(i), i <= n, on [0, q_horizon]: twice the
/// largest rate found on a coarse (i, j, q) grid.
double calibrated_dominator_level(int n, double q_horizon);

}  // namespace mallows
