#pragma once

// The birth Mallows process: n independent left-inversion birth paths read as
// a permutation-valued process in the q-clock, together with queries in the
// rescaled clock q = e^{t/n}.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mallows/birth_process.hpp"
#include "mallows/permutation.hpp"
#include "mallows/rng.hpp"

namespace mallows {

class MallowsProcessPath
{
  public:
    /// paths[k] is the path of ell_{k+1}; each must stay <= k.
    MallowsProcessPath(int n, double q_horizon, std::vector<JumpPath> paths);

    int n() const { return n_; }
    double q_horizon() const { return q_horizon_; }

    /// Path of ell_i, 1-based.
    const JumpPath& path(int i) const { return paths_[static_cast<std::size_t>(i - 1)]; }

    std::size_t total_jumps() const;

    /// Left-inversion vector at q; throws std::out_of_range beyond the horizon.
    InversionVector ell_at(double q) const;

    void ell_into(double q, std::span<int> out) const;

  private:
    void check_time(double q) const;

    int n_;
    double q_horizon_;
    std::vector<JumpPath> paths_;
};

struct ProcessOptions
{
    Dominator dominator = Dominator::adaptive();
    std::size_t max_jumps = 10'000'000;
};

/// Independent paths of ell_1..ell_n on [0, q_horizon]; ell_i uses stream rng.split(i).
MallowsProcessPath simulate_process(int n, double q_horizon, const CounterRng& rng, const ProcessOptions& options = {});

Permutation permutation_at(const MallowsProcessPath& pp, double q);

/// sigma_q(i) without decoding the whole permutation: i + r_i - ell_i, where the
/// right inversions r_i follow from the ell's to the right of i. O(n).
int value_at(const MallowsProcessPath& pp, int i, double q);

struct Trajectory
{
    int element = 0;
    std::vector<double> times;
    std::vector<double> positions;
};

/// X_i(t) = sigma_{e^{t/n}}(i) / n on the given t grid.
Trajectory trajectory(const MallowsProcessPath& pp, int i, std::span<const double> t_grid);

struct IncrementCheck
{
    bool ok = true;
    std::optional<double> first_violation;
    std::string detail;
};

/// True iff every jump raises Inv by exactly one, i.e. no two components jump together.
IncrementCheck check_unit_inv_increments(const MallowsProcessPath& pp);

struct JumpEvent
{
    double time;
    int index;
};

/// sigma_q(i) at each of the given times, simulating only ell_i..ell_n up to the
/// largest time. Streams match simulate_process, so with the same rng and that
/// horizon the values coincide with value_at.
std::vector<int> element_values(int n, int i, std::span<const double> q_times, const CounterRng& rng,
                                const ProcessOptions& options = {});

/// All jumps with time in (from, to], ordered by time (ties by index).
std::vector<JumpEvent> merged_jumps(const MallowsProcessPath& pp, double from, double to);

/// Maintains sigma and its inverse while jumps are replayed in time order.
class PermutationSweep
{
  public:
    explicit PermutationSweep(const Permutation& start);

    /// Position j < k holding the largest value below value(k).
    int partner(int k) const;

    /// Applies a unit jump of ell_k: the value at position k is exchanged with
    /// the largest smaller value at a position left of k. Returns that partner position.
    int apply(int k);

    int value(int position) const { return values_[static_cast<std::size_t>(position - 1)]; }
    int position(int value) const { return positions_[static_cast<std::size_t>(value - 1)]; }
    int size() const { return static_cast<int>(values_.size()); }
    Permutation snapshot() const { return Permutation(values_); }

  private:
    std::vector<int> values_;
    std::vector<int> positions_;
};

}  // namespace mallows
