#pragma once

// Permutations of Z built from left inversion counts: the recursion for right
// inversions, windowed reconstruction of the limiting process Sigma_t, the
// shifted finite process and the thinning coupling between the two.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "mallows/birth_process.hpp"
#include "mallows/mallows_process.hpp"
#include "mallows/rng.hpp"

namespace mallows {

/// Left inversion counts indexed by integers.
using EllSource = std::function<int(int)>;

/// ell_i^{(i)}, ..., ell_i^{(j_max)} with ell_i^{(j+1)} = ell_i^{(j)} + 1{ell_i^{(j)} >= ell_{j+1}}.
/// Throws std::out_of_range if an index in [i, j_max] is missing.
std::vector<int> ell_hat_sequence(const std::map<int, int>& ells, int i, int j_max);

struct StopRule
{
    /// Pointwise upper bound of the data on the whole time range, with geometric
    /// tail parameter T: P(ell_j >= h) <= T^h for unobserved j.
    double T = 0.0;
    double tail_tolerance = 1e-9;
    int max_scan = 100'000;
    /// If set, ell_j = 0 for every j > support_end; reaching it certifies exactly.
    std::optional<int> support_end;
};

struct RightInversions
{
    int r = 0;
    bool exact = false;
    int i1 = 0;
    /// Last index whose ell can contribute: r depends on ell_i..ell_horizon only.
    int horizon = 0;
};

/// r_i = #{j > i : ell_i^{(j)} < ell_j} from `at_t`, certified through the dominating
/// data `at_T`: with i1 >= i the first index where at_T vanishes, ell_i^{(j)}(t) >=
/// ell_{i1}^{(j)}(T) for j >= i1, so once the latter makes every later failure
/// unlikely below the tolerance (or the support ends) the sum is complete.
RightInversions right_inversions(const EllSource& at_t, const EllSource& at_T, int i, const StopRule& rule);

/// Finite data embedded in Z: ell_j = 0 beyond the largest key. Exact unless the scan cap is hit.
RightInversions right_inversions(const std::map<int, int>& ells, int i, int max_scan = 100'000);

/// Windowed family of independent limiting birth paths ell_i, i in Z, on [0, T].
/// Index i uses the stream rng.split(zigzag(i)), so growing the window never
/// changes existing paths.
class ZWindow
{
  public:
    ZWindow(const CounterRng& rng, double T, int lo, int hi, int cap = 100'000);

    int lo() const { return lo_; }
    int hi() const { return hi_; }
    double horizon() const { return T_; }
    int cap() const { return cap_; }

    /// Grows the window by doubling towards [a, b]; false if that exceeds the cap.
    bool ensure(int a, int b);

    const JumpPath& path(int i);
    int ell(int i, double t) { return path(i).state_at(t); }
    int ell_before(int i, double t) { return path(i).state_before(t); }

  private:
    void grow_left(int a);
    void grow_right(int b);

    CounterRng rng_;
    double T_;
    int lo_;
    int hi_;
    int cap_;
    std::deque<JumpPath> paths_;
};

enum class Certification
{
    exact,
    truncated,
};

struct ZPermutationSlice
{
    int lo = 0;
    int hi = -1;
    std::vector<std::int64_t> values;
    std::vector<Certification> flags;

    std::int64_t operator()(int i) const { return values[static_cast<std::size_t>(i - lo)]; }
    bool all_exact() const;
};

/// Sigma_t(i) = i + r_i(t) - ell_i(t) for i in [a, b], t <= T. The window grows
/// to the right as needed; values whose certification runs past the cap are flagged truncated.
ZPermutationSlice sigma_slice(ZWindow& w, double t, int a, int b);

/// Same, using left limits ell_i(t-).
ZPermutationSlice sigma_slice_before(ZWindow& w, double t, int a, int b);

struct BalanceCheck
{
    bool certified = false;
    int half_width = 0;
    /// #{i <= 0 : Sigma_t(i) >= 1} and #{i >= 1 : Sigma_t(i) <= 0}.
    int left_to_right = 0;
    int right_to_left = 0;
};

/// Counts the elements crossing the origin on [-L, L + 1], with L large enough that
/// crossings from outside (ell_i >= i or r_i >= |i| + 1, both geometric) have total
/// probability below 1e-9.
BalanceCheck balance_check(ZWindow& w, double t);

/// Position j < m with ell_j^{(m)} = k + 1, i.e. the position of the (k+2)-nd largest
/// value among positions <= m, where k is the count of ell_m. Searches at most max_scan positions.
int transposition_partner(const EllSource& ell, int m, int k, int max_scan = 100'000);

struct TranspositionEvent
{
    double time;
    int i;
    int partner;
};

/// Every jump on [0, T] that can move a value on [a, b], with Sigma_s = Sigma_{s-} o tau_{i,partner}
/// verified on [a, b] and both transposed positions. A failed verification throws std::logic_error.
std::vector<TranspositionEvent> jump_log(ZWindow& w, int a, int b);

/// Sigma^n_t(i) = sigma^n_t(k_n + i) - k_n, and i when k_n + i lies outside [1, n].
class ShiftedFiniteProcess
{
  public:
    ShiftedFiniteProcess(MallowsProcessPath path, int k_n);

    int n() const { return path_.n(); }
    int k_n() const { return k_n_; }
    double horizon() const { return path_.q_horizon(); }
    const MallowsProcessPath& process() const { return path_; }

    /// ell_i(Sigma^n_t): ell^n_{k_n + i}(t), zero outside the support.
    int ell(int i, double t) const;
    std::int64_t value(int i, double t) const;

  private:
    MallowsProcessPath path_;
    int k_n_;
};

ShiftedFiniteProcess shifted_finite_process(int n, int k_n, double T, const CounterRng& rng,
                                            const ProcessOptions& options = {});

struct CouplingRecord
{
    int n = 0;
    int k_n = 0;
    int lo = 0;
    int hi = -1;
    double T = 0.0;
    /// Per window index: Sigma^n_t(i) = Sigma_t(i) for every t in [0, T].
    std::vector<bool> agree;
    bool all_agree = false;
    bool certified = false;
    /// Acceptance ratio of every proposed jump, in order of (index, jump).
    std::vector<double> ratios;
    std::size_t proposed = 0;
    std::size_t accepted = 0;
};

/// Limiting paths ell_{i - k_n} from rng.split(0) (as a ZWindow) and uniforms
/// U_{m,j} = addressed_uniform(rng.split(1), zigzag(m), j). The (j+1)-st jump of
/// ell_m is kept by the finite process iff U <= p_{m+k_n}(X, s) / ((j+1) / (1 - s)).
/// A ratio above 1 + 1e-12 throws DominatorViolation.
CouplingRecord coupled_simulation(int n, int k_n, int lo, int hi, double T, const CounterRng& rng);

/// Accepted-jump path of ell^n_{m + k_n} built from the limiting path of index m.
JumpPath thinned_path(const JumpPath& limiting, int finite_index, double T, const CounterRng& uniforms, int m,
                      std::vector<double>* ratios = nullptr);

}  // namespace mallows
