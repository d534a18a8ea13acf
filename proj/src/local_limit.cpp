#include "mallows/local_limit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mallows {

namespace {

constexpr double kRatioTolerance = 1e-12;
constexpr double kCrossingTolerance = 1e-9;

bool tail_negligible(const StopRule& rule, int h)
{
    if (!(rule.T >= 0.0) || !(rule.T < 1.0)) {
        return false;
    }
    if (rule.T == 0.0) {
        return true;
    }
    // P(some later j fails) <= sum_{m >= 0} T^{h + m + 1} = T^{h + 1} / (1 - T).
    return (h + 1.0) * std::log(rule.T) - std::log1p(-rule.T) < std::log(rule.tail_tolerance);
}

// Left inversion counts of the window at a fixed time, cached over a growing range.
class Frame
{
  public:
    Frame(ZWindow& w, double t, bool before) : w_{w}, t_{t}, before_{before} {}

    int operator()(int j)
    {
        if (j < lo_ || j >= lo_ + static_cast<int>(v_.size())) {
            fill(j);
        }
        return v_[static_cast<std::size_t>(j - lo_)];
    }

  private:
    void fill(int j)
    {
        if (v_.empty()) {
            lo_ = j;
            v_.push_back(read(j));
            return;
        }
        while (j < lo_) {
            v_.insert(v_.begin(), read(--lo_));
        }
        while (j >= lo_ + static_cast<int>(v_.size())) {
            v_.push_back(read(lo_ + static_cast<int>(v_.size())));
        }
    }

    int read(int j) { return before_ ? w_.ell_before(j, t_) : w_.ell(j, t_); }

    ZWindow& w_;
    double t_;
    bool before_;
    int lo_ = 0;
    std::vector<int> v_;
};

StopRule window_rule(const ZWindow& w, int i)
{
    StopRule rule;
    rule.T = w.horizon();
    rule.max_scan = std::max(0, w.lo() + w.cap() - 1 - i);
    return rule;
}

void check_time(const ZWindow& w, double t)
{
    if (!(t >= 0.0) || t > w.horizon()) {
        throw std::out_of_range("local limit: time " + std::to_string(t) + " outside [0, T]");
    }
}

struct IndexValue
{
    std::int64_t value;
    bool exact;
};

IndexValue sigma_value(ZWindow& w, Frame& at_t, Frame& at_T, int i)
{
    RightInversions ri = right_inversions(std::ref(at_t), std::ref(at_T), i, window_rule(w, i));
    return {static_cast<std::int64_t>(i) + ri.r - at_t(i), ri.exact};
}

ZPermutationSlice slice_impl(ZWindow& w, double t, int a, int b, bool before)
{
    if (b < a) {
        throw std::invalid_argument("sigma_slice: empty domain");
    }
    check_time(w, t);
    if (!w.ensure(a, b)) {
        throw std::length_error("sigma_slice: domain exceeds the window cap");
    }
    Frame at_t(w, t, before);
    Frame at_T(w, w.horizon(), false);
    ZPermutationSlice s;
    s.lo = a;
    s.hi = b;
    for (int i = a; i <= b; ++i) {
        IndexValue v = sigma_value(w, at_t, at_T, i);
        s.values.push_back(v.value);
        s.flags.push_back(v.exact ? Certification::exact : Certification::truncated);
    }
    std::vector<std::int64_t> exact_values;
    for (std::size_t k = 0; k < s.values.size(); ++k) {
        if (s.flags[k] == Certification::exact) {
            exact_values.push_back(s.values[k]);
        }
    }
    std::sort(exact_values.begin(), exact_values.end());
    if (std::adjacent_find(exact_values.begin(), exact_values.end()) != exact_values.end()) {
        throw std::logic_error("sigma_slice: certified values are not distinct");
    }
    return s;
}

// r and sigma for a finite block of data: ell[j - lo] for j in [lo, horizon], zero beyond.
std::int64_t sigma_from_block(const std::vector<int>& ell, int lo, int i)
{
    const auto base = static_cast<std::size_t>(i - lo);
    int h = ell[base];
    int r = 0;
    for (std::size_t j = base + 1; j < ell.size(); ++j) {
        if (h >= ell[j]) {
            ++h;
        } else {
            ++r;
        }
    }
    return static_cast<std::int64_t>(i) + r - ell[base];
}

}  // namespace

std::vector<int> ell_hat_sequence(const std::map<int, int>& ells, int i, int j_max)
{
    auto get = [&](int j) {
        auto it = ells.find(j);
        if (it == ells.end()) {
            throw std::out_of_range("ell_hat_sequence: missing ell_" + std::to_string(j));
        }
        return it->second;
    };
    std::vector<int> out;
    if (j_max < i) {
        return out;
    }
    out.push_back(get(i));
    for (int j = i; j < j_max; ++j) {
        out.push_back(out.back() + (out.back() >= get(j + 1) ? 1 : 0));
    }
    return out;
}

RightInversions right_inversions(const EllSource& at_t, const EllSource& at_T, int i, const StopRule& rule)
{
    RightInversions out;
    const bool bounded = rule.support_end.has_value();
    auto past_support = [&](int j) { return bounded && j >= *rule.support_end; };

    int h = at_t(i);
    bool have_i1 = past_support(i) || at_T(i) == 0;
    int h_T = 0;
    out.i1 = i;
    int j = i;
    while (!(past_support(j) || (have_i1 && tail_negligible(rule, h_T)))) {
        if (j - i >= rule.max_scan) {
            out.exact = false;
            out.horizon = j;
            return out;
        }
        ++j;
        if (h >= at_t(j)) {
            ++h;
        } else {
            ++out.r;
        }
        if (have_i1) {
            h_T += h_T >= at_T(j) ? 1 : 0;
        } else if (at_T(j) == 0) {
            have_i1 = true;
            out.i1 = j;
        }
    }
    if (!have_i1) {
        out.i1 = j;
    }
    out.exact = true;
    out.horizon = j;
    return out;
}

RightInversions right_inversions(const std::map<int, int>& ells, int i, int max_scan)
{
    const int last = ells.empty() ? i : std::max(i, ells.rbegin()->first);
    EllSource get = [&](int j) {
        if (j > last) {
            return 0;
        }
        auto it = ells.find(j);
        if (it == ells.end()) {
            throw std::out_of_range("right_inversions: missing ell_" + std::to_string(j));
        }
        return it->second;
    };
    StopRule rule;
    rule.T = 1.0;
    rule.max_scan = max_scan;
    rule.support_end = last;
    return right_inversions(get, get, i, rule);
}

ZWindow::ZWindow(const CounterRng& rng, double T, int lo, int hi, int cap)
    : rng_{rng}, T_{T}, lo_{lo}, hi_{lo - 1}, cap_{cap}
{
    if (!(T >= 0.0) || !(T < 1.0)) {
        throw std::invalid_argument("ZWindow: horizon T must lie in [0, 1)");
    }
    if (hi < lo || cap < 1 || hi - lo + 1 > cap) {
        throw std::invalid_argument("ZWindow: need lo <= hi and hi - lo + 1 <= cap");
    }
    grow_right(hi);
}

void ZWindow::grow_left(int a)
{
    while (lo_ > a) {
        --lo_;
        CounterRng stream = rng_.split(zigzag(lo_));
        paths_.push_front(simulate_limiting_by_timechange(T_, stream));
    }
}

void ZWindow::grow_right(int b)
{
    while (hi_ < b) {
        ++hi_;
        CounterRng stream = rng_.split(zigzag(hi_));
        paths_.push_back(simulate_limiting_by_timechange(T_, stream));
    }
}

bool ZWindow::ensure(int a, int b)
{
    const long need_lo = std::min<long>(lo_, a);
    const long need_hi = std::max<long>(hi_, b);
    if (need_hi - need_lo + 1 > cap_) {
        return false;
    }
    const long size = hi_ - lo_ + 1;
    if (b > hi_) {
        long target = std::max<long>(b, hi_ + size);
        target = std::min<long>(target, need_lo + cap_ - 1);
        grow_right(static_cast<int>(target));
    }
    if (a < lo_) {
        long target = std::min<long>(a, lo_ - size);
        target = std::max<long>(target, static_cast<long>(hi_) - cap_ + 1);
        grow_left(static_cast<int>(target));
    }
    return true;
}

const JumpPath& ZWindow::path(int i)
{
    if ((i < lo_ || i > hi_) && !ensure(i, i)) {
        throw std::length_error("ZWindow: index " + std::to_string(i) + " beyond the extension cap");
    }
    return paths_[static_cast<std::size_t>(i - lo_)];
}

bool ZPermutationSlice::all_exact() const
{
    return std::all_of(flags.begin(), flags.end(), [](Certification c) { return c == Certification::exact; });
}

ZPermutationSlice sigma_slice(ZWindow& w, double t, int a, int b)
{
    return slice_impl(w, t, a, b, false);
}

ZPermutationSlice sigma_slice_before(ZWindow& w, double t, int a, int b)
{
    return slice_impl(w, t, a, b, true);
}

BalanceCheck balance_check(ZWindow& w, double t)
{
    check_time(w, t);
    BalanceCheck out;
    int L = 1;
    if (t > 0.0) {
        // 2 t^{L + 2} / (1 - t) < tolerance.
        double need = (std::log(kCrossingTolerance / 2.0) + std::log1p(-t)) / std::log(t) - 2.0;
        L = std::max(1, static_cast<int>(std::ceil(need)));
    }
    out.half_width = L;
    ZPermutationSlice s = sigma_slice(w, t, -L, L + 1);
    out.certified = s.all_exact();
    for (int i = -L; i <= 0; ++i) {
        out.left_to_right += s(i) >= 1 ? 1 : 0;
    }
    for (int i = 1; i <= L + 1; ++i) {
        out.right_to_left += s(i) <= 0 ? 1 : 0;
    }
    return out;
}

int transposition_partner(const EllSource& ell, int m, int k, int max_scan)
{
    // ell_j^{(m)} + 1 is the reverse rank of sigma(j) among positions <= m.
    for (int j = m - 1; j >= m - max_scan; --j) {
        int h = ell(j);
        for (int p = j + 1; p <= m && h <= k + 1; ++p) {
            h += h >= ell(p) ? 1 : 0;
        }
        if (h == k + 1) {
            return j;
        }
    }
    throw std::length_error("transposition_partner: no partner within the scan cap");
}

std::vector<TranspositionEvent> jump_log(ZWindow& w, int a, int b)
{
    const double T = w.horizon();
    if (b < a || !w.ensure(a, b)) {
        throw std::invalid_argument("jump_log: bad domain");
    }
    Frame at_T(w, T, false);
    int last = b;
    for (int i = a; i <= b; ++i) {
        RightInversions ri = right_inversions(std::ref(at_T), std::ref(at_T), i, window_rule(w, i));
        if (!ri.exact) {
            throw std::length_error("jump_log: domain cannot be certified on [0, T]");
        }
        last = std::max(last, ri.horizon);
    }
    // Jumps of ell_m with m > last cannot move a certified value on [a, b].
    std::vector<JumpEvent> events;
    for (int m = a; m <= last; ++m) {
        for (double s : w.path(m).jump_times()) {
            if (s <= T) {
                events.push_back({s, m});
            }
        }
    }
    std::sort(events.begin(), events.end(),
              [](const JumpEvent& x, const JumpEvent& y) { return x.time < y.time || (x.time == y.time && x.index < y.index); });

    std::vector<TranspositionEvent> log;
    log.reserve(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) {
        if ((e > 0 && events[e - 1].time == events[e].time) ||
            (e + 1 < events.size() && events[e + 1].time == events[e].time)) {
            throw std::logic_error("jump_log: simultaneous jumps");
        }
        const double s = events[e].time;
        const int m = events[e].index;
        Frame before(w, s, true);
        Frame after(w, s, false);
        const int k = before(m);
        const int partner = transposition_partner(std::ref(before), m, k, w.cap());
        std::vector<int> positions;
        for (int i = a; i <= b; ++i) {
            positions.push_back(i);
        }
        positions.push_back(m);
        positions.push_back(partner);
        auto swapped = [&](int p) { return p == m ? partner : (p == partner ? m : p); };
        for (int p : positions) {
            IndexValue now = sigma_value(w, after, at_T, p);
            IndexValue prev = sigma_value(w, before, at_T, swapped(p));
            if (!now.exact || !prev.exact) {
                throw std::length_error("jump_log: value at " + std::to_string(p) + " not certified");
            }
            if (now.value != prev.value) {
                throw std::logic_error("jump_log: jump of ell_" + std::to_string(m) + " at " + std::to_string(s) +
                                       " is not the transposition (" + std::to_string(m) + " " +
                                       std::to_string(partner) + ") at position " + std::to_string(p));
            }
        }
        log.push_back({s, m, partner});
    }
    return log;
}

ShiftedFiniteProcess::ShiftedFiniteProcess(MallowsProcessPath path, int k_n) : path_{std::move(path)}, k_n_{k_n} {}

int ShiftedFiniteProcess::ell(int i, double t) const
{
    const long m = static_cast<long>(k_n_) + i;
    if (m < 1 || m > n()) {
        return 0;
    }
    return path_.path(static_cast<int>(m)).state_at(t);
}

std::int64_t ShiftedFiniteProcess::value(int i, double t) const
{
    const long m = static_cast<long>(k_n_) + i;
    if (m < 1 || m > n()) {
        return i;
    }
    return static_cast<std::int64_t>(value_at(path_, static_cast<int>(m), t)) - k_n_;
}

ShiftedFiniteProcess shifted_finite_process(int n, int k_n, double T, const CounterRng& rng,
                                            const ProcessOptions& options)
{
    if (!(T > 0.0) || !(T < 1.0)) {
        throw std::invalid_argument("shifted_finite_process: need 0 < T < 1");
    }
    return ShiftedFiniteProcess(simulate_process(n, T, rng, options), k_n);
}

JumpPath thinned_path(const JumpPath& limiting, int finite_index, double T, const CounterRng& uniforms, int m,
                      std::vector<double>* ratios)
{
    std::vector<double> kept;
    int x = 0;
    auto times = limiting.jump_times();
    for (std::size_t j = 0; j < times.size() && times[j] <= T; ++j) {
        const double s = times[j];
        const double proposal = rate_limiting(static_cast<int>(j), s);
        const double target = rate_finite(finite_index, x, s);
        double ratio = target / proposal;
        if (ratio > 1.0 + kRatioTolerance) {
            throw DominatorViolation(x, s, target, proposal);
        }
        ratio = std::clamp(ratio, 0.0, 1.0);
        if (ratios != nullptr) {
            ratios->push_back(ratio);
        }
        if (addressed_uniform(uniforms, zigzag(m), j + 1) <= ratio) {
            ++x;
            kept.push_back(s);
        }
    }
    return JumpPath(std::move(kept));
}

CouplingRecord coupled_simulation(int n, int k_n, int lo, int hi, double T, const CounterRng& rng)
{
    if (n < 1 || hi < lo || !(T >= 0.0) || !(T < 1.0)) {
        throw std::invalid_argument("coupled_simulation: need n >= 1, lo <= hi and 0 <= T < 1");
    }
    CouplingRecord rec;
    rec.n = n;
    rec.k_n = k_n;
    rec.lo = lo;
    rec.hi = hi;
    rec.T = T;

    ZWindow w(rng.split(0), T, lo, hi);
    const CounterRng uniforms = rng.split(1);
    Frame at_T(w, T, false);
    int last = hi;
    rec.certified = true;
    for (int i = lo; i <= hi; ++i) {
        RightInversions ri = right_inversions(std::ref(at_T), std::ref(at_T), i, window_rule(w, i));
        rec.certified = rec.certified && ri.exact;
        last = std::max(last, ri.horizon);
    }

    // Both Sigma and Sigma^n on [lo, hi] are functions of the data on [lo, last]:
    // the finite counts never exceed the limiting ones.
    std::vector<JumpPath> finite;
    std::vector<JumpEvent> events;
    for (int m = lo; m <= last; ++m) {
        const JumpPath& p = w.path(m);
        const long fi = static_cast<long>(m) + k_n;
        if (fi >= 1 && fi <= n) {
            finite.push_back(thinned_path(p, static_cast<int>(fi), T, uniforms, m, &rec.ratios));
        } else {
            finite.emplace_back();
        }
        for (double s : p.jump_times()) {
            if (s <= T) {
                events.push_back({s, m});
            }
        }
        rec.proposed += static_cast<std::size_t>(w.ell(m, T));
        rec.accepted += finite.back().jump_count();
    }
    std::sort(events.begin(), events.end(), [](const JumpEvent& x, const JumpEvent& y) { return x.time < y.time; });

    const std::size_t width = static_cast<std::size_t>(last - lo + 1);
    std::vector<int> lim(width, 0);
    std::vector<int> fin(width, 0);
    rec.agree.assign(static_cast<std::size_t>(hi - lo + 1), true);
    auto compare = [&] {
        for (int i = lo; i <= hi; ++i) {
            const long fi = static_cast<long>(i) + k_n;
            const std::int64_t finite_value = fi >= 1 && fi <= n ? sigma_from_block(fin, lo, i) : i;
            if (sigma_from_block(lim, lo, i) != finite_value) {
                rec.agree[static_cast<std::size_t>(i - lo)] = false;
            }
        }
    };
    compare();
    for (const JumpEvent& e : events) {
        const auto k = static_cast<std::size_t>(e.index - lo);
        lim[k] += 1;
        fin[k] = finite[k].state_at(e.time);
        compare();
    }
    rec.all_agree = std::all_of(rec.agree.begin(), rec.agree.end(), [](bool v) { return v; });
    return rec;
}

}  // namespace mallows
