#include "mallows/global_limit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mallows/mallows_process.hpp"
#include "mallows/parallel.hpp"

namespace mallows {

namespace {

constexpr double kSeriesCutoff = 1e-4;
constexpr double kLargeTime = 30.0;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logaddexp(double u, double v)
{
    double m = std::max(u, v);
    if (m == kNegInf) {
        return kNegInf;
    }
    return m + std::log1p(std::exp(-std::abs(u - v)));
}

double safe_log(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

/// log(expm1(s)) for s >= 0.
double log_expm1(double s)
{
    if (s <= 0.0) {
        return kNegInf;
    }
    return s < kLargeTime ? std::log(std::expm1(s)) : s + std::log1p(-std::exp(-s));
}

/// log(-expm1(s)) = log(1 - e^s) for s <= 0.
double log_one_minus_exp(double s)
{
    if (s >= 0.0) {
        return kNegInf;
    }
    return s > -0.693 ? std::log(-std::expm1(s)) : std::log1p(-std::exp(s));
}

/// log(1 + e^u).
double softplus(double u) { return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }

/// expm1(u) / expm1(v) for u, v of the same sign, without overflow.
double expm1_ratio(double u, double v)
{
    if (u > kLargeTime || v > kLargeTime) {
        return std::exp(u - v) * (-std::expm1(-u)) / (-std::expm1(-v));
    }
    return std::expm1(u) / std::expm1(v);
}

void check_unit(double v, const char* what)
{
    if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
    }
}

}  // namespace

double z_curve(double x, double a, double t)
{
    check_unit(x, "z_curve: x");
    check_unit(a, "z_curve: a");
    if (std::abs(t) < kSeriesCutoff) {
        const double c = a * (a - 1.0);
        return a + c * (2.0 * x - 1.0) / 2.0 * t + c * (2.0 * a - 1.0) * (3.0 * x * x - 3.0 * x + 1.0) / 6.0 * t * t +
               c * (2.0 * x - 1.0) * (6.0 * a * a - 6.0 * a + 1.0) * (2.0 * x * x - 2.0 * x + 1.0) / 24.0 * t * t * t;
    }
    double z;
    if (std::abs(t) <= kLargeTime) {
        double arg = a * std::expm1(t) / (std::exp(x * t) * (1.0 - a) + a);
        if (arg > -0.5) {
            z = std::log1p(arg) / t;
            return std::clamp(z, 0.0, 1.0);
        }
    }
    const double la = safe_log(a);
    const double lb = safe_log(1.0 - a);
    z = (logaddexp(x * t + lb, t + la) - logaddexp(x * t + lb, la)) / t;
    return std::clamp(z, 0.0, 1.0);
}

double lambda_rate(double x, double y, double t)
{
    check_unit(x, "lambda_rate: x");
    check_unit(y, "lambda_rate: y");
    if (std::abs(t) < kSeriesCutoff) {
        const double d = x - y;
        return y * d / 2.0 + y * (x - 2.0 * y) * d / 12.0 * t - y * y * d * d / 24.0 * t * t -
               y * (x - 2.0 * y) * d * (x * x + 3.0 * x * y - 3.0 * y * y) / 720.0 * t * t * t;
    }
    double lead;
    if (x == 0.0) {
        lead = -std::expm1(-t * y) / t;
    } else {
        lead = x * expm1_ratio(-t * y, -t * x);
    }
    return (lead - y) / t;
}

double inversion_fluid_limit(double x, double a, double t)
{
    check_unit(x, "inversion_fluid_limit: x");
    check_unit(a, "inversion_fluid_limit: a");
    const double b = 1.0 - a;
    if (std::abs(t) < kSeriesCutoff) {
        return b * x + b * x * x * (1.0 - b) / 2.0 * t + b * x * x * x * (1.0 - b) * (1.0 - 2.0 * b) / 6.0 * t * t +
               b * x * x * x * x * (1.0 - 7.0 * b + 12.0 * b * b - 6.0 * b * b * b) / 24.0 * t * t * t;
    }
    if (std::abs(t * x) <= kLargeTime) {
        double arg = b * std::expm1(t * x);
        if (arg > -0.5) {
            return std::log1p(arg) / t;
        }
    }
    return logaddexp(safe_log(a), safe_log(b) + t * x) / t;
}

OdeSolution ode_solve(double x, double y0, double t0, double t1, double step)
{
    if (!(step > 0.0)) {
        throw std::invalid_argument("ode_solve: step must be positive");
    }
    check_unit(x, "ode_solve: x");
    if (!(y0 >= 0.0 && y0 <= x)) {
        throw std::invalid_argument("ode_solve: need 0 <= y0 <= x");
    }
    auto f = [x](double t, double y) { return lambda_rate(x, std::clamp(y, 0.0, x), t); };
    OdeSolution out;
    out.t.push_back(t0);
    out.y.push_back(y0);
    const double direction = t1 >= t0 ? 1.0 : -1.0;
    const auto steps = static_cast<long>(std::ceil(std::abs(t1 - t0) / step - 1e-9));
    double t = t0;
    double y = y0;
    for (long k = 1; k <= steps; ++k) {
        double next = k == steps ? t1 : t0 + direction * step * static_cast<double>(k);
        double h = next - t;
        double k1 = f(t, y);
        double k2 = f(t + h / 2.0, y + h / 2.0 * k1);
        double k3 = f(t + h / 2.0, y + h / 2.0 * k2);
        double k4 = f(t + h, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = next;
        out.t.push_back(t);
        out.y.push_back(y);
    }
    return out;
}

double rho_density(double beta, double x, double y)
{
    check_unit(x, "rho_density: x");
    check_unit(y, "rho_density: y");
    if (std::abs(beta) < kSeriesCutoff) {
        const double u = 2.0 * x - 1.0;
        const double v = 2.0 * y - 1.0;
        return 1.0 - u * v / 2.0 * beta + (6.0 * x * x - 6.0 * x + 1.0) * (6.0 * y * y - 6.0 * y + 1.0) / 12.0 * beta * beta -
               u * v *
                   (12.0 * x * x * y * y - 12.0 * x * x * y + x * x - 12.0 * x * y * y + 12.0 * x * y - x + y * y - y) /
                   12.0 * beta * beta * beta;
    }
    double den = std::exp(-beta / 4.0) * std::cosh(beta * (x - y) / 2.0) -
                 std::exp(beta / 4.0) * std::cosh(beta * (x + y - 1.0) / 2.0);
    return (beta / 2.0) * std::sinh(beta / 2.0) / (den * den);
}

double F_map(double x, double t, double z)
{
    check_unit(x, "F_map: x");
    check_unit(z, "F_map: z");
    if (std::abs(t) < kSeriesCutoff) {
        const double c = x * z * (x - 1.0) * (z - 1.0);
        return x * (1.0 - z) + c / 2.0 * t - c * (2.0 * x - 1.0) * (2.0 * z - 1.0) / 12.0 * t * t +
               c * (6.0 * x * x * z * z - 6.0 * x * x * z + x * x - 6.0 * x * z * z + 6.0 * x * z - x + z * z - z) / 24.0 *
                   t * t * t;
    }
    double f;
    if (t > 0.0) {
        // x - (1/t) log(1 + expm1(xt) expm1(zt) / expm1(t)), all terms positive.
        f = x - softplus(log_expm1(x * t) + log_expm1(z * t) - log_expm1(t)) / t;
    } else {
        // Denominator written as e^{xt}(1 - e^{zt}) + e^{zt}(1 - e^{(1-z)t}), a sum of nonnegative terms.
        double den = logaddexp(x * t + log_one_minus_exp(z * t), z * t + log_one_minus_exp((1.0 - z) * t));
        f = x + (log_one_minus_exp(t) - den) / t;
    }
    return std::clamp(f, 0.0, x);
}

double F_inverse(double x, double t, double w)
{
    check_unit(x, "F_inverse: x");
    if (!(w >= 0.0 && w <= x)) {
        throw std::invalid_argument("F_inverse: w must lie in [0, x]");
    }
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        double mid = 0.5 * (lo + hi);
        if (F_map(x, t, mid) > w) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double mu_beta_cdf(double beta, double x, double y)
{
    x = std::clamp(x, 0.0, 1.0);
    y = std::clamp(y, 0.0, 1.0);
    return std::max(0.0, x - F_map(x, beta, y));
}

double mu_beta_rect(double beta, const Rect& r)
{
    if (r.b < r.a || r.d < r.c) {
        return 0.0;
    }
    return mu_beta_cdf(beta, r.b, r.d) - mu_beta_cdf(beta, r.a, r.d) - mu_beta_cdf(beta, r.b, r.c) +
           mu_beta_cdf(beta, r.a, r.c);
}

double delta_rect(const Permutation& p, const Rect& r)
{
    if (r.b < r.a || r.d < r.c) {
        return 0.0;
    }
    const int n = p.size();
    auto lower = [n](double v) { return std::max(1, static_cast<int>(std::ceil(v * n - 1e-9))); };
    auto upper = [n](double v) { return std::min(n, static_cast<int>(std::floor(v * n + 1e-9))); };
    const int i_lo = lower(r.a);
    const int i_hi = upper(r.b);
    const int v_lo = lower(r.c);
    const int v_hi = upper(r.d);
    int count = 0;
    for (int i = i_lo; i <= i_hi; ++i) {
        count += p(i) >= v_lo && p(i) <= v_hi ? 1 : 0;
    }
    return static_cast<double>(count) / n;
}

double box_discrepancy(const Permutation& p, double beta, int k)
{
    if (k < 1) {
        throw std::invalid_argument("box_discrepancy: k must be >= 1");
    }
    const int n = p.size();
    const auto kk = static_cast<std::size_t>(k) + 1;
    // Integer index ranges of the closed intervals with grid endpoints m/k.
    std::vector<int> lo(kk);
    std::vector<int> hi(kk);
    for (int m = 0; m <= k; ++m) {
        auto mn = static_cast<long long>(m) * n;
        lo[static_cast<std::size_t>(m)] = static_cast<int>(std::max<long long>(1, (mn + k - 1) / k));
        hi[static_cast<std::size_t>(m)] = static_cast<int>(mn / k);
    }
    std::vector<double> cdf(kk * kk);
    for (int a = 0; a <= k; ++a) {
        for (int c = 0; c <= k; ++c) {
            cdf[static_cast<std::size_t>(a) * kk + static_cast<std::size_t>(c)] =
                mu_beta_cdf(beta, static_cast<double>(a) / k, static_cast<double>(c) / k);
        }
    }
    // For a value v, the first grid index c with hi[c] >= v and with lo[c] > v.
    std::vector<int> first_le(static_cast<std::size_t>(n) + 1);
    std::vector<int> first_lt(static_cast<std::size_t>(n) + 1);
    for (int v = 1; v <= n; ++v) {
        int c = 0;
        while (c <= k && hi[static_cast<std::size_t>(c)] < v) {
            ++c;
        }
        first_le[static_cast<std::size_t>(v)] = c;
        c = 0;
        while (c <= k && lo[static_cast<std::size_t>(c)] <= v) {
            ++c;
        }
        first_lt[static_cast<std::size_t>(v)] = c;
    }

    double worst = 0.0;
    std::vector<int> bump_le(kk + 1);
    std::vector<int> bump_lt(kk + 1);
    for (int a = 0; a <= k; ++a) {
        std::fill(bump_le.begin(), bump_le.end(), 0);
        std::fill(bump_lt.begin(), bump_lt.end(), 0);
        int next_position = lo[static_cast<std::size_t>(a)];
        for (int b = a; b <= k; ++b) {
            for (; next_position <= hi[static_cast<std::size_t>(b)]; ++next_position) {
                int v = p(next_position);
                ++bump_le[static_cast<std::size_t>(first_le[static_cast<std::size_t>(v)])];
                ++bump_lt[static_cast<std::size_t>(first_lt[static_cast<std::size_t>(v)])];
            }
            // Rectangle [a, b] x [c, d] has discrepancy A(d) - B(c) with c <= d.
            int le = 0;
            int lt = 0;
            double max_b = -std::numeric_limits<double>::infinity();
            double min_b = std::numeric_limits<double>::infinity();
            for (int c = 0; c <= k; ++c) {
                le += bump_le[static_cast<std::size_t>(c)];
                lt += bump_lt[static_cast<std::size_t>(c)];
                double h = cdf[static_cast<std::size_t>(b) * kk + static_cast<std::size_t>(c)] -
                           cdf[static_cast<std::size_t>(a) * kk + static_cast<std::size_t>(c)];
                double big_a = static_cast<double>(le) / n - h;
                double big_b = static_cast<double>(lt) / n - h;
                max_b = std::max(max_b, big_b);
                min_b = std::min(min_b, big_b);
                worst = std::max({worst, big_a - min_b, max_b - big_a});
            }
        }
    }
    return worst;
}

PermutonGrid permuton_grid(double beta, int k)
{
    if (k < 1) {
        throw std::invalid_argument("permuton_grid: k must be >= 1");
    }
    PermutonGrid g;
    g.k = k;
    g.cells.resize(static_cast<std::size_t>(k) * static_cast<std::size_t>(k));
    for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) {
            g.cells[static_cast<std::size_t>(r) * static_cast<std::size_t>(k) + static_cast<std::size_t>(c)] =
                mu_beta_rect(beta, {static_cast<double>(r) / k, static_cast<double>(r + 1) / k,
                                    static_cast<double>(c) / k, static_cast<double>(c + 1) / k});
        }
    }
    return g;
}

std::vector<double> element_sup_deviations(int n, double T, int t_grid_size, const CounterRng& rng,
                                           std::uint64_t* jumps)
{
    if (n < 1 || !(T > 0.0) || t_grid_size < 2) {
        throw std::invalid_argument("element_sup_deviations: need n >= 1, T > 0, grid size >= 2");
    }
    const double nd = n;
    const double q_lo = std::exp(-T / nd);
    const double q_hi = std::exp(T / nd);
    MallowsProcessPath pp = simulate_process(n, q_hi, rng);
    if (jumps != nullptr) {
        *jumps = pp.total_jumps();
    }
    const Permutation at_zero = permutation_at(pp, 1.0);
    std::vector<double> start(static_cast<std::size_t>(n));
    std::vector<double> home(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
        start[static_cast<std::size_t>(i - 1)] = at_zero(i) / nd;
        home[static_cast<std::size_t>(i - 1)] = i / nd;
    }

    PermutationSweep sweep(permutation_at(pp, q_lo));
    std::vector<double> sup(static_cast<std::size_t>(n), 0.0);
    auto observe = [&](int position, double t) {
        auto idx = static_cast<std::size_t>(position - 1);
        double dev = std::abs(sweep.value(position) / nd - z_curve(home[idx], start[idx], t));
        sup[idx] = std::max(sup[idx], dev);
    };

    std::vector<JumpEvent> events = merged_jumps(pp, q_lo, q_hi);
    std::size_t next_event = 0;
    for (int g = 0; g < t_grid_size; ++g) {
        const double t_grid = g + 1 == t_grid_size ? T : -T + 2.0 * T * g / (t_grid_size - 1);
        for (; next_event < events.size(); ++next_event) {
            const double t = nd * std::log(events[next_event].time);
            if (t > t_grid) {
                break;
            }
            // Both sides of the jump: the path is piecewise constant and z continuous.
            const int k = events[next_event].index;
            const int partner = sweep.partner(k);
            observe(k, t);
            observe(partner, t);
            sweep.apply(k);
            observe(k, t);
            observe(partner, t);
        }
        for (int i = 1; i <= n; ++i) {
            observe(i, t_grid);
        }
    }
    return sup;
}

DeviationReport sup_deviation_experiment(const DeviationConfig& config)
{
    if (config.n < 1 || !(config.T > 0.0) || !(config.alpha > 0.0 && config.alpha < 0.5) || config.replicas < 1 ||
        config.t_grid_size < 2) {
        throw std::invalid_argument("sup_deviation_experiment: invalid configuration");
    }
    DeviationReport report;
    report.config = config;
    const double nd = config.n;
    std::vector<int> interior;
    for (int i = 1; i <= config.n; ++i) {
        if (i > config.alpha * nd && i < (1.0 - config.alpha) * nd) {
            interior.push_back(i);
        }
    }
    if (interior.empty()) {
        report.no_interior_elements = true;
        return report;
    }
    const CounterRng root = CounterRng::from_seed(config.seed);
    report.records.resize(static_cast<std::size_t>(config.replicas));
    parallel_for(report.records.size(), config.threads, [&](std::size_t r) {
        DeviationRecord rec;
        rec.replica = static_cast<int>(r);
        std::vector<double> sup =
            element_sup_deviations(config.n, config.T, config.t_grid_size, root.split(r), &rec.jumps);
        std::vector<double> inner;
        inner.reserve(interior.size());
        for (int i : interior) {
            inner.push_back(sup[static_cast<std::size_t>(i - 1)]);
        }
        for (int i = 1; i <= config.n; ++i) {
            if (!std::binary_search(interior.begin(), interior.end(), i)) {
                rec.boundary_max = std::max(rec.boundary_max, sup[static_cast<std::size_t>(i - 1)]);
            }
        }
        rec.max_sup_dev = *std::max_element(inner.begin(), inner.end());
        rec.p50 = stats::quantile(inner, 0.5);
        rec.p95 = stats::quantile(inner, 0.95);
        report.records[r] = rec;
    });
    std::vector<double> maxima;
    for (const auto& rec : report.records) {
        maxima.push_back(rec.max_sup_dev);
    }
    report.median_max = stats::median(maxima);
    report.p95_max = stats::quantile(maxima, 0.95);
    report.median_ci = stats::bootstrap_median_ci(maxima, 0.95, 2000, root.split(~std::uint64_t{0}));
    return report;
}

ParticleReport random_particle_experiment(const ParticleConfig& config)
{
    if (config.n < 1 || config.replicas < 0) {
        throw std::invalid_argument("random_particle_experiment: invalid configuration");
    }
    ParticleReport report;
    report.config = config;
    if (config.times.empty() || config.replicas == 0) {
        return report;
    }
    const double nd = config.n;
    std::vector<double> q_times;
    for (double t : config.times) {
        q_times.push_back(std::exp(t / nd));
    }
    const CounterRng root = CounterRng::from_seed(config.seed);
    const CounterRng sim_root = root.split(1);
    const CounterRng limit_root = root.split(2);
    report.simulated.resize(static_cast<std::size_t>(config.replicas));
    report.limit.resize(static_cast<std::size_t>(config.replicas));
    parallel_for(static_cast<std::size_t>(config.replicas), config.threads, [&](std::size_t r) {
        CounterRng pick = sim_root.split(r);
        const int i = 1 + static_cast<int>(pick.below(static_cast<std::uint64_t>(config.n)));
        std::vector<int> values = element_values(config.n, i, q_times, pick.split(0));
        std::vector<double> row;
        for (int v : values) {
            row.push_back(v / nd);
        }
        report.simulated[r] = std::move(row);

        CounterRng lim = limit_root.split(r);
        const double x = lim.uniform();
        const double a = lim.uniform();
        std::vector<double> zrow;
        for (double t : config.times) {
            zrow.push_back(z_curve(x, a, t));
        }
        report.limit[r] = std::move(zrow);
    });
    for (std::size_t m = 0; m < config.times.size(); ++m) {
        std::vector<double> a;
        std::vector<double> b;
        for (std::size_t r = 0; r < report.simulated.size(); ++r) {
            a.push_back(report.simulated[r][m]);
            b.push_back(report.limit[r][m]);
        }
        report.ks_per_time.push_back(stats::ks_distance_two_sample(std::move(a), std::move(b)));
    }
    const auto cap = std::min<std::size_t>(report.simulated.size(), static_cast<std::size_t>(config.energy_sample_cap));
    std::vector<std::vector<double>> sa(report.simulated.begin(), report.simulated.begin() + static_cast<std::ptrdiff_t>(cap));
    std::vector<std::vector<double>> sb(report.limit.begin(), report.limit.begin() + static_cast<std::ptrdiff_t>(cap));
    report.energy = stats::energy_distance(sa, sb);
    return report;
}

}  // namespace mallows
