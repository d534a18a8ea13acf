// Acceptance suite: one PASS/FAIL line per criterion. Oracles are written
// here, independently of the library code they check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mallows/birth_process.hpp"
#include "mallows/global_limit.hpp"
#include "mallows/harness.hpp"
#include "mallows/local_limit.hpp"
#include "mallows/mallows_process.hpp"
#include "mallows/parallel.hpp"
#include "mallows/permutation.hpp"
#include "mallows/rng.hpp"

using namespace mallows;
namespace hx = mallows::harness;

namespace {

int threads()
{
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

class Timer
{
  public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

struct Verdict
{
    bool pass;
    std::string detail;
};

// ---------------------------------------------------------------- oracles

std::vector<int> brute_left_inversions(const std::vector<int>& s)
{
    std::vector<int> ell(s.size(), 0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            ell[i] += s[j] > s[i] ? 1 : 0;
        }
    }
    return ell;
}

std::int64_t brute_inversions(const std::vector<int>& s)
{
    std::int64_t c = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = i + 1; j < s.size(); ++j) {
            c += s[i] > s[j] ? 1 : 0;
        }
    }
    return c;
}

// Position i holds the (ell_i + 1)-st largest value not used by positions after i.
std::vector<int> brute_decode(const std::vector<int>& ell)
{
    const int n = static_cast<int>(ell.size());
    std::vector<int> free(static_cast<std::size_t>(n));
    std::iota(free.begin(), free.end(), 1);
    std::vector<int> s(static_cast<std::size_t>(n));
    for (int i = n - 1; i >= 0; --i) {
        auto idx = free.size() - 1 - static_cast<std::size_t>(ell[static_cast<std::size_t>(i)]);
        s[static_cast<std::size_t>(i)] = free[idx];
        free.erase(free.begin() + static_cast<std::ptrdiff_t>(idx));
    }
    return s;
}

// Mallows law by enumeration, keyed by the permutation itself.
std::map<std::vector<int>, double> brute_mallows(int n, double q)
{
    std::map<std::vector<int>, double> law;
    std::vector<int> s(static_cast<std::size_t>(n));
    std::iota(s.begin(), s.end(), 1);
    double z = 0.0;
    do {
        const double w = std::pow(q, static_cast<double>(brute_inversions(s)));
        law[s] = w;
        z += w;
    } while (std::next_permutation(s.begin(), s.end()));
    for (auto& [k, w] : law) {
        w /= z;
    }
    return law;
}

double tv(const std::map<std::vector<int>, double>& law, const std::map<std::vector<int>, std::uint64_t>& counts,
          std::uint64_t total)
{
    double d = 0.0;
    for (const auto& [k, p] : law) {
        auto it = counts.find(k);
        const double f = it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
        d += std::abs(p - f);
    }
    return 0.5 * d;
}

// E[TV] for N multinomial draws, normal approximation.
double tv_noise(const std::map<std::vector<int>, double>& law, double N)
{
    double e = 0.0;
    for (const auto& [k, p] : law) {
        e += std::sqrt(2.0 * p * (1.0 - p) / (M_PI * N));
    }
    return 0.5 * e;
}

double chi_square_p(const std::map<std::vector<int>, double>& law,
                    const std::map<std::vector<int>, std::uint64_t>& counts, std::uint64_t total)
{
    double stat = 0.0;
    for (const auto& [k, p] : law) {
        auto it = counts.find(k);
        const double o = it == counts.end() ? 0.0 : static_cast<double>(it->second);
        const double e = p * static_cast<double>(total);
        stat += (o - e) * (o - e) / e;
    }
    boost::math::chi_squared dist(static_cast<double>(law.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

double closed_form_rate(int i, int j, long double t)
{
    if (j >= i - 1) {
        return 0.0;
    }
    if (t == 1.0L) {
        return 0.5 * (j + 1.0) * (i - j - 1.0);
    }
    const long double num = static_cast<long double>(i) * std::pow(t, i - j - 1) * (std::pow(t, j + 1) - 1.0L);
    return static_cast<double>((static_cast<long double>(j + 1) - num / (std::pow(t, i) - 1.0L)) / (1.0L - t));
}

double closed_form_z(double x, double a, double t)
{
    if (t == 0.0) {
        return a;
    }
    return std::log((std::exp(x * t) * (1.0 - a) + a * std::exp(t)) / (std::exp(x * t) * (1.0 - a) + a)) / t;
}

double closed_form_y(double x, double a, double t)
{
    if (t == 0.0) {
        return x * (1.0 - a);
    }
    return std::log(a + (1.0 - a) * std::exp(t * x)) / t;
}

double kolmogorov_p(double d, double n)
{
    const double sn = std::sqrt(n);
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    if (lambda < 0.2) {
        return 1.0;
    }
    double s = 0.0;
    for (int k = 1; k <= 200; ++k) {
        s += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * lambda * lambda);
    }
    return std::clamp(s, 0.0, 1.0);
}

// Closed-rectangle discrepancy against Lebesgue measure over grid corners, via 2-D prefix counts.
double brute_box_discrepancy_uniform(const Permutation& p, int k)
{
    const int n = p.size();
    std::vector<int> pre(static_cast<std::size_t>((n + 1) * (n + 1)), 0);
    auto at = [&](int i, int v) -> int& { return pre[static_cast<std::size_t>(i * (n + 1) + v)]; };
    for (int i = 1; i <= n; ++i) {
        for (int v = 1; v <= n; ++v) {
            at(i, v) = at(i - 1, v) + at(i, v - 1) - at(i - 1, v - 1) + (p(i) == v ? 1 : 0);
        }
    }
    // Indices m with m/n in [g/k, h/k]: ceil(g n / k) .. floor(h n / k).
    auto lo = [&](int g) { return std::max(1, (g * n + k - 1) / k); };
    auto hi = [&](int h) { return h * n / k; };
    double worst = 0.0;
    for (int a = 0; a <= k; ++a) {
        for (int b = a; b <= k; ++b) {
            for (int c = 0; c <= k; ++c) {
                for (int d = c; d <= k; ++d) {
                    const int i0 = lo(a) - 1, i1 = hi(b), v0 = lo(c) - 1, v1 = hi(d);
                    int count = 0;
                    if (i1 > i0 && v1 > v0) {
                        count = at(i1, v1) - at(i0, v1) - at(i1, v0) + at(i0, v0);
                    }
                    const double area = static_cast<double>(b - a) * (d - c) / (static_cast<double>(k) * k);
                    worst = std::max(worst, std::abs(count / static_cast<double>(n) - area));
                }
            }
        }
    }
    return worst;
}

double num(const hx::Value& v)
{
    return std::visit(
        [](const auto& x) -> double {
            if constexpr (std::is_same_v<std::decay_t<decltype(x)>, std::string>) {
                return std::stod(x);
            } else {
                return static_cast<double>(x);
            }
        },
        v);
}

std::size_t column(const hx::Table& t, const std::string& name)
{
    return static_cast<std::size_t>(std::find(t.columns.begin(), t.columns.end(), name) - t.columns.begin());
}

double summary_value(const hx::ExperimentReport& r, int n, const std::string& key)
{
    for (const auto& row : r.summary.rows) {
        if (num(row[2]) == n && std::get<std::string>(row[3]) == key) {
            return num(row[4]);
        }
    }
    throw std::runtime_error("missing summary key " + key);
}

// ---------------------------------------------------------------- criteria

Verdict ac1()
{
    Timer timer;
    std::uint64_t checked = 0;
    std::uint64_t failures = 0;
    for (int n = 1; n <= 8; ++n) {
        std::vector<int> s(static_cast<std::size_t>(n));
        std::iota(s.begin(), s.end(), 1);
        std::uint64_t rank = 0;
        do {
            Permutation p(s);
            InversionVector ell = left_inversion_vector(p);
            const std::vector<int> brute = brute_left_inversions(s);
            bool ok = std::equal(brute.begin(), brute.end(), ell.values().begin(), ell.values().end());
            ok = ok && brute_decode(brute) == s;
            const Permutation back = decode_inversion_vector(InversionVector(brute));
            ok = ok && std::equal(s.begin(), s.end(), back.values().begin(), back.values().end());
            ok = ok && inv_count(p) == brute_inversions(s) && ell.sum() == brute_inversions(s);
            ok = ok && permutation_rank(s) == rank && permutation_unrank(n, rank) == p;
            failures += ok ? 0 : 1;
            ++checked;
            ++rank;
        } while (std::next_permutation(s.begin(), s.end()));
    }
    const double secs = timer.seconds();
    return {failures == 0 && checked == 46'233 && secs < 10.0,
            fmt("bijection oracle: %llu permutations (n<=8), %llu failures, %.2f s (limit 10 s)",
                static_cast<unsigned long long>(checked), static_cast<unsigned long long>(failures), secs)};
}

std::map<std::vector<int>, std::uint64_t> tally(std::size_t draws, const std::function<Permutation(std::size_t)>& draw)
{
    const std::size_t chunks = 64;
    std::vector<std::map<std::vector<int>, std::uint64_t>> part(chunks);
    parallel_for(chunks, threads(), [&](std::size_t c) {
        for (std::size_t r = c; r < draws; r += chunks) {
            Permutation p = draw(r);
            ++part[c][std::vector<int>(p.values().begin(), p.values().end())];
        }
    });
    std::map<std::vector<int>, std::uint64_t> all;
    for (const auto& m : part) {
        for (const auto& [k, v] : m) {
            all[k] += v;
        }
    }
    return all;
}

Verdict ac2()
{
    Timer timer;
    const std::size_t draws = 1'000'000;
    const CounterRng root = CounterRng::from_seed(2002);
    double worst = 0.0;
    std::uint64_t label = 0;
    std::string detail;
    for (int n : {4, 5}) {
        for (double q : {0.3, 1.0, 2.0}) {
            const auto law = brute_mallows(n, q);
            const CounterRng sub = root.split(label++);
            auto counts = tally(draws, [&](std::size_t r) {
                CounterRng g = sub.split(r);
                return sample_mallows(n, q, g);
            });
            const double d = tv(law, counts, draws);
            worst = std::max(worst, d);
            detail += fmt(" (%d,%.1f)=%.4f", n, q, d);
        }
    }
    const double secs = timer.seconds();
    return {worst < 0.01 && secs < 60.0,
            fmt("static sampler TV at 1e6 draws:%s; max %.4f (< 0.01), %.1f s (limit 60 s)", detail.c_str(), worst,
                secs)};
}

Verdict ac3()
{
    const std::size_t replicas = 100'000;
    const CounterRng root = CounterRng::from_seed(3003);
    double worst = 0.0;
    double min_p = 1.0;
    std::string detail;
    std::uint64_t label = 0;
    for (double q : {0.5, 1.0, 1.5}) {
        const auto law = brute_mallows(5, q);
        const CounterRng sub = root.split(label++);
        auto counts = tally(replicas, [&](std::size_t r) {
            MallowsProcessPath pp = simulate_process(5, q, sub.split(r));
            return permutation_at(pp, q);
        });
        const double d = tv(law, counts, replicas);
        const double p = chi_square_p(law, counts, replicas);
        worst = std::max(worst, d);
        min_p = std::min(min_p, p);
        detail += fmt(" q=%.1f: TV=%.4f (noise %.4f) chi2 p=%.3f;", q, d, tv_noise(law, replicas), p);
    }
    return {worst < 0.01,
            fmt("process marginal n=5, 1e5 replicas:%s max TV %.4f (< 0.01)", detail.c_str(), worst)};
}

Verdict ac4()
{
    double continuity = 0.0;
    double formula = 0.0;
    for (int i = 1; i <= 200; ++i) {
        for (int j = 0; j < i; ++j) {
            const double at_one = 0.5 * (j + 1.0) * (i - j - 1.0);
            const double scale = std::max(1.0, at_one);
            continuity = std::max(continuity, std::abs(rate_finite(i, j, 1.0) - at_one) / scale);
            for (double h : {1e-9, 1e-10, 1e-12}) {
                continuity = std::max(continuity, std::abs(rate_finite(i, j, 1.0 + h) - at_one) / scale);
                continuity = std::max(continuity, std::abs(rate_finite(i, j, 1.0 - h) - at_one) / scale);
            }
            for (double q : {0.2, 0.5, 0.8, 1.25, 2.0}) {
                const double ref = closed_form_rate(i, j, q);
                formula = std::max(formula, std::abs(rate_finite(i, j, q) - ref) / std::max(1.0, std::abs(ref)));
            }
        }
    }
    double p2 = 0.0;
    for (int k = 0; k <= 1000; ++k) {
        const double q = 0.005 * k;
        p2 = std::max(p2, std::abs(rate_finite(2, 0, q) - 1.0 / (1.0 + q)));
    }
    return {continuity < 1e-6 && p2 < 1e-12 && formula < 1e-9,
            fmt("rates: continuity across q=1 (i<=200) rel err %.2e (< 1e-6); p_2(0,q) err %.2e (< 1e-12); "
                "closed form rel err %.2e",
                continuity, p2, formula)};
}

Verdict ac5()
{
    double worst = 0.0;
    for (int ix = 0; ix < 10; ++ix) {
        for (int ia = 0; ia < 10; ++ia) {
            const double x = (ix + 0.5) / 10.0;
            const double a = (ia + 0.5) / 10.0;
            OdeSolution sol = ode_solve(x, x * (1.0 - a), 0.0, 5.0, 1e-3);
            for (std::size_t k = 0; k < sol.t.size(); ++k) {
                worst = std::max(worst, std::abs(sol.y[k] - closed_form_y(x, a, sol.t[k])));
            }
        }
    }
    return {worst < 1e-8, fmt("RK4 (step 1e-3, t in [0,5], 10x10 grid) vs closed form: max err %.2e (< 1e-8)", worst)};
}

Verdict ac6()
{
    double f_err = 0.0;
    double rev = 0.0;
    double z_err = 0.0;
    for (int ix = 1; ix <= 19; ++ix) {
        for (int ia = 1; ia <= 19; ++ia) {
            const double x = ix / 20.0;
            const double a = ia / 20.0;
            for (double t : {-8.0, -3.0, -1.0, -0.1, 1e-4, 0.2, 1.0, 2.5, 8.0}) {
                const double z = z_curve(x, a, t);
                z_err = std::max(z_err, std::abs(z - closed_form_z(x, a, t)));
                f_err = std::max(f_err, std::abs(F_map(x, t, z) - closed_form_y(x, a, t)));
                rev = std::max(rev, std::abs(1.0 - z_curve(x, 1.0 - a, -t) - z));
            }
        }
    }
    double marginal = 0.0;
    double corner = 0.0;
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    for (double beta : {-4.0, -1.0, 0.0, 0.5, 2.0, 6.0, 10.0}) {
        for (int k = 0; k <= 10; ++k) {
            const double u = k / 10.0;
            const double mx = GK::integrate([&](double y) { return rho_density(beta, u, y); }, 0.0, 1.0, 15, 1e-13);
            const double my = GK::integrate([&](double x) { return rho_density(beta, x, u); }, 0.0, 1.0, 15, 1e-13);
            marginal = std::max({marginal, std::abs(mx - 1.0), std::abs(my - 1.0)});
        }
        if (beta > 0.0) {
            const double c = beta * std::expm1(beta) / (std::exp(beta) + std::exp(-beta) - 2.0);
            corner = std::max(corner, std::abs(rho_density(beta, 1.0, 0.0) - c) / c);
        }
    }
    return {f_err < 1e-10 && rev < 1e-12 && marginal < 1e-6 && corner < 1e-10 && z_err < 1e-10,
            fmt("F_x(z)=y err %.2e (< 1e-10); reversal err %.2e (< 1e-12); rho marginals err %.2e (< 1e-6); "
                "corner rel err %.2e (< 1e-10)",
                f_err, rev, marginal, corner)};
}

Verdict ac7()
{
    Timer timer;
    hx::ExperimentConfig c;
    c.kind = hx::ExperimentKind::global_verify;
    c.n_values = {100, 200, 400, 800};
    c.T = 2.0;
    c.alpha = 0.1;
    c.replicas = 50;
    c.seed = 7007;
    c.threads = threads();
    hx::ExperimentReport r = hx::run(c);
    const double secs = timer.seconds();

    // Dense-grid recomputation of replica 0 at n = 100 from the same stream.
    const int n = 100;
    MallowsProcessPath pp = simulate_process(n, std::exp(2.0 / n), CounterRng::from_seed(c.seed).split(0));
    const Permutation start = permutation_at(pp, 1.0);
    double oracle = 0.0;
    for (int g = 0; g <= 20'000; ++g) {
        const double t = -2.0 + 4.0 * g / 20'000.0;
        const Permutation p = permutation_at(pp, std::exp(t / n));
        for (int i = 11; i <= 89; ++i) {
            oracle = std::max(oracle, std::abs(p(i) / double(n) - closed_form_z(i / double(n), start(i) / double(n), t)));
        }
    }
    const double reported = num(r.records.rows[0][column(r.records, "max_sup_dev")]);
    const bool oracle_ok = oracle <= reported + 1e-12 && reported - oracle < 2e-3;

    std::vector<double> med;
    std::string detail;
    for (int size : c.n_values) {
        med.push_back(summary_value(r, size, "median_max_sup_dev"));
        detail += fmt(" n=%d: %.4f;", size, med.back());
    }
    bool decreasing = true;
    for (std::size_t k = 1; k < med.size(); ++k) {
        decreasing = decreasing && med[k] < med[k - 1];
    }
    const double hi800 = summary_value(r, 800, "median_ci_hi");
    const double lo100 = summary_value(r, 100, "median_ci_lo");
    const bool separated = hi800 < lo100;
    return {decreasing && separated && med.back() < 0.05 && secs < 1800.0 && oracle_ok,
            fmt("global medians:%s decreasing=%s; CI(800) hi %.4f < CI(100) lo %.4f: %s; n=800 median < 0.05: %s; "
                "oracle replica %.4f vs %.4f; %.1f s (limit 1800 s)",
                detail.c_str(), decreasing ? "yes" : "no", hi800, lo100, separated ? "yes" : "no",
                med.back() < 0.05 ? "yes" : "no", oracle, reported, secs)};
}

Verdict ac8()
{
    const CounterRng root = CounterRng::from_seed(8008);
    const int lo = -5;
    const int hi = 5;
    const std::size_t windows = 1000;
    const std::vector<double> times{0.3, 0.6, 0.9};
    std::vector<std::vector<int>> draws(windows);
    parallel_for(windows, threads(), [&](std::size_t r) {
        ZWindow w(root.split(0).split(r), 0.9, lo, hi);
        for (double t : times) {
            for (int i = lo; i <= hi; ++i) {
                draws[r].push_back(w.ell(i, t));
            }
        }
    });
    std::string detail;
    double min_ks = 1.0;
    const std::size_t width = static_cast<std::size_t>(hi - lo + 1);
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double t = times[k];
        std::map<int, std::uint64_t> hist;
        for (const auto& d : draws) {
            for (std::size_t m = k * width; m < (k + 1) * width; ++m) {
                ++hist[d[m]];
            }
        }
        const double total = static_cast<double>(windows * width);
        double cum = 0.0;
        double dmax = 0.0;
        for (int j = 0; j <= hist.rbegin()->first; ++j) {
            cum += static_cast<double>(hist[j]);
            dmax = std::max(dmax, std::abs(cum / total - (1.0 - std::pow(t, j + 1))));
        }
        const double p = kolmogorov_p(dmax, total);
        min_ks = std::min(min_ks, p);
        detail += fmt(" t=%.1f KS p=%.3f;", t, p);
    }

    const std::size_t replicas = 100'000;
    const double t = 0.5;
    const auto law = brute_mallows(4, t);
    std::vector<std::size_t> truncated(64, 0);
    std::vector<std::map<std::vector<int>, std::uint64_t>> part(64);
    parallel_for(64, threads(), [&](std::size_t c) {
        for (std::size_t r = c; r < replicas; r += 64) {
            ZWindow w(root.split(1).split(r), t, 0, 3);
            ZPermutationSlice s = sigma_slice(w, t, 0, 3);
            truncated[c] += s.all_exact() ? 0 : 1;
            std::vector<int> rel;
            for (std::int64_t v : s.values) {
                rel.push_back(1 + static_cast<int>(std::count_if(s.values.begin(), s.values.end(),
                                                                 [v](std::int64_t u) { return u < v; })));
            }
            ++part[c][rel];
        }
    });
    std::map<std::vector<int>, std::uint64_t> counts;
    for (const auto& m : part) {
        for (const auto& [k, v] : m) {
            counts[k] += v;
        }
    }
    const std::size_t bad = std::accumulate(truncated.begin(), truncated.end(), std::size_t{0});
    const double p = chi_square_p(law, counts, replicas);
    return {min_ks > 1e-3 && p > 1e-3 && bad == 0,
            fmt("ell_i(t) ~ geometric(1-t) over 1000 windows x 11:%s restriction chi2 p=%.3f (> 1e-3), %zu truncated",
                detail.c_str(), p, bad)};
}

Verdict ac9()
{
    const CounterRng root = CounterRng::from_seed(9009);
    const std::size_t windows = 1000;
    const int a = -5;
    const int b = 5;
    std::vector<std::size_t> events(windows, 0);
    std::vector<std::size_t> failures(windows, 0);
    std::vector<std::size_t> brute_checked(windows, 0);
    parallel_for(windows, threads(), [&](std::size_t r) {
        ZWindow w(root.split(r), 0.8, a, b);
        std::vector<TranspositionEvent> log;
        try {
            log = jump_log(w, a, b);
        } catch (const std::exception&) {
            ++failures[r];
            return;
        }
        events[r] = log.size();
        // Independent check on the first windows: across the whole span nothing but the two positions moves.
        if (r >= 50) {
            return;
        }
        for (const TranspositionEvent& e : log) {
            const int from = std::min({a, e.i, e.partner});
            const int to = std::max({b, e.i, e.partner});
            ZPermutationSlice before = sigma_slice_before(w, e.time, from, to);
            ZPermutationSlice after = sigma_slice(w, e.time, from, to);
            std::vector<int> moved;
            for (int p = from; p <= to; ++p) {
                if (before(p) != after(p)) {
                    moved.push_back(p);
                }
            }
            const bool ok = moved.size() == 2 && before(moved[0]) == after(moved[1]) &&
                            before(moved[1]) == after(moved[0]) &&
                            std::min(e.i, e.partner) == moved[0] && std::max(e.i, e.partner) == moved[1];
            failures[r] += ok ? 0 : 1;
            ++brute_checked[r];
        }
    });
    const std::size_t total = std::accumulate(events.begin(), events.end(), std::size_t{0});
    const std::size_t failed = std::accumulate(failures.begin(), failures.end(), std::size_t{0});
    const std::size_t brute = std::accumulate(brute_checked.begin(), brute_checked.end(), std::size_t{0});
    return {failed == 0 && total > 0,
            fmt("1000 windows {-5..5}, T=0.8: %zu jumps verified as transpositions (%zu also by full-span diff), "
                "%zu failures",
                total, brute, failed)};
}

Verdict ac10()
{
    hx::ExperimentConfig c;
    c.kind = hx::ExperimentKind::coupling;
    c.n_values = {50, 200, 800, 3200};
    c.T = 0.8;
    c.k_n_fraction = 0.5;
    c.window_lo = -5;
    c.window_hi = 5;
    c.replicas = 1000;
    c.seed = 10010;
    c.threads = threads();
    hx::ExperimentReport r;
    try {
        r = hx::run(c);
    } catch (const DominatorViolation& e) {
        return {false, std::string("acceptance ratio above 1: ") + e.what()};
    }
    double lo = 1.0;
    double hi = 0.0;
    for (const auto& row : r.records.rows) {
        lo = std::min(lo, num(row[column(r.records, "min_ratio")]));
        hi = std::max(hi, num(row[column(r.records, "max_ratio")]));
    }
    // Domination of the finite rates by the limiting ones, from the closed form.
    double dom = 0.0;
    for (int i = 1; i <= 400; i += 3) {
        for (int j = 0; j < i; ++j) {
            for (int k = 1; k < 100; ++k) {
                const double t = 0.8 * k / 100.0;
                dom = std::max(dom, closed_form_rate(i, j, t) * (1.0 - t) / (j + 1.0));
            }
        }
    }
    std::vector<double> freq;
    std::string detail;
    for (int n : c.n_values) {
        freq.push_back(summary_value(r, n, "agreement"));
        detail += fmt(" n=%d: %.3f;", n, freq.back());
    }
    bool monotone = true;
    for (std::size_t k = 1; k < freq.size(); ++k) {
        monotone = monotone && freq[k] >= freq[k - 1];
    }
    const bool ratios_ok = lo >= 0.0 && hi <= 1.0 + 1e-12 && dom <= 1.0 + 1e-12;
    return {ratios_ok && monotone && freq.back() >= 0.99,
            fmt("ratios in [%.4f, %.15f], closed-form max %.15f; agreement:%s nondecreasing=%s; >= 0.99 at 3200",
                lo, hi, dom, detail.c_str(), monotone ? "yes" : "no")};
}

Verdict ac11()
{
    const std::size_t replicas = 1000;
    const CounterRng root = CounterRng::from_seed(11011);
    std::vector<double> disc(replicas);
    parallel_for(replicas, threads(), [&](std::size_t r) {
        CounterRng g = root.split(r);
        disc[r] = box_discrepancy(sample_mallows(500, 1.0, g), 0.0, 50);
    });
    double oracle_gap = 0.0;
    for (std::size_t r = 0; r < 3; ++r) {
        CounterRng g = root.split(r);
        oracle_gap = std::max(oracle_gap, std::abs(brute_box_discrepancy_uniform(sample_mallows(500, 1.0, g), 50) - disc[r]));
    }
    const auto below = static_cast<std::size_t>(std::count_if(disc.begin(), disc.end(), [](double d) { return d < 0.05; }));
    std::vector<double> sorted = disc;
    std::sort(sorted.begin(), sorted.end());
    return {below >= 990 && oracle_gap < 1e-12,
            fmt("beta=0, n=500, k=50: %zu/1000 replicas below 0.05 (need >= 990); median %.4f, p99 %.4f; "
                "prefix-sum oracle gap %.1e",
                below, sorted[replicas / 2], sorted[replicas * 99 / 100], oracle_gap)};
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Verdict ac12()
{
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "mallows_acceptance_determinism";
    fs::remove_all(base);
    std::vector<hx::ExperimentConfig> configs;
    {
        hx::ExperimentConfig c;
        c.kind = hx::ExperimentKind::sample;
        c.n = 5;
        c.replicas = 100'000;
        configs.push_back(c);
        c = {};
        c.kind = hx::ExperimentKind::global_verify;
        c.n_values = {100, 200};
        c.replicas = 10;
        c.trajectory_elements = {1, 50, 100};
        c.particle_replicas = 50;
        configs.push_back(c);
        c = {};
        c.kind = hx::ExperimentKind::local_verify;
        c.replicas = 200;
        c.restriction_replicas = 20'000;
        c.transposition_windows = 100;
        configs.push_back(c);
        c = {};
        c.kind = hx::ExperimentKind::coupling;
        c.n_values = {50, 200, 800};
        c.replicas = 200;
        configs.push_back(c);
        c = {};
        c.kind = hx::ExperimentKind::oracle_suite;
        c.replicas = 20'000;
        configs.push_back(c);
    }
    std::size_t files = 0;
    std::size_t mismatches = 0;
    for (const auto& config : configs) {
        std::vector<std::vector<std::string>> contents;
        for (int run = 0; run < 3; ++run) {
            hx::ExperimentConfig c = config;
            c.seed = 12012;
            c.threads = run == 2 ? 4 : 1;
            const fs::path dir = base / ("run" + std::to_string(run));
            fs::create_directories(dir);
            hx::ExperimentReport rep = hx::run(c);
            std::vector<std::string> written = hx::emit(rep, hx::OutputFormat::csv, (dir / (hx::to_string(c.kind) + ".csv")).string());
            const std::string json_path = (dir / (hx::to_string(c.kind) + ".json")).string();
            hx::emit(rep, hx::OutputFormat::json, json_path);
            written.push_back(json_path);
            std::vector<std::string> bytes;
            for (const auto& w : written) {
                bytes.push_back(slurp(w));
            }
            contents.push_back(std::move(bytes));
        }
        files += contents[0].size();
        for (int run = 1; run < 3; ++run) {
            mismatches += contents[static_cast<std::size_t>(run)] == contents[0] ? 0 : 1;
        }
    }
    fs::remove_all(base);
    return {mismatches == 0 && files > 0,
            fmt("%zu report files per run, 5 kinds, repeated serially and with 4 threads: %zu mismatching runs", files,
                mismatches)};
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3},   {"AC4", ac4},   {"AC5", ac5},   {"AC6", ac6},
        {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10}, {"AC11", ac11}, {"AC12", ac12},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Timer timer;
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s %s: %s [%.1f s]\n", name.c_str(), v.pass ? "PASS" : "FAIL", v.detail.c_str(), timer.seconds());
        std::fflush(stdout);
        failed += v.pass ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
