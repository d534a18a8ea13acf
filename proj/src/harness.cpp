#include "mallows/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "mallows/birth_process.hpp"
#include "mallows/global_limit.hpp"
#include "mallows/local_limit.hpp"
#include "mallows/mallows_process.hpp"
#include "mallows/parallel.hpp"
#include "mallows/permutation.hpp"
#include "mallows/stats.hpp"

namespace mallows::harness {

namespace {

using nlohmann::json;

constexpr double kPValueFloor = 1e-3;
constexpr std::size_t kTallyChunks = 256;

const std::vector<std::pair<ExperimentKind, std::string>>& kind_names()
{
    static const std::vector<std::pair<ExperimentKind, std::string>> names = {
        {ExperimentKind::sample, "sample"},
        {ExperimentKind::global_verify, "global-verify"},
        {ExperimentKind::local_verify, "local-verify"},
        {ExperimentKind::coupling, "coupling"},
        {ExperimentKind::oracle_suite, "oracle-suite"},
    };
    return names;
}

bool is_local(ExperimentKind kind)
{
    return kind == ExperimentKind::local_verify || kind == ExperimentKind::coupling;
}

std::vector<Value> prefixed(const ExperimentConfig& c, int n, std::vector<Value> rest)
{
    std::vector<Value> row{cell(to_string(c.kind)), cell(c.seed), cell(n)};
    row.insert(row.end(), std::make_move_iterator(rest.begin()), std::make_move_iterator(rest.end()));
    return row;
}

Table make_table(std::string name, std::vector<std::string> rest)
{
    Table t;
    t.name = std::move(name);
    t.columns = {"experiment", "seed", "n"};
    t.columns.insert(t.columns.end(), rest.begin(), rest.end());
    return t;
}

Table summary_table()
{
    return make_table("summary", {"key", "value"});
}

void add_summary(Table& t, const ExperimentConfig& c, int n, const std::string& key, Value value)
{
    t.rows.push_back(prefixed(c, n, {cell(key), std::move(value)}));
}

/// Histogram of permutation ranks, tallied in fixed chunks so the result does not depend on threads.
template <class Draw>
std::vector<std::uint64_t> tally(std::size_t support, std::size_t replicas, int threads, Draw draw)
{
    const std::size_t chunks = std::min(kTallyChunks, std::max<std::size_t>(replicas, 1));
    std::vector<std::vector<std::uint64_t>> partial(chunks, std::vector<std::uint64_t>(support, 0));
    parallel_for(chunks, threads, [&](std::size_t c) {
        for (std::size_t r = c; r < replicas; r += chunks) {
            ++partial[c][draw(r)];
        }
    });
    std::vector<std::uint64_t> counts(support, 0);
    for (const auto& p : partial) {
        for (std::size_t k = 0; k < support; ++k) {
            counts[k] += p[k];
        }
    }
    return counts;
}

std::vector<double> time_grid(double T, int size)
{
    std::vector<double> g;
    for (int k = 0; k < size; ++k) {
        g.push_back(k + 1 == size ? T : -T + 2.0 * T * k / (size - 1));
    }
    return g;
}

ExperimentReport run_sample(const ExperimentConfig& c)
{
    ExperimentReport rep;
    rep.records = make_table("records", {"q", "method", "replicas", "tv", "chi2_p"});
    rep.summary = summary_table();
    const auto replicas = static_cast<std::size_t>(c.replica_count());
    if (replicas == 0) {
        return rep;
    }
    const FiniteDistribution oracle = enumerate_mallows(c.n, c.q);
    const CounterRng root = CounterRng::from_seed(c.seed);
    const CounterRng static_root = root.split(0);
    const CounterRng process_root = root.split(1);

    auto static_counts = tally(oracle.support_size(), replicas, c.threads, [&](std::size_t r) {
        CounterRng rng = static_root.split(r);
        return permutation_rank(sample_mallows(c.n, c.q, rng).values());
    });
    auto process_counts = tally(oracle.support_size(), replicas, c.threads, [&](std::size_t r) {
        MallowsProcessPath pp = simulate_process(c.n, c.q, process_root.split(r));
        return permutation_rank(permutation_at(pp, c.q).values());
    });
    for (const auto& [method, counts] : {std::pair{"static", &static_counts}, std::pair{"process", &process_counts}}) {
        const double tv = stats::tv_distance(oracle.masses(), *counts);
        const double p = stats::chi_square_test(*counts, oracle.masses()).p_value;
        rep.records.rows.push_back(
            prefixed(c, c.n, {cell(c.q), cell(std::string(method)), cell(static_cast<std::uint64_t>(replicas)),
                              cell(tv), cell(p)}));
        add_summary(rep.summary, c, c.n, std::string("tv_") + method, cell(tv));
    }
    return rep;
}

ExperimentReport run_global(const ExperimentConfig& c)
{
    ExperimentReport rep;
    rep.records = make_table("records", {"replica", "max_sup_dev", "p50", "p95", "boundary_max", "jumps"});
    rep.summary = summary_table();
    Table traj = make_table("trajectories", {"replica", "i", "t", "position", "limit"});
    Table particle = make_table("particle", {"t", "ks_distance"});
    const double T = c.horizon();
    const int replicas = c.replica_count();
    for (int n : c.sizes()) {
        if (replicas > 0) {
            DeviationConfig dc;
            dc.n = n;
            dc.T = T;
            dc.alpha = c.alpha;
            dc.replicas = replicas;
            dc.t_grid_size = c.t_grid_size;
            dc.seed = c.seed;
            dc.threads = c.threads;
            DeviationReport dr = sup_deviation_experiment(dc);
            for (const DeviationRecord& r : dr.records) {
                rep.records.rows.push_back(prefixed(c, n,
                                                    {cell(r.replica), cell(r.max_sup_dev), cell(r.p50), cell(r.p95),
                                                     cell(r.boundary_max), cell(r.jumps)}));
            }
            add_summary(rep.summary, c, n, "no_interior_elements", cell(dr.no_interior_elements));
            if (!dr.no_interior_elements) {
                add_summary(rep.summary, c, n, "median_max_sup_dev", cell(dr.median_max));
                add_summary(rep.summary, c, n, "p95_max_sup_dev", cell(dr.p95_max));
                add_summary(rep.summary, c, n, "median_ci_lo", cell(dr.median_ci.lo));
                add_summary(rep.summary, c, n, "median_ci_hi", cell(dr.median_ci.hi));
            }
        }

        // Same streams as the deviation replicas, so dumped paths are the measured ones.
        const CounterRng root = CounterRng::from_seed(c.seed);
        const std::vector<double> grid = time_grid(T, c.t_grid_size);
        const double nd = n;
        for (int r = 0; r < std::min(c.trajectory_replicas, replicas) && !c.trajectory_elements.empty(); ++r) {
            MallowsProcessPath pp = simulate_process(n, std::exp(T / nd), root.split(static_cast<std::uint64_t>(r)));
            for (int i : c.trajectory_elements) {
                const double start = value_at(pp, i, 1.0) / nd;
                for (double t : grid) {
                    traj.rows.push_back(prefixed(c, n,
                                                 {cell(r), cell(i), cell(t), cell(value_at(pp, i, std::exp(t / nd)) / nd),
                                                  cell(z_curve(i / nd, start, t))}));
                }
            }
        }

        if (c.particle_replicas > 0) {
            ParticleConfig pc;
            pc.n = n;
            pc.T = T;
            pc.replicas = c.particle_replicas;
            pc.times = c.particle_times;
            pc.seed = c.seed;
            pc.threads = c.threads;
            ParticleReport pr = random_particle_experiment(pc);
            for (std::size_t k = 0; k < pr.ks_per_time.size(); ++k) {
                particle.rows.push_back(prefixed(c, n, {cell(pc.times[k]), cell(pr.ks_per_time[k])}));
            }
            add_summary(rep.summary, c, n, "particle_energy_distance", cell(pr.energy));
        }
    }
    if (!c.trajectory_elements.empty()) {
        rep.extras.push_back(std::move(traj));
    }
    if (c.particle_replicas > 0) {
        rep.extras.push_back(std::move(particle));
    }
    return rep;
}

ExperimentReport run_local(const ExperimentConfig& c)
{
    ExperimentReport rep;
    rep.records = make_table("records", {"check", "parameter", "replicas", "statistic", "p_value", "failures", "passed"});
    rep.summary = summary_table();
    const int width = c.window_hi - c.window_lo + 1;
    const CounterRng root = CounterRng::from_seed(c.seed);
    const auto replicas = static_cast<std::size_t>(c.replica_count());
    auto record = [&](const std::string& check, double parameter, std::size_t count, double statistic, double p,
                      std::uint64_t failures, bool ok) {
        rep.records.rows.push_back(prefixed(c, width,
                                            {cell(check), cell(parameter), cell(static_cast<std::uint64_t>(count)),
                                             cell(statistic), cell(p), cell(failures), cell(ok)}));
        rep.passed = rep.passed && ok;
    };

    // Geometric marginals of ell_i(t), pooled over the window and replicas.
    if (!c.marginal_times.empty() && replicas > 0) {
        const double Tm = *std::max_element(c.marginal_times.begin(), c.marginal_times.end());
        const CounterRng marg = root.split(0);
        std::vector<std::vector<int>> draws(replicas);
        parallel_for(replicas, c.threads, [&](std::size_t r) {
            ZWindow w(marg.split(r), Tm, c.window_lo, c.window_hi);
            for (double t : c.marginal_times) {
                for (int i = c.window_lo; i <= c.window_hi; ++i) {
                    draws[r].push_back(w.ell(i, t));
                }
            }
        });
        for (std::size_t k = 0; k < c.marginal_times.size(); ++k) {
            const double t = c.marginal_times[k];
            std::vector<int> sample;
            for (const auto& d : draws) {
                sample.insert(sample.end(), d.begin() + static_cast<std::ptrdiff_t>(k * width),
                              d.begin() + static_cast<std::ptrdiff_t>((k + 1) * width));
            }
            auto ks = stats::ks_test_discrete(sample, [t](int j) { return 1.0 - std::pow(t, j + 1); });
            record("ell_marginal", t, sample.size(), ks.statistic, ks.p_value, 0, ks.p_value > kPValueFloor);
        }
    }

    // Relabeled restriction of Sigma_t to an interval against the finite Mallows law.
    if (c.restriction_replicas > 0) {
        const double t = c.restriction_time;
        const int m = c.restriction_length;
        const FiniteDistribution oracle = enumerate_mallows(m, t);
        const CounterRng rest = root.split(1);
        const auto count = static_cast<std::size_t>(c.restriction_replicas);
        std::vector<std::uint64_t> truncated(std::min(kTallyChunks, count), 0);
        auto counts = tally(oracle.support_size(), count, c.threads, [&](std::size_t r) {
            ZWindow w(rest.split(r), t, c.window_lo, c.window_lo + m - 1);
            ZPermutationSlice s = sigma_slice(w, t, c.window_lo, c.window_lo + m - 1);
            if (!s.all_exact()) {
                ++truncated[r % truncated.size()];
            }
            std::vector<std::int64_t> sorted = s.values;
            std::sort(sorted.begin(), sorted.end());
            std::vector<int> ranks;
            for (std::int64_t v : s.values) {
                ranks.push_back(static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin()) + 1);
            }
            return permutation_rank(ranks);
        });
        std::uint64_t bad = 0;
        for (auto v : truncated) {
            bad += v;
        }
        auto chi = stats::chi_square_test(counts, oracle.masses());
        record("restriction", t, count, chi.statistic, chi.p_value, bad, chi.p_value > kPValueFloor && bad == 0);
    }

    // Every jump in each window is a transposition; crossings of the origin balance.
    if (c.transposition_windows > 0) {
        const double T = c.horizon();
        const CounterRng trans = root.split(2);
        const auto windows = static_cast<std::size_t>(c.transposition_windows);
        std::vector<std::uint64_t> events(windows, 0);
        std::vector<int> failed(windows, 0);
        std::vector<int> certified(windows, 0);
        std::vector<int> unbalanced(windows, 0);
        parallel_for(windows, c.threads, [&](std::size_t r) {
            ZWindow w(trans.split(r), T, c.window_lo, c.window_hi);
            try {
                events[r] = jump_log(w, c.window_lo, c.window_hi).size();
            } catch (const std::exception&) {
                failed[r] = 1;
            }
            BalanceCheck b = balance_check(w, T);
            certified[r] = b.certified ? 1 : 0;
            unbalanced[r] = b.certified && b.left_to_right != b.right_to_left ? 1 : 0;
        });
        std::uint64_t total = 0;
        std::uint64_t failures = 0;
        std::uint64_t certified_count = 0;
        std::uint64_t unbalanced_count = 0;
        for (std::size_t r = 0; r < windows; ++r) {
            total += events[r];
            failures += static_cast<std::uint64_t>(failed[r]);
            certified_count += static_cast<std::uint64_t>(certified[r]);
            unbalanced_count += static_cast<std::uint64_t>(unbalanced[r]);
        }
        record("transposition", T, windows, static_cast<double>(total), 1.0, failures, failures == 0);
        record("balance", T, windows, static_cast<double>(certified_count), 1.0, unbalanced_count,
               unbalanced_count == 0);
    }
    return rep;
}

ExperimentReport run_coupling(const ExperimentConfig& c)
{
    ExperimentReport rep;
    rep.records = make_table("records", {"k_n", "replica", "all_agree", "certified", "proposed", "accepted",
                                         "min_ratio", "max_ratio"});
    rep.summary = summary_table();
    const double T = c.horizon();
    const CounterRng root = CounterRng::from_seed(c.seed);
    const auto replicas = static_cast<std::size_t>(c.replica_count());
    std::vector<double> agreement;
    for (int n : c.sizes()) {
        const int k_n = static_cast<int>(std::floor(c.k_n_fraction * n));
        std::vector<CouplingRecord> recs(replicas);
        // Replica r uses the same limiting paths and uniforms for every n.
        parallel_for(replicas, c.threads, [&](std::size_t r) {
            recs[r] = coupled_simulation(n, k_n, c.window_lo, c.window_hi, T, root.split(r));
        });
        std::size_t agree = 0;
        std::size_t certified = 0;
        for (std::size_t r = 0; r < replicas; ++r) {
            const CouplingRecord& rec = recs[r];
            double lo = 1.0;
            double hi = 0.0;
            for (double x : rec.ratios) {
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
            if (rec.ratios.empty()) {
                lo = hi = 1.0;
            }
            agree += rec.all_agree ? 1 : 0;
            certified += rec.certified ? 1 : 0;
            rep.records.rows.push_back(prefixed(c, n,
                                                {cell(k_n), cell(static_cast<std::uint64_t>(r)), cell(rec.all_agree),
                                                 cell(rec.certified), cell(static_cast<std::uint64_t>(rec.proposed)),
                                                 cell(static_cast<std::uint64_t>(rec.accepted)), cell(lo), cell(hi)}));
        }
        const double freq = replicas == 0 ? 0.0 : static_cast<double>(agree) / static_cast<double>(replicas);
        agreement.push_back(freq);
        add_summary(rep.summary, c, n, "k_n", cell(k_n));
        add_summary(rep.summary, c, n, "agreement", cell(freq));
        add_summary(rep.summary, c, n, "certified",
                    cell(replicas == 0 ? 0.0 : static_cast<double>(certified) / static_cast<double>(replicas)));
    }
    bool monotone = true;
    for (std::size_t k = 1; k < agreement.size(); ++k) {
        monotone = monotone && agreement[k] >= agreement[k - 1];
    }
    add_summary(rep.summary, c, c.sizes().back(), "agreement_nondecreasing", cell(monotone));
    return rep;
}

ExperimentReport run_oracle_suite(const ExperimentConfig& c)
{
    ExperimentReport rep;
    rep.records = make_table("records", {"check", "value", "threshold", "passed"});
    rep.summary = summary_table();
    auto record = [&](int n, const std::string& check, double value, double threshold) {
        const bool ok = value <= threshold;
        rep.records.rows.push_back(prefixed(c, n, {cell(check), cell(value), cell(threshold), cell(ok)}));
        rep.passed = rep.passed && ok;
    };

    // Inversion-vector bijection and Inv = sum of ell, exhaustive.
    for (int n = 1; n <= 7; ++n) {
        std::uint64_t size = 1;
        for (int k = 2; k <= n; ++k) {
            size *= static_cast<std::uint64_t>(k);
        }
        std::uint64_t failures = 0;
        for (std::uint64_t r = 0; r < size; ++r) {
            Permutation p = permutation_unrank(n, r);
            InversionVector ell = left_inversion_vector(p);
            failures += decode_inversion_vector(ell) == p && ell.sum() == inv_count(p) ? 0 : 1;
        }
        record(n, "bijection_failures", static_cast<double>(failures), 0.0);
    }

    // Static sampler against exact enumeration.
    const CounterRng root = CounterRng::from_seed(c.seed);
    const auto replicas = static_cast<std::size_t>(c.replica_count());
    std::uint64_t label = 0;
    for (double q : {0.3, 1.0, 2.0}) {
        const FiniteDistribution oracle = enumerate_mallows(4, q);
        const CounterRng sub = root.split(label++);
        auto counts = tally(oracle.support_size(), replicas, c.threads, [&](std::size_t r) {
            CounterRng rng = sub.split(r);
            return permutation_rank(sample_mallows(4, q, rng).values());
        });
        // E[TV] <= sqrt(k / N) / 2 for k cells and N draws.
        const double noise = std::sqrt(static_cast<double>(oracle.support_size()) / std::max<double>(1.0, replicas));
        record(4, "sampler_tv_q" + std::to_string(q).substr(0, 3), stats::tv_distance(oracle.masses(), counts),
               std::max(0.01, noise));
    }

    // Rates: p_i(j, 1) = (j + 1)(i - j - 1)/2 approached from both sides; p_2(0, q) = 1/(1 + q).
    double worst = 0.0;
    for (int i = 1; i <= 200; ++i) {
        for (int j = 0; j < i; ++j) {
            const double at_one = 0.5 * (j + 1.0) * (i - j - 1.0);
            for (double q : {1.0 - 1e-9, 1.0, 1.0 + 1e-9}) {
                worst = std::max(worst, std::abs(rate_finite(i, j, q) - at_one) / std::max(1.0, at_one));
            }
        }
    }
    record(200, "rate_at_q1_rel_error", worst, 1e-6);
    worst = 0.0;
    for (int k = 0; k <= 300; ++k) {
        const double q = 0.01 * k;
        worst = std::max(worst, std::abs(rate_finite(2, 0, q) - 1.0 / (1.0 + q)));
    }
    record(2, "rate_p2_error", worst, 1e-12);
    worst = 0.0;
    for (int i = 1; i <= 200; ++i) {
        for (int j = 0; j < i; ++j) {
            for (int k = 0; k < 100; ++k) {
                const double t = 0.0099 * k;
                worst = std::max(worst, rate_finite(i, j, t) / rate_limiting(j, t));
            }
        }
    }
    record(200, "thinning_ratio_max", worst, 1.0 + 1e-12);

    // Analytic identities of the global limit.
    worst = 0.0;
    double f_err = 0.0;
    for (int ix = 1; ix <= 9; ++ix) {
        for (int ia = 1; ia <= 9; ++ia) {
            for (double t : {-5.0, -1.0, -1e-5, 1e-5, 0.5, 3.0}) {
                const double x = ix / 10.0;
                const double a = ia / 10.0;
                worst = std::max(worst, std::abs(1.0 - z_curve(x, 1.0 - a, -t) - z_curve(x, a, t)));
                f_err = std::max(f_err, std::abs(F_map(x, t, z_curve(x, a, t)) - inversion_fluid_limit(x, a, t)));
            }
        }
    }
    record(0, "z_reversal_error", worst, 1e-12);
    record(0, "F_of_limit_error", f_err, 1e-10);
    worst = 0.0;
    for (double beta : {0.5, 2.0, 10.0}) {
        const double corner = beta * std::expm1(beta) / (std::exp(beta) + std::exp(-beta) - 2.0);
        worst = std::max(worst, std::abs(rho_density(beta, 1.0, 0.0) - corner) / corner);
    }
    record(0, "rho_corner_rel_error", worst, 1e-10);

    // Transpositions of the limiting process.
    std::uint64_t failures = 0;
    const CounterRng windows = root.split(label++);
    for (std::uint64_t r = 0; r < 50; ++r) {
        ZWindow w(windows.split(r), 0.8, -5, 5);
        try {
            jump_log(w, -5, 5);
        } catch (const std::exception&) {
            ++failures;
        }
    }
    record(11, "transposition_failures", static_cast<double>(failures), 0.0);
    return rep;
}

std::string format_value(const Value& v)
{
    return std::visit(
        [](const auto& x) -> std::string {
            using X = std::decay_t<decltype(x)>;
            char buf[64];
            if constexpr (std::is_same_v<X, std::int64_t>) {
                std::snprintf(buf, sizeof buf, "%" PRId64, x);
                return buf;
            } else if constexpr (std::is_same_v<X, std::uint64_t>) {
                std::snprintf(buf, sizeof buf, "%" PRIu64, x);
                return buf;
            } else if constexpr (std::is_same_v<X, double>) {
                std::snprintf(buf, sizeof buf, "%.17g", x);
                return buf;
            } else {
                if (x.find_first_of(",\"\n") == std::string::npos) {
                    return x;
                }
                std::string quoted = "\"";
                for (char ch : x) {
                    quoted += ch == '"' ? "\"\"" : std::string(1, ch);
                }
                return quoted + "\"";
            }
        },
        v);
}

json value_to_json(const Value& v)
{
    return std::visit([](const auto& x) { return json(x); }, v);
}

Value value_from_json(const json& j)
{
    if (j.is_number_float()) {
        return j.get<double>();
    }
    if (j.is_number_unsigned()) {
        return cell(j.get<std::uint64_t>());
    }
    if (j.is_number_integer()) {
        return j.get<std::int64_t>();
    }
    if (j.is_string()) {
        return j.get<std::string>();
    }
    throw std::invalid_argument("report_from_json: unsupported cell " + j.dump());
}

json table_to_json(const Table& t)
{
    json rows = json::array();
    for (const auto& row : t.rows) {
        json r = json::array();
        for (const Value& v : row) {
            r.push_back(value_to_json(v));
        }
        rows.push_back(std::move(r));
    }
    return json{{"name", t.name}, {"columns", t.columns}, {"rows", std::move(rows)}};
}

Table table_from_json(const json& j)
{
    Table t;
    t.name = j.at("name").get<std::string>();
    t.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& row : j.at("rows")) {
        std::vector<Value> r;
        for (const auto& v : row) {
            r.push_back(value_from_json(v));
        }
        t.rows.push_back(std::move(r));
    }
    return t;
}

// Execution-only fields are not part of the replayable configuration.
ExperimentConfig replay_config(ExperimentConfig c)
{
    c.threads = 1;
    c.out.clear();
    c.format = OutputFormat::csv;
    return c;
}

void write_file(const std::string& path, const std::string& content)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    f << content;
    if (!f) {
        throw std::runtime_error("failed writing " + path);
    }
}

template <class T>
T get_field(const json& j, const std::string& key)
{
    try {
        return j.get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(key, std::string("wrong type: ") + e.what());
    }
}

}  // namespace

std::string to_string(ExperimentKind kind)
{
    for (const auto& [k, name] : kind_names()) {
        if (k == kind) {
            return name;
        }
    }
    return "unknown";
}

ExperimentKind parse_kind(const std::string& name)
{
    for (const auto& [k, n] : kind_names()) {
        if (n == name) {
            return k;
        }
    }
    throw ConfigError("experiment", "unknown experiment kind '" + name + "'");
}

double ExperimentConfig::horizon() const
{
    if (T) {
        return *T;
    }
    return is_local(kind) ? 0.8 : 2.0;
}

int ExperimentConfig::replica_count() const
{
    if (replicas) {
        return *replicas;
    }
    switch (kind) {
    case ExperimentKind::sample:
        return 100'000;
    case ExperimentKind::global_verify:
        return 50;
    case ExperimentKind::local_verify:
    case ExperimentKind::coupling:
        return 1000;
    case ExperimentKind::oracle_suite:
        return 200'000;
    }
    return 0;
}

std::vector<int> ExperimentConfig::sizes() const
{
    return n_values.empty() ? std::vector<int>{n} : n_values;
}

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::invalid_argument(field + ": " + message), field_{std::move(field)}
{
}

void validate(const ExperimentConfig& c)
{
    auto require = [](bool ok, const char* field, const std::string& message) {
        if (!ok) {
            throw ConfigError(field, message);
        }
    };
    constexpr int kMaxN = 1'000'000;
    require(c.n >= 1 && c.n <= kMaxN, "n", "must lie in [1, 1000000]");
    for (int n : c.n_values) {
        require(n >= 1 && n <= kMaxN, "n_values", "entries must lie in [1, 1000000]");
    }
    if (c.kind == ExperimentKind::sample) {
        require(c.n <= FiniteDistribution::kMaxEnumerable, "n", "sample compares against exact enumeration; need n <= 9");
        require(std::isfinite(c.q) && c.q > 0.0, "q", "must be finite and > 0");
    }
    if (c.T) {
        require(std::isfinite(*c.T), "T", "must be finite");
        if (is_local(c.kind)) {
            require(*c.T > 0.0 && *c.T < 1.0, "T", "local experiments need 0 < T < 1");
        } else {
            require(*c.T > 0.0, "T", "must be > 0");
        }
    }
    require(c.alpha > 0.0 && c.alpha < 0.5, "alpha", "must lie in (0, 1/2)");
    require(!c.replicas || *c.replicas >= 0, "replicas", "must be >= 0");
    require(c.t_grid_size >= 2, "t_grid_size", "must be >= 2");
    require(c.window_lo <= c.window_hi, "window_lo", "must not exceed window_hi");
    require(c.window_hi - static_cast<long>(c.window_lo) < 10'000, "window_hi", "window wider than 10000");
    require(c.k_n_fraction > 0.0 && c.k_n_fraction < 1.0, "k_n_fraction", "must lie in (0, 1)");
    const std::vector<int> sizes = c.sizes();
    const int smallest = *std::min_element(sizes.begin(), sizes.end());
    for (int i : c.trajectory_elements) {
        require(i >= 1 && i <= smallest, "trajectory_elements", "entries must lie in [1, n]");
    }
    require(c.trajectory_replicas >= 0, "trajectory_replicas", "must be >= 0");
    require(c.particle_replicas >= 0, "particle_replicas", "must be >= 0");
    for (double t : c.particle_times) {
        require(c.kind != ExperimentKind::global_verify || (std::isfinite(t) && std::abs(t) <= c.horizon()),
                "particle_times", "entries must lie in [-T, T]");
    }
    for (double t : c.marginal_times) {
        require(t > 0.0 && t < 1.0, "marginal_times", "entries must lie in (0, 1)");
    }
    require(c.restriction_time > 0.0 && c.restriction_time < 1.0, "restriction_time", "must lie in (0, 1)");
    require(c.restriction_length >= 1 && c.restriction_length <= FiniteDistribution::kMaxEnumerable,
            "restriction_length", "must lie in [1, 9]");
    require(c.restriction_replicas >= 0, "restriction_replicas", "must be >= 0");
    require(c.transposition_windows >= 0, "transposition_windows", "must be >= 0");
    require(c.threads >= 1 && c.threads <= 1024, "threads", "must lie in [1, 1024]");
}

nlohmann::json config_to_json(const ExperimentConfig& c)
{
    json j{
        {"experiment", to_string(c.kind)},
        {"n", c.n},
        {"n_values", c.n_values},
        {"q", c.q},
        {"alpha", c.alpha},
        {"t_grid_size", c.t_grid_size},
        {"window_lo", c.window_lo},
        {"window_hi", c.window_hi},
        {"k_n_fraction", c.k_n_fraction},
        {"trajectory_elements", c.trajectory_elements},
        {"trajectory_replicas", c.trajectory_replicas},
        {"particle_replicas", c.particle_replicas},
        {"particle_times", c.particle_times},
        {"marginal_times", c.marginal_times},
        {"restriction_time", c.restriction_time},
        {"restriction_length", c.restriction_length},
        {"restriction_replicas", c.restriction_replicas},
        {"transposition_windows", c.transposition_windows},
        {"seed", c.seed},
        {"threads", c.threads},
        {"out", c.out},
        {"format", c.format == OutputFormat::csv ? "csv" : "json"},
    };
    if (c.T) {
        j["T"] = *c.T;
    }
    if (c.replicas) {
        j["replicas"] = *c.replicas;
    }
    return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw ConfigError("config", "expected a JSON object");
    }
    ExperimentConfig c;
    for (const auto& [key, v] : j.items()) {
        if (key == "experiment") {
            c.kind = parse_kind(get_field<std::string>(v, key));
        } else if (key == "n") {
            c.n = get_field<int>(v, key);
        } else if (key == "n_values") {
            c.n_values = get_field<std::vector<int>>(v, key);
        } else if (key == "q") {
            c.q = get_field<double>(v, key);
        } else if (key == "T") {
            c.T = get_field<double>(v, key);
        } else if (key == "alpha") {
            c.alpha = get_field<double>(v, key);
        } else if (key == "replicas") {
            c.replicas = get_field<int>(v, key);
        } else if (key == "t_grid_size") {
            c.t_grid_size = get_field<int>(v, key);
        } else if (key == "window_lo") {
            c.window_lo = get_field<int>(v, key);
        } else if (key == "window_hi") {
            c.window_hi = get_field<int>(v, key);
        } else if (key == "k_n_fraction") {
            c.k_n_fraction = get_field<double>(v, key);
        } else if (key == "trajectory_elements") {
            c.trajectory_elements = get_field<std::vector<int>>(v, key);
        } else if (key == "trajectory_replicas") {
            c.trajectory_replicas = get_field<int>(v, key);
        } else if (key == "particle_replicas") {
            c.particle_replicas = get_field<int>(v, key);
        } else if (key == "particle_times") {
            c.particle_times = get_field<std::vector<double>>(v, key);
        } else if (key == "marginal_times") {
            c.marginal_times = get_field<std::vector<double>>(v, key);
        } else if (key == "restriction_time") {
            c.restriction_time = get_field<double>(v, key);
        } else if (key == "restriction_length") {
            c.restriction_length = get_field<int>(v, key);
        } else if (key == "restriction_replicas") {
            c.restriction_replicas = get_field<int>(v, key);
        } else if (key == "transposition_windows") {
            c.transposition_windows = get_field<int>(v, key);
        } else if (key == "seed") {
            c.seed = get_field<std::uint64_t>(v, key);
        } else if (key == "threads") {
            c.threads = get_field<int>(v, key);
        } else if (key == "out") {
            c.out = get_field<std::string>(v, key);
        } else if (key == "format") {
            std::string f = get_field<std::string>(v, key);
            if (f != "csv" && f != "json") {
                throw ConfigError("format", "must be csv or json");
            }
            c.format = f == "csv" ? OutputFormat::csv : OutputFormat::json;
        } else {
            throw ConfigError(key, "unknown field");
        }
    }
    return c;
}

Value cell(std::uint64_t v)
{
    if (v <= static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
        return static_cast<std::int64_t>(v);
    }
    return v;
}

Value cell(std::int64_t v)
{
    return v;
}

Value cell(int v)
{
    return static_cast<std::int64_t>(v);
}

Value cell(double v)
{
    return v;
}

Value cell(bool v)
{
    return static_cast<std::int64_t>(v ? 1 : 0);
}

Value cell(std::string v)
{
    return v;
}

ExperimentReport run(const ExperimentConfig& config)
{
    validate(config);
    const auto start = std::chrono::steady_clock::now();
    ExperimentReport rep;
    switch (config.kind) {
    case ExperimentKind::sample:
        rep = run_sample(config);
        break;
    case ExperimentKind::global_verify:
        rep = run_global(config);
        break;
    case ExperimentKind::local_verify:
        rep = run_local(config);
        break;
    case ExperimentKind::coupling:
        rep = run_coupling(config);
        break;
    case ExperimentKind::oracle_suite:
        rep = run_oracle_suite(config);
        break;
    }
    rep.config = replay_config(config);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cerr << to_string(config.kind) << ": " << rep.records.rows.size() << " records in " << seconds << " s\n";
    return rep;
}

std::string to_csv(const Table& table)
{
    std::string out;
    for (std::size_t k = 0; k < table.columns.size(); ++k) {
        out += (k ? "," : "") + table.columns[k];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            out += (k ? "," : "") + format_value(row[k]);
        }
        out += '\n';
    }
    return out;
}

nlohmann::json report_to_json(const ExperimentReport& report)
{
    json extras = json::array();
    for (const Table& t : report.extras) {
        extras.push_back(table_to_json(t));
    }
    return json{{"config", config_to_json(report.config)},
                {"passed", report.passed},
                {"records", table_to_json(report.records)},
                {"summary", table_to_json(report.summary)},
                {"extras", std::move(extras)}};
}

ExperimentReport report_from_json(const nlohmann::json& j)
{
    ExperimentReport r;
    r.config = config_from_json(j.at("config"));
    r.passed = j.at("passed").get<bool>();
    r.records = table_from_json(j.at("records"));
    r.summary = table_from_json(j.at("summary"));
    for (const auto& t : j.at("extras")) {
        r.extras.push_back(table_from_json(t));
    }
    return r;
}

std::vector<std::string> emit(const ExperimentReport& report, OutputFormat format, const std::string& out)
{
    std::vector<std::string> written;
    if (format == OutputFormat::json) {
        const std::string doc = report_to_json(report).dump(2) + "\n";
        if (out.empty()) {
            std::cout << doc;
        } else {
            write_file(out, doc);
            written.push_back(out);
        }
        return written;
    }
    if (out.empty()) {
        std::cout << to_csv(report.records);
        return written;
    }
    std::filesystem::path path(out);
    std::filesystem::path stem = path.extension() == ".csv" ? path.parent_path() / path.stem() : path;
    auto sibling = [&](const std::string& suffix) { return stem.string() + suffix; };
    write_file(out, to_csv(report.records));
    written.push_back(out);
    write_file(sibling(".summary.csv"), to_csv(report.summary));
    written.push_back(sibling(".summary.csv"));
    for (const Table& t : report.extras) {
        write_file(sibling("." + t.name + ".csv"), to_csv(t));
        written.push_back(sibling("." + t.name + ".csv"));
    }
    write_file(sibling(".config.json"), config_to_json(report.config).dump(2) + "\n");
    written.push_back(sibling(".config.json"));
    return written;
}

}  // namespace mallows::harness
