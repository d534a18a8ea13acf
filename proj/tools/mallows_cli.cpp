#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>

#include "mallows/birth_process.hpp"
#include "mallows/harness.hpp"

using namespace mallows;
using namespace mallows::harness;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitAssertion = 3;

using Apply = std::function<void(ExperimentConfig&)>;

class Flags
{
  public:
    explicit Flags(CLI::App* sub) : sub_{sub} {}

    template <class T>
    void add(const std::string& name, const std::string& help, std::function<void(ExperimentConfig&, const T&)> set)
    {
        auto value = std::make_shared<T>();
        CLI::Option* opt = sub_->add_option(name, *value, help);
        bindings_.emplace_back(opt, [value, set](ExperimentConfig& c) { set(c, *value); });
    }

    void apply(ExperimentConfig& c) const
    {
        for (const auto& [opt, fn] : bindings_) {
            if (opt->count() > 0) {
                fn(c);
            }
        }
    }

  private:
    CLI::App* sub_;
    std::vector<std::pair<CLI::Option*, Apply>> bindings_;
};

#define FIELD(type, flag, member, help) \
    flags.add<type>(flag, help, [](ExperimentConfig& c, const type& v) { c.member = v; })

Flags register_flags(CLI::App* sub, std::string& config_path)
{
    Flags flags(sub);
    sub->add_option("--config", config_path, "JSON file with ExperimentConfig fields; flags override it");
    FIELD(int, "--n", n, "permutation size");
    FIELD(std::vector<int>, "--n-values", n_values, "sweep over several sizes");
    FIELD(double, "--q", q, "Mallows parameter (sample)");
    FIELD(double, "--T", T, "time range [-T, T], or horizon T < 1 for local kinds");
    FIELD(double, "--alpha", alpha, "interior fraction (global-verify)");
    FIELD(int, "--replicas", replicas, "number of replicas");
    FIELD(int, "--t-grid-size", t_grid_size, "time grid points (global-verify)");
    FIELD(int, "--window-lo", window_lo, "left end of the window on Z");
    FIELD(int, "--window-hi", window_hi, "right end of the window on Z");
    FIELD(double, "--k-n-fraction", k_n_fraction, "k_n = floor(fraction * n) (coupling)");
    FIELD(std::vector<int>, "--trajectory-elements", trajectory_elements, "elements whose trajectories are dumped");
    FIELD(int, "--trajectory-replicas", trajectory_replicas, "replicas whose trajectories are dumped");
    FIELD(int, "--particle-replicas", particle_replicas, "random-particle replicas (global-verify)");
    FIELD(std::vector<double>, "--particle-times", particle_times, "random-particle comparison times");
    FIELD(std::vector<double>, "--marginal-times", marginal_times, "times of the geometric marginal checks");
    FIELD(double, "--restriction-time", restriction_time, "time of the restriction check");
    FIELD(int, "--restriction-length", restriction_length, "length of the restricted interval");
    FIELD(int, "--restriction-replicas", restriction_replicas, "replicas of the restriction check");
    FIELD(int, "--transposition-windows", transposition_windows, "windows checked for transpositions");
    FIELD(std::uint64_t, "--seed", seed, "64-bit master seed");
    FIELD(int, "--threads", threads, "worker threads");
    FIELD(std::string, "--out", out, "output path; stdout if empty");
    flags.add<std::string>("--format", "csv or json", [](ExperimentConfig& c, const std::string& v) {
        if (v != "csv" && v != "json") {
            throw ConfigError("format", "must be csv or json");
        }
        c.format = v == "csv" ? OutputFormat::csv : OutputFormat::json;
    });
    return flags;
}

#undef FIELD

ExperimentConfig load_config(const std::string& path, ExperimentKind kind)
{
    if (path.empty()) {
        ExperimentConfig c;
        c.kind = kind;
        return c;
    }
    std::ifstream f(path);
    if (!f) {
        throw ConfigError("config", "cannot read " + path);
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
    if (j.is_object() && !j.contains("experiment")) {
        j["experiment"] = to_string(kind);
    }
    ExperimentConfig c = config_from_json(j);
    if (c.kind != kind) {
        throw ConfigError("experiment", "config file is for '" + to_string(c.kind) + "'");
    }
    return c;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Simulation and verification harness for the birth Mallows process"};
    app.require_subcommand(1);

    const std::vector<std::pair<ExperimentKind, std::string>> commands = {
        {ExperimentKind::sample, "sample: static and process samples against exact enumeration"},
        {ExperimentKind::global_verify, "global-verify: sup deviation from the fluid trajectories"},
        {ExperimentKind::local_verify, "local-verify: marginals, restriction law and transpositions on Z"},
        {ExperimentKind::coupling, "coupling: thinning coupling of the shifted finite process"},
        {ExperimentKind::oracle_suite, "oracle-suite: exact and analytic identities"},
    };
    std::vector<std::string> config_paths(commands.size());
    std::vector<CLI::App*> subs;
    std::vector<Flags> flags;
    for (std::size_t k = 0; k < commands.size(); ++k) {
        CLI::App* sub = app.add_subcommand(to_string(commands[k].first), commands[k].second);
        subs.push_back(sub);
        flags.push_back(register_flags(sub, config_paths[k]));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        std::size_t k = 0;
        while (!subs[k]->parsed()) {
            ++k;
        }
        ExperimentConfig config = load_config(config_paths[k], commands[k].first);
        flags[k].apply(config);
        validate(config);
        ExperimentReport report = run(config);
        for (const std::string& path : emit(report, config.format, config.out)) {
            std::cerr << "wrote " << path << "\n";
        }
        if (!report.passed) {
            std::cerr << "error: a verification check failed\n";
            return kExitAssertion;
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "error: invalid configuration: " << e.what() << "\n";
        return kExitValidation;
    } catch (const DominatorViolation& e) {
        std::cerr << "error: assertion failed: " << e.what() << "\n";
        return kExitAssertion;
    } catch (const std::logic_error& e) {
        std::cerr << "error: assertion failed: " << e.what() << "\n";
        return kExitAssertion;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
