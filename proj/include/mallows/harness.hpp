#pragma once

// Reproducible experiment runner: configuration, dispatch to the module
// experiments and CSV/JSON emission. Every random quantity is derived from the
// master seed as root.split(replica).split(element), so serial and threaded runs
// produce identical reports.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace mallows::harness {

enum class ExperimentKind
{
    sample,
    global_verify,
    local_verify,
    coupling,
    oracle_suite,
};

enum class OutputFormat
{
    csv,
    json,
};

std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& name);

struct ExperimentConfig
{
    ExperimentKind kind = ExperimentKind::sample;
    int n = 5;
    /// Sweep over several sizes (global-verify, coupling); empty means {n}.
    std::vector<int> n_values;
    /// Mallows parameter for `sample`.
    double q = 0.7;
    /// Time range [-T, T] for global-verify; horizon T < 1 for local kinds. Unset: 2 or 0.8.
    std::optional<double> T;
    double alpha = 0.1;
    /// Unset: 100000 (sample), 50 (global-verify), 1000 (local-verify, coupling), 200000 (oracle-suite).
    std::optional<int> replicas;
    int t_grid_size = 512;
    int window_lo = -5;
    int window_hi = 5;
    /// k_n = floor(k_n_fraction * n).
    double k_n_fraction = 0.5;
    /// global-verify: elements whose trajectories are dumped for the first trajectory_replicas replicas.
    std::vector<int> trajectory_elements;
    int trajectory_replicas = 1;
    /// global-verify: random-particle comparison at these times when particle_replicas > 0.
    int particle_replicas = 0;
    std::vector<double> particle_times{-1.0, 0.0, 1.0};
    /// local-verify: times of the geometric marginal checks and of the restriction check.
    std::vector<double> marginal_times{0.3, 0.6, 0.9};
    double restriction_time = 0.5;
    int restriction_length = 4;
    int restriction_replicas = 100'000;
    int transposition_windows = 1000;
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out;
    OutputFormat format = OutputFormat::csv;

    double horizon() const;
    int replica_count() const;
    std::vector<int> sizes() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// A field-level validation failure.
class ConfigError : public std::invalid_argument
{
  public:
    ConfigError(std::string field, const std::string& message);
    const std::string& field() const { return field_; }

  private:
    std::string field_;
};

/// Throws ConfigError naming the first offending field.
void validate(const ExperimentConfig& config);

nlohmann::json config_to_json(const ExperimentConfig& config);
/// Unknown keys are rejected; missing keys keep their defaults. Throws ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);

using Value = std::variant<std::int64_t, std::uint64_t, double, std::string>;

/// Integers are stored as int64 whenever they fit, so values survive a JSON round trip.
Value cell(std::uint64_t v);
Value cell(std::int64_t v);
Value cell(int v);
Value cell(double v);
Value cell(bool v);
Value cell(std::string v);

struct Table
{
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Value>> rows;

    friend bool operator==(const Table&, const Table&) = default;
};

struct ExperimentReport
{
    ExperimentConfig config;
    /// Per-replica (or per-check) records; the primary CSV.
    Table records;
    /// Summary statistics, one row per key.
    Table summary;
    /// Further tables such as trajectory dumps.
    std::vector<Table> extras;
    /// False when an oracle or hard assertion failed.
    bool passed = true;

    friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

/// Dispatches to the module experiments. Validates first.
ExperimentReport run(const ExperimentConfig& config);

/// Fixed-format CSV (first columns experiment, seed, n); doubles use %.17g.
std::string to_csv(const Table& table);

nlohmann::json report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);

/// Writes the report. CSV: records to `out`, summary and extras to `<stem>.<name>.csv`
/// and the config echo to `<stem>.config.json`; an empty `out` prints the records to
/// stdout. JSON: one document. Returns the paths written.
std::vector<std::string> emit(const ExperimentReport& report, OutputFormat format, const std::string& out);

}  // namespace mallows::harness
