#pragma once

// Deterministic objects of the global (fluid / permuton) limit and the Monte
// Carlo experiments that compare the birth Mallows process against them.
//
// Time t is the rescaled clock q = e^{t/n}. All closed forms have removable
// singularities at t = 0 (or beta = 0); inside |t| < 1e-4 a four-term Taylor
// expansion is used instead.

#include <cstdint>
#include <optional>
#include <vector>

#include "mallows/permutation.hpp"
#include "mallows/rng.hpp"
#include "mallows/stats.hpp"

namespace mallows {

/// Limit trajectory started from macroscopic position x with value a at t = 0.
double z_curve(double x, double a, double t);

/// Drift of the rescaled inversion count: lambda_x(y, t).
double lambda_rate(double x, double y, double t);

/// y(t) = (1/t) log(a + (1 - a) e^{tx}), the solution of y' = lambda_x(y, t) with y(0) = x(1 - a).
double inversion_fluid_limit(double x, double a, double t);

struct OdeSolution
{
    std::vector<double> t;
    std::vector<double> y;
};

/// Classical RK4 for y' = lambda_x(y, t) from t0 to t1 (either direction) with
/// the given step magnitude; the last step is shortened to land on t1.
OdeSolution ode_solve(double x, double y0, double t0, double t1, double step);

/// Permuton density rho_beta(x, y).
double rho_density(double beta, double x, double y);

/// F_x(z) at parameter t: the mu_t mass of [0, x] x [z, 1]. Decreasing from x to 0.
double F_map(double x, double t, double z);

/// z in [0, 1] with F_map(x, t, z) = w, by bisection to 1e-12.
double F_inverse(double x, double t, double w);

/// mu_beta([0, x] x [0, y]).
double mu_beta_cdf(double beta, double x, double y);

struct Rect
{
    double a;
    double b;
    double c;
    double d;
};

/// mu_beta(R) for R = [a, b] x [c, d]; zero for degenerate rectangles.
double mu_beta_rect(double beta, const Rect& r);

/// (1/n) #{i : i/n in [a, b], sigma(i)/n in [c, d]}.
double delta_rect(const Permutation& p, const Rect& r);

/// max over rectangles with corners on the grid {0, 1/k, ..., 1} of |Delta_R - mu_beta(R)|.
double box_discrepancy(const Permutation& p, double beta, int k);

/// Cell masses of mu_beta on a k x k grid; cells[row * k + col] covers
/// [row/k, (row+1)/k] x [col/k, (col+1)/k].
struct PermutonGrid
{
    int k = 0;
    std::vector<double> cells;
};

PermutonGrid permuton_grid(double beta, int k);

struct DeviationConfig
{
    int n = 200;
    double T = 2.0;
    double alpha = 0.1;
    int replicas = 50;
    int t_grid_size = 512;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct DeviationRecord
{
    int replica = 0;
    double max_sup_dev = 0.0;
    double p50 = 0.0;
    double p95 = 0.0;
    /// max over the elements outside the interior band (reported, never asserted).
    double boundary_max = 0.0;
    std::uint64_t jumps = 0;
};

struct DeviationReport
{
    DeviationConfig config;
    bool no_interior_elements = false;
    std::vector<DeviationRecord> records;
    double median_max = 0.0;
    double p95_max = 0.0;
    stats::Interval median_ci;
};

/// One replica's per-element sup deviations over t in [-T, T] (element i at index i - 1).
std::vector<double> element_sup_deviations(int n, double T, int t_grid_size, const CounterRng& rng,
                                           std::uint64_t* jumps = nullptr);

DeviationReport sup_deviation_experiment(const DeviationConfig& config);

struct ParticleConfig
{
    int n = 400;
    double T = 2.0;
    int replicas = 1000;
    std::vector<double> times{0.0};
    std::uint64_t seed = 1;
    int threads = 1;
    /// The energy statistic is quadratic in the sample size; it uses at most this many points per sample.
    int energy_sample_cap = 2000;
};

struct ParticleReport
{
    ParticleConfig config;
    /// Rows of (Y(t_1), ..., Y(t_m)) for the simulated particle and (z(t_1), ...) for the limit.
    std::vector<std::vector<double>> simulated;
    std::vector<std::vector<double>> limit;
    std::vector<double> ks_per_time;
    double energy = 0.0;
};

/// Position at the requested times of a uniformly chosen particle, against z_{X,A} with X, A uniform.
ParticleReport random_particle_experiment(const ParticleConfig& config);

}  // namespace mallows
