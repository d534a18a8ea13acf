#pragma once

// Finite permutations, the left-inversion-vector bijection and the exact
// Mallows distribution on S_n.
//
// All public indices are 1-based: perm(i) is the value at position i and
// ell[i] counts positions j < i holding a larger value.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mallows/rng.hpp"

namespace mallows {

class Permutation
{
  public:
    /// Validates that values is a bijection of {1..n}.
    explicit Permutation(std::vector<int> values);

    static Permutation identity(int n);
    static Permutation reversal(int n);

    int size() const { return static_cast<int>(forward_.size()); }
    int operator()(int i) const { return forward_[static_cast<std::size_t>(i - 1)]; }
    int inverse(int value) const { return inverse_[static_cast<std::size_t>(value - 1)]; }

    /// One-line notation; element k is perm(k + 1).
    std::span<const int> values() const { return forward_; }

    /// (this o other)(i) = this(other(i)).
    Permutation compose(const Permutation& other) const;
    Permutation inverted() const;

    /// Exchanges the values at positions i and j.
    Permutation transposed(int i, int j) const;

    friend bool operator==(const Permutation&, const Permutation&) = default;

    std::string to_string() const;

  private:
    std::vector<int> forward_;
    std::vector<int> inverse_;
};

class InversionVector
{
  public:
    /// Validates admissibility: 0 <= ell[i] <= i - 1.
    explicit InversionVector(std::vector<int> ell);

    static InversionVector zeros(int n) { return InversionVector(std::vector<int>(static_cast<std::size_t>(n), 0)); }

    int size() const { return static_cast<int>(ell_.size()); }
    int operator[](int i) const { return ell_[static_cast<std::size_t>(i - 1)]; }
    std::span<const int> values() const { return ell_; }
    std::int64_t sum() const;

    friend bool operator==(const InversionVector&, const InversionVector&) = default;

  private:
    std::vector<int> ell_;
};

/// Number of pairs i < j with perm(i) > perm(j), by merge counting.
std::int64_t inv_count(const Permutation& p);

/// Quadratic reference count, kept for cross-checking inv_count.
std::int64_t inv_count_naive(const Permutation& p);

InversionVector left_inversion_vector(const Permutation& p);

/// sigma(n) = n - ell_n, then sigma(k) = x_{k - ell_k} with x the ascending
/// unassigned values.
Permutation decode_inversion_vector(const InversionVector& v);

/// Unchecked decode into a caller-owned buffer (values 1-based). ell.size() == out.size().
void decode_into(std::span<const int> ell, std::span<int> out);

/// log(q^Inv(p)), with 0^0 = 1 (so q = 0 gives 0 for the identity, -inf otherwise).
double log_mallows_weight(const Permutation& p, double q);

/// log Z_{n,q} = sum_i log(1 + q + ... + q^{i-1}).
double log_normalizing_constant(int n, double q);
double normalizing_constant(int n, double q);

/// log(1 + q + ... + q^{m-1}) for m >= 1, accurate for q near 1.
double log_geometric_sum(int m, double q);

/// Inverse-CDF draw from P(j) = q^j / sum_{k<i} q^k on {0..i-1}.
int sample_truncated_geometric(int i, double q, double u);

/// P(ell_i <= j) for the truncated geometric law.
double truncated_geometric_cdf(int i, double q, int j);

/// Exact sample from pi_{n,q}.
Permutation sample_mallows(int n, double q, CounterRng& rng);

/// Lexicographic rank in [0, n!).
std::uint64_t permutation_rank(std::span<const int> values);
Permutation permutation_unrank(int n, std::uint64_t rank);

class FiniteDistribution
{
  public:
    static constexpr int kMaxEnumerable = 9;

    FiniteDistribution(int n, std::vector<double> masses);

    int n() const { return n_; }
    /// mass(rank) with support indexed by permutation_rank.
    std::span<const double> masses() const { return masses_; }
    double mass(const Permutation& p) const { return masses_[permutation_rank(p.values())]; }
    std::size_t support_size() const { return masses_.size(); }

  private:
    int n_;
    std::vector<double> masses_;
};

/// Exact pi_{n,q} over all n! permutations; n <= 9.
FiniteDistribution enumerate_mallows(int n, double q);

}  // namespace mallows
