#include "mallows/permutation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace mallows {

namespace {

// Fenwick tree over {1..n} holding 0/1 occupancy.
class OccupancyTree
{
  public:
    explicit OccupancyTree(int n, bool full) : n_{n}, tree_(static_cast<std::size_t>(n) + 1, 0)
    {
        if (full) {
            for (int i = 1; i <= n; ++i) {
                tree_[static_cast<std::size_t>(i)] += 1;
                int parent = i + (i & -i);
                if (parent <= n) {
                    tree_[static_cast<std::size_t>(parent)] += tree_[static_cast<std::size_t>(i)];
                }
            }
        }
        log_ = 1;
        while ((log_ << 1) <= n) {
            log_ <<= 1;
        }
    }

    void add(int i, int delta)
    {
        for (; i <= n_; i += i & -i) {
            tree_[static_cast<std::size_t>(i)] += delta;
        }
    }

    int prefix(int i) const
    {
        int s = 0;
        for (; i > 0; i -= i & -i) {
            s += tree_[static_cast<std::size_t>(i)];
        }
        return s;
    }

    /// Smallest index whose prefix count reaches k (k >= 1).
    int kth(int k) const
    {
        int pos = 0;
        for (int step = log_; step > 0; step >>= 1) {
            int next = pos + step;
            if (next <= n_ && tree_[static_cast<std::size_t>(next)] < k) {
                pos = next;
                k -= tree_[static_cast<std::size_t>(next)];
            }
        }
        return pos + 1;
    }

  private:
    int n_;
    int log_ = 1;
    std::vector<int> tree_;
};

std::int64_t merge_count(std::vector<int>& a, std::vector<int>& buf, std::size_t lo, std::size_t hi)
{
    if (hi - lo < 2) {
        return 0;
    }
    std::size_t mid = lo + (hi - lo) / 2;
    std::int64_t count = merge_count(a, buf, lo, mid) + merge_count(a, buf, mid, hi);
    std::size_t i = lo;
    std::size_t j = mid;
    std::size_t k = lo;
    while (i < mid && j < hi) {
        if (a[i] <= a[j]) {
            buf[k++] = a[i++];
        } else {
            count += static_cast<std::int64_t>(mid - i);
            buf[k++] = a[j++];
        }
    }
    while (i < mid) {
        buf[k++] = a[i++];
    }
    while (j < hi) {
        buf[k++] = a[j++];
    }
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
              a.begin() + static_cast<std::ptrdiff_t>(lo));
    return count;
}

}  // namespace

Permutation::Permutation(std::vector<int> values) : forward_{std::move(values)}, inverse_(forward_.size(), 0)
{
    const int n = static_cast<int>(forward_.size());
    if (n == 0) {
        throw std::invalid_argument("Permutation: size must be positive");
    }
    for (int i = 1; i <= n; ++i) {
        int v = forward_[static_cast<std::size_t>(i - 1)];
        if (v < 1 || v > n || inverse_[static_cast<std::size_t>(v - 1)] != 0) {
            throw std::invalid_argument("Permutation: values are not a bijection of {1..n}");
        }
        inverse_[static_cast<std::size_t>(v - 1)] = i;
    }
}

Permutation Permutation::identity(int n)
{
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 1);
    return Permutation(std::move(v));
}

Permutation Permutation::reversal(int n)
{
    std::vector<int> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        v[static_cast<std::size_t>(i)] = n - i;
    }
    return Permutation(std::move(v));
}

Permutation Permutation::compose(const Permutation& other) const
{
    if (other.size() != size()) {
        throw std::invalid_argument("Permutation::compose: size mismatch");
    }
    std::vector<int> v(forward_.size());
    for (int i = 1; i <= size(); ++i) {
        v[static_cast<std::size_t>(i - 1)] = (*this)(other(i));
    }
    return Permutation(std::move(v));
}

Permutation Permutation::inverted() const { return Permutation(inverse_); }

Permutation Permutation::transposed(int i, int j) const
{
    std::vector<int> v = forward_;
    std::swap(v.at(static_cast<std::size_t>(i - 1)), v.at(static_cast<std::size_t>(j - 1)));
    return Permutation(std::move(v));
}

std::string Permutation::to_string() const
{
    std::ostringstream os;
    os << '(';
    for (std::size_t k = 0; k < forward_.size(); ++k) {
        os << (k ? " " : "") << forward_[k];
    }
    os << ')';
    return os.str();
}

InversionVector::InversionVector(std::vector<int> ell) : ell_{std::move(ell)}
{
    for (std::size_t k = 0; k < ell_.size(); ++k) {
        if (ell_[k] < 0 || ell_[k] > static_cast<int>(k)) {
            throw std::invalid_argument("InversionVector: entry " + std::to_string(k + 1) + " = " +
                                        std::to_string(ell_[k]) + " is not in {0.." + std::to_string(k) + "}");
        }
    }
}

std::int64_t InversionVector::sum() const
{
    return std::accumulate(ell_.begin(), ell_.end(), std::int64_t{0});
}

std::int64_t inv_count(const Permutation& p)
{
    std::vector<int> a(p.values().begin(), p.values().end());
    std::vector<int> buf(a.size());
    return merge_count(a, buf, 0, a.size());
}

std::int64_t inv_count_naive(const Permutation& p)
{
    std::int64_t count = 0;
    for (int i = 1; i <= p.size(); ++i) {
        for (int j = i + 1; j <= p.size(); ++j) {
            count += p(i) > p(j) ? 1 : 0;
        }
    }
    return count;
}

InversionVector left_inversion_vector(const Permutation& p)
{
    const int n = p.size();
    OccupancyTree seen(n, false);
    std::vector<int> ell(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
        ell[static_cast<std::size_t>(i - 1)] = (i - 1) - seen.prefix(p(i));
        seen.add(p(i), 1);
    }
    return InversionVector(std::move(ell));
}

void decode_into(std::span<const int> ell, std::span<int> out)
{
    const int n = static_cast<int>(ell.size());
    if (n == 0) {
        return;
    }
    OccupancyTree remaining(n, true);
    for (int k = n; k >= 1; --k) {
        int value = remaining.kth(k - ell[static_cast<std::size_t>(k - 1)]);
        out[static_cast<std::size_t>(k - 1)] = value;
        remaining.add(value, -1);
    }
}

Permutation decode_inversion_vector(const InversionVector& v)
{
    std::vector<int> out(static_cast<std::size_t>(v.size()));
    decode_into(v.values(), out);
    return Permutation(std::move(out));
}

double log_mallows_weight(const Permutation& p, double q)
{
    if (q < 0.0) {
        throw std::invalid_argument("log_mallows_weight: q must be nonnegative");
    }
    std::int64_t inv = inv_count(p);
    if (inv == 0) {
        return 0.0;
    }
    return static_cast<double>(inv) * std::log(q);
}

double log_geometric_sum(int m, double q)
{
    if (m < 1 || q < 0.0) {
        throw std::invalid_argument("log_geometric_sum: need m >= 1 and q >= 0");
    }
    if (q == 1.0 || m == 1) {
        return std::log(static_cast<double>(m));
    }
    const double lq = std::log(q);
    if (q < 1.0) {
        return std::log(-std::expm1(m * lq)) - std::log(-std::expm1(lq));
    }
    return (m - 1) * lq + std::log(-std::expm1(-m * lq)) - std::log(-std::expm1(-lq));
}

double log_normalizing_constant(int n, double q)
{
    if (n < 1 || q < 0.0) {
        throw std::invalid_argument("log_normalizing_constant: need n >= 1 and q >= 0");
    }
    double acc = 0.0;
    for (int i = 1; i <= n; ++i) {
        acc += log_geometric_sum(i, q);
    }
    return acc;
}

double normalizing_constant(int n, double q) { return std::exp(log_normalizing_constant(n, q)); }

int sample_truncated_geometric(int i, double q, double u)
{
    if (i <= 1 || q == 0.0) {
        return 0;
    }
    if (q == 1.0) {
        return std::min(i - 1, static_cast<int>(u * i));
    }
    if (q > 1.0) {
        // Mirror j -> i - 1 - j with parameter 1/q, keeping the draw monotone in u.
        return i - 1 - sample_truncated_geometric(i, 1.0 / q, 1.0 - u);
    }
    const double lq = std::log(q);
    double level = std::log1p(u * std::expm1(i * lq)) / lq;
    int j = static_cast<int>(std::ceil(level)) - 1;
    return std::clamp(j, 0, i - 1);
}

double truncated_geometric_cdf(int i, double q, int j)
{
    if (j < 0) {
        return 0.0;
    }
    if (j >= i - 1) {
        return 1.0;
    }
    if (q == 0.0) {
        return 1.0;
    }
    if (q == 1.0) {
        return static_cast<double>(j + 1) / i;
    }
    if (q > 1.0) {
        return 1.0 - truncated_geometric_cdf(i, 1.0 / q, i - 2 - j);
    }
    const double lq = std::log(q);
    return std::expm1((j + 1) * lq) / std::expm1(i * lq);
}

Permutation sample_mallows(int n, double q, CounterRng& rng)
{
    if (n < 1 || q < 0.0) {
        throw std::invalid_argument("sample_mallows: need n >= 1 and q >= 0");
    }
    std::vector<int> ell(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
        ell[static_cast<std::size_t>(i - 1)] = sample_truncated_geometric(i, q, rng.uniform());
    }
    std::vector<int> out(ell.size());
    decode_into(ell, out);
    return Permutation(std::move(out));
}

std::uint64_t permutation_rank(std::span<const int> values)
{
    const std::size_t n = values.size();
    if (n > 20) {
        throw std::invalid_argument("permutation_rank: n > 20 overflows 64 bits");
    }
    std::uint64_t rank = 0;
    for (std::size_t k = 0; k < n; ++k) {
        std::uint64_t smaller_right = 0;
        for (std::size_t j = k + 1; j < n; ++j) {
            smaller_right += values[j] < values[k] ? 1 : 0;
        }
        rank = rank * (n - k) + smaller_right;
    }
    return rank;
}

Permutation permutation_unrank(int n, std::uint64_t rank)
{
    std::vector<std::uint64_t> digits(static_cast<std::size_t>(n));
    for (int k = n - 1; k >= 0; --k) {
        auto base = static_cast<std::uint64_t>(n - k);
        digits[static_cast<std::size_t>(k)] = rank % base;
        rank /= base;
    }
    std::vector<int> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), 1);
    std::vector<int> out;
    out.reserve(pool.size());
    for (int k = 0; k < n; ++k) {
        auto it = pool.begin() + static_cast<std::ptrdiff_t>(digits[static_cast<std::size_t>(k)]);
        out.push_back(*it);
        pool.erase(it);
    }
    return Permutation(std::move(out));
}

FiniteDistribution::FiniteDistribution(int n, std::vector<double> masses) : n_{n}, masses_{std::move(masses)}
{
    double total = 0.0;
    for (double m : masses_) {
        if (!(m >= 0.0)) {
            throw std::invalid_argument("FiniteDistribution: negative mass");
        }
        total += m;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("FiniteDistribution: masses do not sum to 1");
    }
}

FiniteDistribution enumerate_mallows(int n, double q)
{
    if (n < 1 || n > FiniteDistribution::kMaxEnumerable) {
        throw std::invalid_argument("enumerate_mallows: n must be in [1, 9]");
    }
    if (q < 0.0) {
        throw std::invalid_argument("enumerate_mallows: q must be nonnegative");
    }
    std::uint64_t count = 1;
    for (int k = 2; k <= n; ++k) {
        count *= static_cast<std::uint64_t>(k);
    }
    const double log_z = log_normalizing_constant(n, q);
    std::vector<double> masses(count);
    for (std::uint64_t r = 0; r < count; ++r) {
        masses[r] = std::exp(log_mallows_weight(permutation_unrank(n, r), q) - log_z);
    }
    return FiniteDistribution(n, std::move(masses));
}

}  // namespace mallows
