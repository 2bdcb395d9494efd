#include "featsig/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "featsig/errors.hpp"

namespace featsig {

double normal_upper_tail(double z) {
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

namespace {

// Midranks of |d| for the nonzero differences, returned doubled so they are
// exact integers even through ties (a midrank is always a multiple of 1/2).
// positive_mask[i] is set when the i-th retained difference is positive.
struct RankedDiffs {
    std::vector<std::uint32_t> doubled_ranks;
    std::vector<bool> positive;
    std::vector<std::size_t> tie_sizes;
};

RankedDiffs rank_absolute(std::span<const double> diffs) {
    std::vector<double> abs_values;
    std::vector<bool> positive;
    abs_values.reserve(diffs.size());
    positive.reserve(diffs.size());
    for (double d : diffs) {
        if (!std::isfinite(d)) throw invalid_argument_error("non-finite difference in signed-rank input");
        if (d == 0.0) continue;
        abs_values.push_back(std::fabs(d));
        positive.push_back(d > 0.0);
    }

    const std::size_t n = abs_values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return abs_values[a] < abs_values[b];
    });

    RankedDiffs out;
    out.doubled_ranks.assign(n, 0);
    out.positive = std::move(positive);

    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && abs_values[order[j + 1]] == abs_values[order[i]]) ++j;
        // ranks i+1 .. j+1 share midrank (i+j+2)/2; doubled: i+j+2
        std::uint32_t doubled = static_cast<std::uint32_t>(i + j + 2);
        for (std::size_t k = i; k <= j; ++k) out.doubled_ranks[order[k]] = doubled;
        if (j > i) out.tie_sizes.push_back(j - i + 1);
        i = j + 1;
    }
    return out;
}

// Exact tail masses of the signed-rank distribution by dynamic programming
// over doubled ranks.  counts[s] = number of sign assignments whose doubled
// W+ equals s; the full table is the 2^n enumeration grouped by statistic.
void exact_tails(const RankedDiffs& ranked, std::uint64_t doubled_w,
                 double& p_greater_equal, double& p_less_equal) {
    const std::size_t n = ranked.doubled_ranks.size();
    std::uint64_t total_doubled = 0;
    for (std::uint32_t r : ranked.doubled_ranks) total_doubled += r;

    std::vector<std::uint64_t> counts(total_doubled + 1, 0);
    counts[0] = 1;
    std::uint64_t reach = 0;
    for (std::uint32_t r : ranked.doubled_ranks) {
        reach += r;
        for (std::uint64_t s = reach; s >= r; --s) {
            counts[s] += counts[s - r];
        }
    }

    std::uint64_t ge = 0, le = 0;
    for (std::uint64_t s = 0; s <= total_doubled; ++s) {
        if (s >= doubled_w) ge += counts[s];
        if (s <= doubled_w) le += counts[s];
    }
    const double denom = std::ldexp(1.0, static_cast<int>(n));  // 2^n, exact
    p_greater_equal = static_cast<double>(ge) / denom;
    p_less_equal = static_cast<double>(le) / denom;
}

// Normal approximation with midrank tie correction and continuity
// correction.
void approx_tails(const RankedDiffs& ranked, double w_plus,
                  double& p_greater_equal, double& p_less_equal) {
    const double n = static_cast<double>(ranked.doubled_ranks.size());
    const double mean = n * (n + 1.0) / 4.0;
    double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
    for (std::size_t t : ranked.tie_sizes) {
        const double td = static_cast<double>(t);
        var -= (td * td * td - td) / 48.0;
    }
    const double sd = std::sqrt(var);
    p_greater_equal = normal_upper_tail((w_plus - 0.5 - mean) / sd);
    p_less_equal = 1.0 - normal_upper_tail((w_plus + 0.5 - mean) / sd);
}

}  // namespace

TestResult wilcoxon_signed_rank(std::span<const double> diffs, Tail tail) {
    if (diffs.empty()) throw invalid_argument_error("signed-rank test on empty input");

    TestResult result;
    double sum = 0.0;
    for (double d : diffs) sum += d;
    result.effect_size = sum / static_cast<double>(diffs.size());

    RankedDiffs ranked = rank_absolute(diffs);
    result.n_effective = ranked.doubled_ranks.size();
    if (result.n_effective == 0) {
        result.statistic = 0.0;
        result.p_value = 1.0;  // no evidence either way
        return result;
    }

    std::uint64_t doubled_w = 0;
    for (std::size_t i = 0; i < ranked.doubled_ranks.size(); ++i) {
        if (ranked.positive[i]) doubled_w += ranked.doubled_ranks[i];
    }
    result.statistic = static_cast<double>(doubled_w) / 2.0;

    double p_ge = 1.0, p_le = 1.0;
    if (result.n_effective <= kWilcoxonExactThreshold) {
        exact_tails(ranked, doubled_w, p_ge, p_le);
    } else {
        approx_tails(ranked, result.statistic, p_ge, p_le);
    }

    switch (tail) {
        case Tail::greater:
            result.p_value = p_ge;
            break;
        case Tail::two_sided:
            result.p_value = std::min(1.0, 2.0 * std::min(p_ge, p_le));
            break;
    }
    result.p_value = std::clamp(result.p_value, 0.0, 1.0);
    return result;
}

std::vector<std::size_t> benjamini_hochberg(std::span<const double> p_values, double q) {
    if (!(q > 0.0 && q < 1.0))
        throw invalid_argument_error("BH level q must lie in (0, 1)");
    for (double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0))
            throw invalid_argument_error("BH input p-value outside [0, 1]");
    }

    const std::size_t k = p_values.size();
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return p_values[a] < p_values[b];
    });

    std::size_t r = 0;
    for (std::size_t i = k; i >= 1; --i) {
        if (p_values[order[i - 1]] <= static_cast<double>(i) * q / static_cast<double>(k)) {
            r = i;
            break;
        }
    }

    std::vector<std::size_t> rejected(order.begin(), order.begin() + r);
    std::sort(rejected.begin(), rejected.end());
    return rejected;
}

}  // namespace featsig
