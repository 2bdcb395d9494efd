#ifndef FEATSIG_STATS_HPP
#define FEATSIG_STATS_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace featsig {

// Alternative hypothesis for the signed-rank test.  `greater` tests whether
// the median difference is above zero; `two_sided` tests either direction.
enum class Tail {
    greater,
    two_sided,
};

struct TestResult {
    double statistic = 0.0;     // signed-rank sum W+ over positive differences
    double p_value = 1.0;
    std::size_t n_effective = 0;  // nonzero differences entering the test
    double effect_size = 0.0;     // mean of the input differences
};

// Number of nonzero differences at or below which the exact null
// distribution (all 2^n sign assignments) is used instead of the normal
// approximation.
inline constexpr std::size_t kWilcoxonExactThreshold = 25;

// Wilcoxon matched-pairs signed-rank test on paired differences.
//
// Zero differences are dropped before ranking; tied absolute values receive
// midranks.  With n_effective <= kWilcoxonExactThreshold the p-value is the
// exact tail mass of the signed-rank distribution over all sign
// assignments; above it a normal approximation with tie and continuity
// corrections is used.  All-zero input yields the degenerate result
// {p = 1, n_effective = 0}.
TestResult wilcoxon_signed_rank(std::span<const double> diffs, Tail tail);

// Benjamini-Hochberg step-up procedure at level q.  Sorts the p-values
// ascending, finds r = max{i : P(i) <= i*q/k}, and rejects the hypotheses
// carrying the r smallest p-values.  Returns the original indices of the
// rejected hypotheses, sorted ascending.
std::vector<std::size_t> benjamini_hochberg(std::span<const double> p_values, double q);

// Upper tail of the standard normal, accurate far into the tail.
double normal_upper_tail(double z);

}  // namespace featsig

#endif  // FEATSIG_STATS_HPP
