#pragma once

#include <vector>

namespace lid {

/// Mean absolute error between estimates and labels.
double mae(const std::vector<double>& estimates, const std::vector<double>& labels);

enum class ConcordanceVariant {
    /// Sum over ordered pairs (i != j) with label_i <= label_j of
    /// 1[est_i <= est_j], divided by N(N-1)/2. Exceeds 1 when labels tie.
    Literal,
    /// Only pairs with label_i < label_j count; ties in the estimate score 1/2;
    /// normalised by the number of such pairs.
    ExcludeTies,
};

/// O(N log N) via a Fenwick tree over estimate ranks.
double concordance(const std::vector<double>& estimates, const std::vector<double>& labels,
                   ConcordanceVariant variant = ConcordanceVariant::Literal);

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace lid
