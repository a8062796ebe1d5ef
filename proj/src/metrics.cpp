#include "lid/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lid/errors.hpp"

namespace lid {

double mae(const std::vector<double>& estimates, const std::vector<double>& labels)
{
    if (estimates.size() != labels.size()) throw ValidationError("mae: length mismatch");
    if (estimates.empty()) throw ValidationError("mae: empty input");
    double total = 0.0;
    for (std::size_t i = 0; i < estimates.size(); ++i) total += std::abs(estimates[i] - labels[i]);
    return total / static_cast<double>(estimates.size());
}

namespace {

class Fenwick {
public:
    explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}
    void add(std::size_t pos)
    {
        for (++pos; pos < tree_.size(); pos += pos & (~pos + 1)) ++tree_[pos];
    }
    /// Number of inserted ranks <= pos.
    long long prefix(std::size_t pos) const
    {
        long long s = 0;
        for (++pos; pos > 0; pos -= pos & (~pos + 1)) s += tree_[pos];
        return s;
    }

private:
    std::vector<long long> tree_;
};

/// Dense ranks 0..m-1 with equal values sharing a rank.
std::vector<std::size_t> dense_ranks(const std::vector<double>& v)
{
    std::vector<double> sorted(v);
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<std::size_t> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        r[i] = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), v[i]) - sorted.begin());
    return r;
}

}  // namespace

double concordance(const std::vector<double>& est, const std::vector<double>& labels, ConcordanceVariant variant)
{
    const std::size_t n = est.size();
    if (n != labels.size()) throw ValidationError("concordance: length mismatch");
    if (n < 2) throw ValidationError("concordance needs at least two points");

    const auto rank = dense_ranks(est);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });

    Fenwick tree(n);
    double hits = 0.0;
    double pairs = 0.0;
    long long inserted = 0;
    for (std::size_t start = 0; start < n;) {
        std::size_t stop = start;
        while (stop < n && labels[order[stop]] == labels[order[start]]) ++stop;
        if (variant == ConcordanceVariant::Literal) {
            // Insert the tie group first so same-label pairs count in both orders.
            for (std::size_t p = start; p < stop; ++p) tree.add(rank[order[p]]);
            for (std::size_t p = start; p < stop; ++p) hits += static_cast<double>(tree.prefix(rank[order[p]]) - 1);
        } else {
            for (std::size_t p = start; p < stop; ++p) {
                const std::size_t r = rank[order[p]];
                const long long below = r > 0 ? tree.prefix(r - 1) : 0;
                const long long equal = tree.prefix(r) - below;
                hits += static_cast<double>(below) + 0.5 * static_cast<double>(equal);
            }
            pairs += static_cast<double>(inserted) * static_cast<double>(stop - start);
            for (std::size_t p = start; p < stop; ++p) tree.add(rank[order[p]]);
        }
        inserted += static_cast<long long>(stop - start);
        start = stop;
    }
    if (variant == ConcordanceVariant::Literal) return hits / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
    if (pairs == 0.0) throw ValidationError("concordance: no pairs with distinct labels");
    return hits / pairs;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v)
{
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j - 1);
        for (std::size_t k = i; k < j; ++k) r[order[k]] = avg;
        i = j;
    }
    return r;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.size() != b.size()) throw ValidationError("spearman: length mismatch");
    if (a.size() < 2) throw ValidationError("spearman needs at least two points");
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) throw ValidationError("spearman undefined for constant input");
    return sab / std::sqrt(saa * sbb);
}

}  // namespace lid
