#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "jcat/errors.hpp"
#include "jcat/preprocess.hpp"
#include "jcat/random.hpp"

namespace jcat {

// Journal quality categories, ordered. This ordering is the tie-break and
// class-coding convention everywhere downstream.
enum class Category : int { Least = 0, Average = 1, Best = 2 };

inline std::string category_name(Category c) {
    switch (c) {
        case Category::Least: return "Least";
        case Category::Average: return "Average";
        case Category::Best: return "Best";
    }
    return "?";
}

inline Category category_from_name(const std::string& s) {
    if (s == "Least") return Category::Least;
    if (s == "Average") return Category::Average;
    if (s == "Best") return Category::Best;
    throw Error("unknown category \"" + s + "\"");
}

// Dense symmetric dissimilarity matrix with zero diagonal.
struct DistanceMatrix {
    std::size_t n = 0;
    std::vector<double> d;  // n*n, row-major

    DistanceMatrix() = default;
    explicit DistanceMatrix(std::size_t n_) : n(n_), d(n_ * n_, 0.0) {}

    double at(std::size_t i, std::size_t j) const { return d[i * n + j]; }
    void set(std::size_t i, std::size_t j, double v) {
        d[i * n + j] = v;
        d[j * n + i] = v;
    }
};

// ---------------------------------------------------------------------------
// Gower dissimilarity
// ---------------------------------------------------------------------------

// Unweighted mean of per-feature dissimilarities: range-normalized absolute
// difference for numeric features (range is 1 after min-max scaling), 0/1
// mismatch for encoded-categorical ones.
inline double gower_distance(const std::vector<double>& a, const std::vector<double>& b,
                             const std::vector<FeatureKind>& kinds) {
    if (a.size() != b.size() || a.size() != kinds.size()) {
        throw ArityMismatchError("gower_distance: rows have arity " + std::to_string(a.size()) +
                                 " and " + std::to_string(b.size()) + ", kinds " +
                                 std::to_string(kinds.size()));
    }
    if (a.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (kinds[j] == FeatureKind::Numeric) {
            sum += std::abs(a[j] - b[j]);
        } else {
            sum += (a[j] == b[j]) ? 0.0 : 1.0;
        }
    }
    return sum / static_cast<double>(a.size());
}

inline DistanceMatrix gower_matrix(const FeatureMatrix& X, const std::vector<FeatureKind>& kinds) {
    DistanceMatrix D(X.n_rows());
    for (std::size_t i = 0; i < X.n_rows(); ++i) {
        for (std::size_t j = i + 1; j < X.n_rows(); ++j) {
            D.set(i, j, gower_distance(X.values[i], X.values[j], kinds));
        }
    }
    return D;
}

// Default treatment: every feature numeric, matching a pipeline that
// label-encodes and scales before clustering.
inline DistanceMatrix gower_matrix(const FeatureMatrix& X) {
    return gower_matrix(X, std::vector<FeatureKind>(X.n_features(), FeatureKind::Numeric));
}

// ---------------------------------------------------------------------------
// Clustering
// ---------------------------------------------------------------------------

struct ClusterAssignment {
    std::vector<int> labels;                 // per-row cluster id in 0..k-1
    std::vector<std::size_t> medoid_indices; // k-medoids: sorted row indices
    std::vector<std::vector<double>> centroids;  // k-means only
    double total_cost = 0.0;
    std::vector<double> cost_history;  // k-means: cost after each Lloyd iteration
};

namespace detail {

// Nearest medoid with lowest-index tie-break. Each medoid anchors its own
// cluster, so every cluster id is populated even when two medoids sit on
// duplicate rows.
inline void assign_to_medoids(const DistanceMatrix& D, const std::vector<std::size_t>& medoids,
                              std::vector<int>& labels, double& total_cost) {
    labels.assign(D.n, 0);
    total_cost = 0.0;
    for (std::size_t i = 0; i < D.n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        int best_c = 0;
        for (std::size_t c = 0; c < medoids.size(); ++c) {
            const double d = D.at(i, medoids[c]);
            if (d < best) {
                best = d;
                best_c = static_cast<int>(c);
            }
        }
        labels[i] = best_c;
        total_cost += best;
    }
    for (std::size_t c = 0; c < medoids.size(); ++c) {
        labels[medoids[c]] = static_cast<int>(c);
    }
}

inline double medoid_set_cost(const DistanceMatrix& D, const std::vector<std::size_t>& medoids) {
    double cost = 0.0;
    for (std::size_t i = 0; i < D.n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (const std::size_t m : medoids) best = std::min(best, D.at(i, m));
        cost += best;
    }
    return cost;
}

}  // namespace detail

namespace detail {

// Greedy BUILD: first medoid minimizes total distance; each next maximizes
// the cost reduction. Ties go to the lowest row index.
inline std::vector<std::size_t> pam_build(const DistanceMatrix& D, std::size_t k) {
    const std::size_t n = D.n;
    std::vector<bool> is_medoid(n, false);
    std::vector<std::size_t> medoids;
    {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_i = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += D.at(i, j);
            if (s < best) {
                best = s;
                best_i = i;
            }
        }
        medoids.push_back(best_i);
        is_medoid[best_i] = true;
    }
    std::vector<double> nearest(n);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = D.at(i, medoids[0]);
    while (medoids.size() < k) {
        double best_gain = -1.0;
        std::size_t best_c = 0;
        for (std::size_t c = 0; c < n; ++c) {
            if (is_medoid[c]) continue;
            double gain = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double diff = nearest[j] - D.at(j, c);
                if (diff > 0.0) gain += diff;
            }
            if (gain > best_gain) {
                best_gain = gain;
                best_c = c;
            }
        }
        medoids.push_back(best_c);
        is_medoid[best_c] = true;
        for (std::size_t j = 0; j < n; ++j) nearest[j] = std::min(nearest[j], D.at(j, best_c));
    }
    return medoids;
}

// Best-improvement SWAP: apply the single best strictly-improving
// (medoid, non-medoid) exchange per iteration until none is left or the
// iteration budget runs out. The result is 1-swap-optimal.
inline double pam_swap(const DistanceMatrix& D, std::vector<std::size_t>& medoids,
                       std::size_t max_iter) {
    const std::size_t n = D.n;
    std::vector<bool> is_medoid(n, false);
    for (const std::size_t m : medoids) is_medoid[m] = true;
    double current_cost = medoid_set_cost(D, medoids);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        double best_cost = current_cost;
        std::size_t best_m = 0, best_h = 0;
        bool found = false;
        for (std::size_t mi = 0; mi < medoids.size(); ++mi) {
            for (std::size_t h = 0; h < n; ++h) {
                if (is_medoid[h]) continue;
                std::vector<std::size_t> trial = medoids;
                trial[mi] = h;
                const double cost = medoid_set_cost(D, trial);
                if (cost < best_cost - 1e-15) {
                    best_cost = cost;
                    best_m = mi;
                    best_h = h;
                    found = true;
                }
            }
        }
        if (!found) break;
        is_medoid[medoids[best_m]] = false;
        is_medoid[best_h] = true;
        medoids[best_m] = best_h;
        current_cost = best_cost;
    }
    return current_cost;
}

}  // namespace detail

// PAM. The first attempt runs the classical greedy BUILD; three further
// attempts restart SWAP from seeded random medoid sets and the cheapest
// 1-swap-optimal result wins. Single-start PAM can stall in a local optimum
// several percent above the exhaustive best even at desk scale; the
// restarts close that gap while keeping the output deterministic per seed.
inline ClusterAssignment k_medoids(const DistanceMatrix& D, std::size_t k, std::uint64_t seed = 0,
                                   std::size_t max_iter = 1000) {
    const std::size_t n = D.n;
    if (k > n) {
        throw KTooLargeError("k_medoids: k=" + std::to_string(k) + " exceeds n=" + std::to_string(n));
    }
    if (k == 0) throw KTooLargeError("k_medoids: k must be positive");

    std::vector<std::size_t> best_medoids = detail::pam_build(D, k);
    double best_cost = detail::pam_swap(D, best_medoids, max_iter);

    Rng rng(mix_seed(seed, 0x70616dULL));
    for (int attempt = 0; attempt < 3; ++attempt) {
        std::vector<std::size_t> medoids = rng.sample_without_replacement(n, k);
        const double cost = detail::pam_swap(D, medoids, max_iter);
        if (cost < best_cost - 1e-15) {
            best_cost = cost;
            best_medoids = std::move(medoids);
        }
    }

    std::sort(best_medoids.begin(), best_medoids.end());
    ClusterAssignment out;
    out.medoid_indices = best_medoids;
    detail::assign_to_medoids(D, best_medoids, out.labels, out.total_cost);
    return out;
}

// Lloyd's algorithm with seeded distinct-row initialization. Cost is the
// within-cluster sum of squared Euclidean distances. An emptied cluster is
// re-seeded with the worst-fit point (farthest from its assigned centroid),
// which keeps the per-iteration cost non-increasing.
inline ClusterAssignment k_means(const FeatureMatrix& X, std::size_t k, std::uint64_t seed,
                                 std::size_t max_iter = 300) {
    const std::size_t n = X.n_rows();
    const std::size_t p = X.n_features();
    if (k > n) {
        throw KTooLargeError("k_means: k=" + std::to_string(k) + " exceeds n=" + std::to_string(n));
    }
    if (k == 0) throw KTooLargeError("k_means: k must be positive");

    auto sq_dist = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            const double d = a[j] - b[j];
            s += d * d;
        }
        return s;
    };

    Rng rng(mix_seed(seed, 0x6b6d65616e73ULL));
    std::vector<std::vector<double>> centroids;
    for (const std::size_t i : rng.sample_without_replacement(n, k)) {
        centroids.push_back(X.values[i]);
    }

    std::vector<int> labels(n, -1);
    std::vector<double> cost_history;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int best_c = 0;
            for (std::size_t c = 0; c < k; ++c) {
                const double d = sq_dist(X.values[i], centroids[c]);
                if (d < best) {
                    best = d;
                    best_c = static_cast<int>(c);
                }
            }
            if (labels[i] != best_c) {
                labels[i] = best_c;
                changed = true;
            }
        }

        for (std::size_t c = 0; c < k; ++c) {
            std::size_t count = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (labels[i] == static_cast<int>(c)) ++count;
            }
            if (count > 0) continue;
            // move the worst-fit point into the emptied cluster
            double far = -1.0;
            std::size_t far_i = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = sq_dist(X.values[i], centroids[static_cast<std::size_t>(labels[i])]);
                if (d > far) {
                    far = d;
                    far_i = i;
                }
            }
            labels[far_i] = static_cast<int>(c);
            changed = true;
        }

        for (std::size_t c = 0; c < k; ++c) {
            std::vector<double> mean(p, 0.0);
            std::size_t count = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (labels[i] != static_cast<int>(c)) continue;
                for (std::size_t j = 0; j < p; ++j) mean[j] += X.values[i][j];
                ++count;
            }
            for (std::size_t j = 0; j < p; ++j) mean[j] /= static_cast<double>(count);
            centroids[c] = std::move(mean);
        }
        double cost = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            cost += sq_dist(X.values[i], centroids[static_cast<std::size_t>(labels[i])]);
        }
        cost_history.push_back(cost);
        if (!changed) break;
    }

    ClusterAssignment out;
    out.labels = labels;
    out.centroids = centroids;
    out.cost_history = std::move(cost_history);
    out.total_cost = out.cost_history.empty() ? 0.0 : out.cost_history.back();
    return out;
}

// ---------------------------------------------------------------------------
// Cluster validation
// ---------------------------------------------------------------------------

// Mean silhouette s(i) = (b - a) / max(a, b); singleton-cluster points
// contribute 0 by convention.
inline double silhouette_width(const DistanceMatrix& D, const std::vector<int>& labels) {
    const std::size_t n = D.n;
    if (labels.size() != n) {
        throw LengthMismatchError("silhouette_width: " + std::to_string(labels.size()) +
                                  " labels for " + std::to_string(n) + " rows");
    }
    int k = 0;
    for (const int l : labels) k = std::max(k, l + 1);
    std::vector<std::size_t> count(static_cast<std::size_t>(k), 0);
    for (const int l : labels) ++count[static_cast<std::size_t>(l)];
    std::size_t nonempty = 0;
    for (const std::size_t c : count) {
        if (c > 0) ++nonempty;
    }
    if (nonempty < 2) throw SingleClusterError("silhouette needs at least 2 clusters");

    double total = 0.0;
    std::vector<double> mean_to(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t own = static_cast<std::size_t>(labels[i]);
        if (count[own] == 1) continue;  // s(i) = 0
        std::fill(mean_to.begin(), mean_to.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            mean_to[static_cast<std::size_t>(labels[j])] += D.at(i, j);
        }
        const double a = mean_to[own] / static_cast<double>(count[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            if (c == own || count[c] == 0) continue;
            b = std::min(b, mean_to[c] / static_cast<double>(count[c]));
        }
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

// Contingency-table adjusted Rand index. When both partitions are trivial
// (all points together, or all points apart) the index is defined as 1.
inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) {
        throw LengthMismatchError("adjusted_rand_index: label vectors of length " +
                                  std::to_string(a.size()) + " and " + std::to_string(b.size()));
    }
    const std::size_t n = a.size();
    if (n < 2) throw LengthMismatchError("adjusted_rand_index needs at least 2 points");

    auto compact = [](const std::vector<int>& v) {
        std::vector<int> sorted(v);
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        std::vector<std::size_t> idx(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            idx[i] = static_cast<std::size_t>(
                std::lower_bound(sorted.begin(), sorted.end(), v[i]) - sorted.begin());
        }
        return std::make_pair(idx, sorted.size());
    };
    const auto [ia, ka] = compact(a);
    const auto [ib, kb] = compact(b);

    std::vector<double> cont(ka * kb, 0.0);
    std::vector<double> row_sum(ka, 0.0), col_sum(kb, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        cont[ia[i] * kb + ib[i]] += 1.0;
        row_sum[ia[i]] += 1.0;
        col_sum[ib[i]] += 1.0;
    }
    auto comb2 = [](double m) { return m * (m - 1.0) / 2.0; };
    double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const double c : cont) sum_ij += comb2(c);
    for (const double c : row_sum) sum_a += comb2(c);
    for (const double c : col_sum) sum_b += comb2(c);

    const double expected = sum_a * sum_b / comb2(static_cast<double>(n));
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;  // both trivial partitions
    return (sum_ij - expected) / (max_index - expected);
}

// ---------------------------------------------------------------------------
// Cluster -> category analysis
// ---------------------------------------------------------------------------

// Bibliometric quality indicators used to rank clusters into categories.
inline const std::vector<std::string>& default_quality_features() {
    static const std::vector<std::string> v = {
        "Journal Impact Factor", "Cite Score",       "SJR",
        "SNIP",                  "Hirsch Index",     "Eigenfactor Score",
        "Article Influence Score", "Immediacy Index", "5 Year Impact Factor"};
    return v;
}

struct CategoryMap {
    std::vector<Category> cluster_to_category;  // indexed by cluster id
    std::vector<double> composite_scores;       // per cluster

    Category category_of(int cluster) const {
        return cluster_to_category.at(static_cast<std::size_t>(cluster));
    }
};

// Rank clusters by the mean (over quality features) of per-cluster column
// means on scaled data: highest composite -> Best, lowest -> Least. On ties
// the lower cluster id ranks higher.
inline CategoryMap assign_categories(const FeatureMatrix& X, const std::vector<int>& labels,
                                     const std::vector<std::string>& quality_features =
                                         default_quality_features()) {
    if (labels.size() != X.n_rows()) {
        throw LengthMismatchError("assign_categories: " + std::to_string(labels.size()) +
                                  " labels for " + std::to_string(X.n_rows()) + " rows");
    }
    std::vector<std::size_t> feat_idx;
    for (const auto& name : quality_features) feat_idx.push_back(X.feature_index(name));

    int k = 0;
    for (const int l : labels) k = std::max(k, l + 1);
    const std::size_t kk = static_cast<std::size_t>(k);

    std::vector<double> score(kk, 0.0);
    std::vector<std::size_t> count(kk, 0);
    for (std::size_t i = 0; i < X.n_rows(); ++i) ++count[static_cast<std::size_t>(labels[i])];
    if (kk != 3 || count[0] == 0 || count[1] == 0 || count[2] == 0) {
        throw Error("assign_categories requires exactly 3 nonempty clusters");
    }
    for (const std::size_t j : feat_idx) {
        std::vector<double> col_mean(kk, 0.0);
        for (std::size_t i = 0; i < X.n_rows(); ++i) {
            col_mean[static_cast<std::size_t>(labels[i])] += X.values[i][j];
        }
        for (std::size_t c = 0; c < kk; ++c) {
            if (count[c] > 0) score[c] += col_mean[c] / static_cast<double>(count[c]);
        }
    }
    for (std::size_t c = 0; c < kk; ++c) {
        score[c] /= static_cast<double>(feat_idx.size());
    }

    // Sort clusters by composite descending; equal scores keep id order, so
    // the lower id ranks higher.
    std::vector<std::size_t> order(kk);
    for (std::size_t c = 0; c < kk; ++c) order[c] = c;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return score[l] > score[r]; });

    CategoryMap out;
    out.composite_scores = score;
    out.cluster_to_category.assign(kk, Category::Least);
    static const Category by_rank[3] = {Category::Best, Category::Average, Category::Least};
    for (std::size_t rank = 0; rank < kk; ++rank) {
        out.cluster_to_category[order[rank]] = by_rank[rank];
    }
    return out;
}

}  // namespace jcat
