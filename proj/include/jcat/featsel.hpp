#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "jcat/classify.hpp"
#include "jcat/errors.hpp"
#include "jcat/preprocess.hpp"

namespace jcat {

struct FeatureScore {
    std::string feature_name;
    double score = 0.0;
};

struct FeatureSubset {
    std::vector<std::string> feature_names;
    double merit = 0.0;
};

namespace detail {

inline void require_multiclass(const std::vector<int>& y) {
    for (std::size_t i = 1; i < y.size(); ++i) {
        if (y[i] != y[0]) return;
    }
    throw SingleClassError("need at least 2 classes");
}

}  // namespace detail

// Chi-square statistic over class-conditional sums of a nonnegative feature:
// observed O_c is the feature total within class c, expected E_c distributes
// the grand total by class frequency, score = sum (O_c - E_c)^2 / E_c.
inline std::vector<FeatureScore> chi2_scores(const FeatureMatrix& X, const std::vector<int>& y) {
    if (X.n_rows() != y.size()) {
        throw LengthMismatchError("chi2_scores: " + std::to_string(y.size()) + " labels for " +
                                  std::to_string(X.n_rows()) + " rows");
    }
    detail::require_multiclass(y);
    int C = 0;
    for (const int l : y) C = std::max(C, l + 1);
    std::vector<double> class_count(static_cast<std::size_t>(C), 0.0);
    for (const int l : y) class_count[static_cast<std::size_t>(l)] += 1.0;
    const double n = static_cast<double>(y.size());

    std::vector<FeatureScore> out;
    out.reserve(X.n_features());
    std::vector<double> observed(static_cast<std::size_t>(C));
    for (std::size_t j = 0; j < X.n_features(); ++j) {
        std::fill(observed.begin(), observed.end(), 0.0);
        double grand = 0.0;
        for (std::size_t i = 0; i < X.n_rows(); ++i) {
            const double v = X.values[i][j];
            if (v < 0.0) {
                throw NegativeFeatureError("chi2_scores: feature \"" + X.feature_names[j] +
                                           "\" has a negative value at row " + std::to_string(i));
            }
            observed[static_cast<std::size_t>(y[i])] += v;
            grand += v;
        }
        double score = 0.0;
        for (std::size_t c = 0; c < static_cast<std::size_t>(C); ++c) {
            const double expected = grand * class_count[c] / n;
            if (expected > 0.0) {
                const double d = observed[c] - expected;
                score += d * d / expected;
            }
        }
        out.push_back({X.feature_names[j], score});
    }
    return out;
}

// Descending by score; equal scores order by feature name, which makes
// increasing-k selections nested.
inline std::vector<std::string> select_top_k(std::vector<FeatureScore> scores, std::size_t k) {
    if (k > scores.size()) {
        throw KTooLargeError("select_top_k: k=" + std::to_string(k) + " exceeds " +
                             std::to_string(scores.size()) + " features");
    }
    std::sort(scores.begin(), scores.end(), [](const FeatureScore& a, const FeatureScore& b) {
        return a.score > b.score || (a.score == b.score && a.feature_name < b.feature_name);
    });
    std::vector<std::string> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(scores[i].feature_name);
    return out;
}

struct ForestParams {
    std::size_t n_trees = 100;
    std::size_t max_depth = std::numeric_limits<std::size_t>::max();
    std::size_t min_samples_leaf = 1;
};

// Mean decrease in Gini impurity across a random forest, weighted by node
// sample fraction and normalized to sum 1.
inline std::vector<FeatureScore> rf_importance(const FeatureMatrix& X, const std::vector<int>& y,
                                               const ForestParams& params, std::uint64_t seed) {
    detail::require_multiclass(y);
    ClassifierSpec spec;
    spec.kind = ClassifierKind::Rf;
    spec.seed = seed;
    spec.n_trees = params.n_trees;
    spec.cart_max_depth = params.max_depth;
    spec.min_samples_leaf = params.min_samples_leaf;
    const TrainedModel forest = train(spec, X, y);

    std::vector<double> total(X.n_features(), 0.0);
    for (const auto& tree : forest.trees) {
        for (std::size_t j = 0; j < X.n_features(); ++j) total[j] += tree.feature_importance[j];
    }
    double sum = 0.0;
    for (const double v : total) sum += v;
    std::vector<FeatureScore> out;
    out.reserve(X.n_features());
    for (std::size_t j = 0; j < X.n_features(); ++j) {
        const double v = sum > 0.0 ? total[j] / sum : 1.0 / static_cast<double>(X.n_features());
        out.push_back({X.feature_names[j], v});
    }
    return out;
}

namespace detail {

// Pearson correlation; either argument constant gives 0 by convention.
inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va <= 0.0 || vb <= 0.0) return 0.0;
    return cov / std::sqrt(va * vb);
}

// Precomputed absolute correlations for CFS merit evaluation.
struct CfsCache {
    std::vector<std::string> names;
    std::vector<double> class_corr;           // |r| feature vs class
    std::vector<std::vector<double>> ff_corr; // |r| feature vs feature

    static CfsCache build(const FeatureMatrix& X, const std::vector<int>& y) {
        CfsCache c;
        c.names = X.feature_names;
        std::vector<double> yd(y.begin(), y.end());
        const std::size_t p = X.n_features();
        std::vector<std::vector<double>> cols(p);
        for (std::size_t j = 0; j < p; ++j) cols[j] = X.column(j);
        c.class_corr.resize(p);
        for (std::size_t j = 0; j < p; ++j) c.class_corr[j] = std::abs(pearson(cols[j], yd));
        c.ff_corr.assign(p, std::vector<double>(p, 1.0));
        for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = a + 1; b < p; ++b) {
                const double r = std::abs(pearson(cols[a], cols[b]));
                c.ff_corr[a][b] = r;
                c.ff_corr[b][a] = r;
            }
        }
        return c;
    }

    double merit(const std::vector<std::size_t>& subset) const {
        const double k = static_cast<double>(subset.size());
        double rcf = 0.0;
        for (const std::size_t j : subset) rcf += class_corr[j];
        rcf /= k;
        double rff = 0.0;
        if (subset.size() > 1) {
            for (std::size_t a = 0; a < subset.size(); ++a) {
                for (std::size_t b = a + 1; b < subset.size(); ++b) {
                    rff += ff_corr[subset[a]][subset[b]];
                }
            }
            rff /= k * (k - 1.0) / 2.0;
        }
        return k * rcf / std::sqrt(k + k * (k - 1.0) * rff);
    }
};

}  // namespace detail

// Hall's merit: k * mean|r_fc| / sqrt(k + k(k-1) * mean|r_ff|), with Pearson
// correlation against the integer-coded class.
inline double cfs_merit(const std::vector<std::string>& subset, const FeatureMatrix& X,
                        const std::vector<int>& y) {
    if (subset.empty()) throw EmptySubsetError("cfs_merit: empty feature subset");
    const auto cache = detail::CfsCache::build(X, y);
    std::vector<std::size_t> idx;
    for (const auto& name : subset) idx.push_back(X.feature_index(name));
    return cache.merit(idx);
}

// Forward best-first search over feature subsets ordered by CFS merit.
// Expansion adds one feature at a time; the search stops after stall_limit
// consecutive expansions that fail to improve the best seen merit.
inline FeatureSubset best_first_cfs(const FeatureMatrix& X, const std::vector<int>& y,
                                    std::size_t stall_limit = 5) {
    if (X.n_features() == 0) throw EmptySubsetError("best_first_cfs: no features");
    const auto cache = detail::CfsCache::build(X, y);
    const std::size_t p = X.n_features();

    using Subset = std::vector<std::size_t>;  // sorted feature indices
    auto name_key = [&](const Subset& s) {
        std::vector<std::string> names;
        for (const std::size_t j : s) names.push_back(X.feature_names[j]);
        std::sort(names.begin(), names.end());
        return names;
    };

    struct OpenEntry {
        double merit;
        std::vector<std::string> names;  // sorted, for deterministic tie-break
        Subset subset;
    };
    auto cmp = [](const OpenEntry& a, const OpenEntry& b) {
        if (a.merit != b.merit) return a.merit > b.merit;
        return a.names < b.names;
    };
    std::set<OpenEntry, decltype(cmp)> open(cmp);
    std::set<Subset> visited;

    Subset empty;
    open.insert({-std::numeric_limits<double>::infinity(), {}, empty});
    visited.insert(empty);

    double best_merit = -std::numeric_limits<double>::infinity();
    Subset best_subset;
    std::vector<std::string> best_names;
    std::size_t stall = 0;

    while (!open.empty() && stall < stall_limit) {
        const OpenEntry current = *open.begin();
        open.erase(open.begin());

        bool improved = false;
        for (std::size_t j = 0; j < p; ++j) {
            if (std::find(current.subset.begin(), current.subset.end(), j) != current.subset.end()) {
                continue;
            }
            Subset child = current.subset;
            child.insert(std::lower_bound(child.begin(), child.end(), j), j);
            if (!visited.insert(child).second) continue;
            const double m = cache.merit(child);
            const auto names = name_key(child);
            if (m > best_merit || (m == best_merit && names < best_names)) {
                if (m > best_merit) improved = true;
                best_merit = m;
                best_subset = child;
                best_names = names;
            }
            open.insert({m, names, std::move(child)});
        }
        stall = improved ? 0 : stall + 1;
    }

    FeatureSubset out;
    out.feature_names = best_names;
    out.merit = best_merit;
    return out;
}

}  // namespace jcat
