#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "jcat/errors.hpp"
#include "jcat/random.hpp"

namespace jcat {

using Matrix = std::vector<std::vector<double>>;

enum class SplitMode { Best, RandomThreshold };

struct TreeParams {
    std::size_t max_depth = std::numeric_limits<std::size_t>::max();
    std::size_t min_samples_leaf = 1;
    std::size_t feature_subsample = 0;  // 0 = consider all features
    SplitMode split_mode = SplitMode::Best;
    std::uint64_t seed = 0;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> distribution;        // classification leaf
    double value = 0.0;                      // regression leaf
    std::vector<std::size_t> sample_indices; // regression leaf: training rows
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    std::size_t n_classes = 0;
    std::vector<double> feature_importance;  // raw impurity decrease per feature

    std::size_t leaf_for(const std::vector<double>& x) const {
        std::size_t i = 0;
        while (nodes[i].feature >= 0) {
            i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <=
                                                 nodes[i].threshold
                                             ? nodes[i].left
                                             : nodes[i].right);
        }
        return i;
    }

    const std::vector<double>& predict_proba_row(const std::vector<double>& x) const {
        return nodes[leaf_for(x)].distribution;
    }

    int predict_class_row(const std::vector<double>& x) const {
        const auto& dist = predict_proba_row(x);
        std::size_t best = 0;
        for (std::size_t c = 1; c < dist.size(); ++c) {
            if (dist[c] > dist[best]) best = c;
        }
        return static_cast<int>(best);
    }

    double predict_value_row(const std::vector<double>& x) const {
        return nodes[leaf_for(x)].value;
    }

    std::size_t depth() const { return depth_below(0); }

private:
    std::size_t depth_below(std::size_t i) const {
        if (nodes[i].feature < 0) return 0;
        return 1 + std::max(depth_below(static_cast<std::size_t>(nodes[i].left)),
                            depth_below(static_cast<std::size_t>(nodes[i].right)));
    }
};

namespace detail {

inline double gini_from_counts(const std::vector<double>& counts, double total) {
    if (total <= 0.0) return 0.0;
    double s = 0.0;
    for (const double c : counts) {
        const double f = c / total;
        s += f * f;
    }
    return 1.0 - s;
}

struct SplitChoice {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = -1.0;
};

// Candidate features for one node, in ascending order so tie-breaks are by
// lowest feature index.
inline std::vector<std::size_t> node_features(std::size_t p, std::size_t subsample, Rng& rng) {
    if (subsample == 0 || subsample >= p) {
        std::vector<std::size_t> all(p);
        std::iota(all.begin(), all.end(), 0);
        return all;
    }
    auto picked = rng.sample_without_replacement(p, subsample);
    std::sort(picked.begin(), picked.end());
    return picked;
}

struct CartBuilder {
    const Matrix& X;
    const std::vector<int>& y;
    const std::vector<double>& w;
    std::size_t n_classes;
    const TreeParams& params;
    Rng rng;
    DecisionTree tree;
    double root_weight = 0.0;

    CartBuilder(const Matrix& X_, const std::vector<int>& y_, const std::vector<double>& w_,
                std::size_t n_classes_, const TreeParams& params_)
        : X(X_), y(y_), w(w_), n_classes(n_classes_), params(params_),
          rng(mix_seed(params_.seed, 0x74726565ULL)) {
        tree.n_classes = n_classes;
        tree.feature_importance.assign(X.empty() ? 0 : X[0].size(), 0.0);
    }

    std::vector<double> class_weights(const std::vector<std::size_t>& idx) const {
        std::vector<double> counts(n_classes, 0.0);
        for (const std::size_t i : idx) counts[static_cast<std::size_t>(y[i])] += w[i];
        return counts;
    }

    int make_leaf(const std::vector<std::size_t>& idx, const std::vector<double>& counts,
                  double total) {
        TreeNode node;
        node.distribution.assign(n_classes, 0.0);
        if (total > 0.0) {
            for (std::size_t c = 0; c < n_classes; ++c) node.distribution[c] = counts[c] / total;
        } else {
            // all-zero weights: fall back to unweighted frequencies
            for (const std::size_t i : idx) {
                node.distribution[static_cast<std::size_t>(y[i])] += 1.0;
            }
            for (double& v : node.distribution) v /= static_cast<double>(idx.size());
        }
        tree.nodes.push_back(std::move(node));
        return static_cast<int>(tree.nodes.size() - 1);
    }

    SplitChoice best_split(const std::vector<std::size_t>& idx, const std::vector<double>& counts,
                           double total) {
        SplitChoice best;
        const double parent_gini = gini_from_counts(counts, total);
        const auto features = node_features(tree.feature_importance.size(),
                                            params.feature_subsample, rng);

        std::vector<std::size_t> order(idx);
        std::vector<double> left_counts(n_classes);
        for (const std::size_t f : features) {
            if (params.split_mode == SplitMode::RandomThreshold) {
                double lo = std::numeric_limits<double>::infinity();
                double hi = -std::numeric_limits<double>::infinity();
                for (const std::size_t i : idx) {
                    lo = std::min(lo, X[i][f]);
                    hi = std::max(hi, X[i][f]);
                }
                if (!(hi > lo)) continue;
                const double thr = rng.uniform_range(lo, hi);
                std::fill(left_counts.begin(), left_counts.end(), 0.0);
                double left_total = 0.0;
                std::size_t left_n = 0;
                for (const std::size_t i : idx) {
                    if (X[i][f] <= thr) {
                        left_counts[static_cast<std::size_t>(y[i])] += w[i];
                        left_total += w[i];
                        ++left_n;
                    }
                }
                const std::size_t right_n = idx.size() - left_n;
                if (left_n < params.min_samples_leaf || right_n < params.min_samples_leaf) continue;
                std::vector<double> right_counts(n_classes);
                for (std::size_t c = 0; c < n_classes; ++c) right_counts[c] = counts[c] - left_counts[c];
                const double right_total = total - left_total;
                const double gain =
                    parent_gini - (total > 0.0
                                       ? (left_total / total) * gini_from_counts(left_counts, left_total) +
                                             (right_total / total) * gini_from_counts(right_counts, right_total)
                                       : 0.0);
                if (gain > best.gain) {
                    best = {true, f, thr, gain};
                }
                continue;
            }

            // Exhaustive scan: sort node rows by this feature, sweep split
            // positions between distinct consecutive values. Features ascend
            // and thresholds ascend within a feature, so keeping the first
            // best candidate realizes the lowest-feature, lowest-threshold
            // tie-break.
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return X[a][f] < X[b][f] || (X[a][f] == X[b][f] && a < b);
            });
            std::fill(left_counts.begin(), left_counts.end(), 0.0);
            double left_total = 0.0;
            for (std::size_t pos = 0; pos + 1 < order.size(); ++pos) {
                const std::size_t i = order[pos];
                left_counts[static_cast<std::size_t>(y[i])] += w[i];
                left_total += w[i];
                const double v = X[i][f];
                const double v_next = X[order[pos + 1]][f];
                if (v == v_next) continue;
                const std::size_t left_n = pos + 1;
                const std::size_t right_n = order.size() - left_n;
                if (left_n < params.min_samples_leaf || right_n < params.min_samples_leaf) continue;
                std::vector<double> right_counts(n_classes);
                for (std::size_t c = 0; c < n_classes; ++c) right_counts[c] = counts[c] - left_counts[c];
                const double right_total = total - left_total;
                const double gain =
                    parent_gini - (total > 0.0
                                       ? (left_total / total) * gini_from_counts(left_counts, left_total) +
                                             (right_total / total) * gini_from_counts(right_counts, right_total)
                                       : 0.0);
                const double thr = v + 0.5 * (v_next - v);
                if (gain > best.gain + 1e-15) {
                    best = {true, f, thr, gain};
                }
            }
        }
        return best;
    }

    int build(std::vector<std::size_t> idx, std::size_t depth) {
        const auto counts = class_weights(idx);
        const double total = std::accumulate(counts.begin(), counts.end(), 0.0);

        bool pure = true;
        for (std::size_t i = 1; i < idx.size(); ++i) {
            if (y[idx[i]] != y[idx[0]]) {
                pure = false;
                break;
            }
        }
        if (pure || depth >= params.max_depth || idx.size() < 2 * params.min_samples_leaf) {
            return make_leaf(idx, counts, total);
        }
        const SplitChoice split = best_split(idx, counts, total);
        if (!split.found) return make_leaf(idx, counts, total);

        std::vector<std::size_t> left_idx, right_idx;
        for (const std::size_t i : idx) {
            (X[i][split.feature] <= split.threshold ? left_idx : right_idx).push_back(i);
        }
        if (left_idx.empty() || right_idx.empty()) return make_leaf(idx, counts, total);

        if (root_weight > 0.0) {
            tree.feature_importance[split.feature] += (total / root_weight) * split.gain;
        }
        TreeNode node;
        node.feature = static_cast<int>(split.feature);
        node.threshold = split.threshold;
        tree.nodes.push_back(node);
        const int self = static_cast<int>(tree.nodes.size() - 1);
        const int l = build(std::move(left_idx), depth + 1);
        const int r = build(std::move(right_idx), depth + 1);
        tree.nodes[static_cast<std::size_t>(self)].left = l;
        tree.nodes[static_cast<std::size_t>(self)].right = r;
        return self;
    }
};

}  // namespace detail

// Greedy weighted-Gini CART on the given sample indices (duplicates allowed,
// for bootstrap resamples). Ties between equal-gain splits go to the lowest
// feature index, then the lowest threshold.
inline DecisionTree build_cart_tree_on(const Matrix& X, const std::vector<int>& y,
                                       const std::vector<double>& weights,
                                       std::vector<std::size_t> indices, std::size_t n_classes,
                                       const TreeParams& params) {
    if (X.empty() || indices.empty()) throw EmptyDataError("cannot build a tree on empty data");
    detail::CartBuilder builder(X, y, weights, n_classes, params);
    double root_w = 0.0;
    for (const std::size_t i : indices) root_w += weights[i];
    builder.root_weight = root_w;
    builder.build(std::move(indices), 0);
    return std::move(builder.tree);
}

inline DecisionTree build_cart_tree(const Matrix& X, const std::vector<int>& y,
                                    const std::vector<double>& weights, std::size_t n_classes,
                                    const TreeParams& params) {
    std::vector<std::size_t> idx(X.size());
    std::iota(idx.begin(), idx.end(), 0);
    return build_cart_tree_on(X, y, weights, std::move(idx), n_classes, params);
}

namespace detail {

struct RegressionBuilder {
    const Matrix& X;
    const std::vector<double>& target;
    const TreeParams& params;
    DecisionTree tree;

    RegressionBuilder(const Matrix& X_, const std::vector<double>& t_, const TreeParams& params_)
        : X(X_), target(t_), params(params_) {}

    int make_leaf(std::vector<std::size_t> idx) {
        TreeNode node;
        double sum = 0.0;
        for (const std::size_t i : idx) sum += target[i];
        node.value = sum / static_cast<double>(idx.size());
        node.sample_indices = std::move(idx);
        tree.nodes.push_back(std::move(node));
        return static_cast<int>(tree.nodes.size() - 1);
    }

    int build(std::vector<std::size_t> idx, std::size_t depth) {
        if (depth >= params.max_depth || idx.size() < 2 * params.min_samples_leaf) {
            return make_leaf(std::move(idx));
        }
        // Best split by squared-error reduction; sweep like the Gini scan.
        double sum = 0.0, sum2 = 0.0;
        for (const std::size_t i : idx) {
            sum += target[i];
            sum2 += target[i] * target[i];
        }
        const double n = static_cast<double>(idx.size());
        const double parent_sse = sum2 - sum * sum / n;
        if (parent_sse <= 1e-12) return make_leaf(std::move(idx));

        const std::size_t p = X[0].size();
        bool found = false;
        double best_gain = -1.0;
        std::size_t best_f = 0;
        double best_thr = 0.0;
        std::vector<std::size_t> order(idx);
        for (std::size_t f = 0; f < p; ++f) {
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return X[a][f] < X[b][f] || (X[a][f] == X[b][f] && a < b);
            });
            double lsum = 0.0, lsum2 = 0.0;
            for (std::size_t pos = 0; pos + 1 < order.size(); ++pos) {
                const std::size_t i = order[pos];
                lsum += target[i];
                lsum2 += target[i] * target[i];
                const double v = X[i][f];
                const double v_next = X[order[pos + 1]][f];
                if (v == v_next) continue;
                const std::size_t left_n = pos + 1;
                const std::size_t right_n = order.size() - left_n;
                if (left_n < params.min_samples_leaf || right_n < params.min_samples_leaf) continue;
                const double rsum = sum - lsum, rsum2 = sum2 - lsum2;
                const double sse = (lsum2 - lsum * lsum / static_cast<double>(left_n)) +
                                   (rsum2 - rsum * rsum / static_cast<double>(right_n));
                const double gain = parent_sse - sse;
                const double thr = v + 0.5 * (v_next - v);
                if (gain > best_gain + 1e-15) {
                    found = true;
                    best_gain = gain;
                    best_f = f;
                    best_thr = thr;
                }
            }
        }
        if (!found || best_gain <= 0.0) return make_leaf(std::move(idx));

        std::vector<std::size_t> left_idx, right_idx;
        for (const std::size_t i : idx) {
            (X[i][best_f] <= best_thr ? left_idx : right_idx).push_back(i);
        }
        TreeNode node;
        node.feature = static_cast<int>(best_f);
        node.threshold = best_thr;
        tree.nodes.push_back(node);
        const int self = static_cast<int>(tree.nodes.size() - 1);
        const int l = build(std::move(left_idx), depth + 1);
        const int r = build(std::move(right_idx), depth + 1);
        tree.nodes[static_cast<std::size_t>(self)].left = l;
        tree.nodes[static_cast<std::size_t>(self)].right = r;
        return self;
    }
};

}  // namespace detail

// Regression tree on squared error. Leaves keep their training row indices
// so boosting can replace leaf values with its own step estimates.
inline DecisionTree build_regression_tree(const Matrix& X, const std::vector<double>& target,
                                          const TreeParams& params) {
    if (X.empty()) throw EmptyDataError("cannot build a tree on empty data");
    detail::RegressionBuilder builder(X, target, params);
    std::vector<std::size_t> idx(X.size());
    std::iota(idx.begin(), idx.end(), 0);
    builder.build(std::move(idx), 0);
    return std::move(builder.tree);
}

}  // namespace jcat
