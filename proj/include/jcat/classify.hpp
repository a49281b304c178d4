#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "jcat/errors.hpp"
#include "jcat/preprocess.hpp"
#include "jcat/random.hpp"
#include "jcat/tree.hpp"

namespace jcat {

enum class ClassifierKind { Nb, Knn, Mlp, Cart, Bagging, Rf, Etc, AdaBoost, Gbm };

inline std::string classifier_kind_name(ClassifierKind k) {
    switch (k) {
        case ClassifierKind::Nb: return "nb";
        case ClassifierKind::Knn: return "knn";
        case ClassifierKind::Mlp: return "mlp";
        case ClassifierKind::Cart: return "cart";
        case ClassifierKind::Bagging: return "bagging";
        case ClassifierKind::Rf: return "rf";
        case ClassifierKind::Etc: return "etc";
        case ClassifierKind::AdaBoost: return "adaboost";
        case ClassifierKind::Gbm: return "gbm";
    }
    return "?";
}

inline ClassifierKind classifier_kind_from_name(const std::string& s) {
    if (s == "nb") return ClassifierKind::Nb;
    if (s == "knn") return ClassifierKind::Knn;
    if (s == "mlp") return ClassifierKind::Mlp;
    if (s == "cart") return ClassifierKind::Cart;
    if (s == "bagging") return ClassifierKind::Bagging;
    if (s == "rf") return ClassifierKind::Rf;
    if (s == "etc") return ClassifierKind::Etc;
    if (s == "adaboost") return ClassifierKind::AdaBoost;
    if (s == "gbm") return ClassifierKind::Gbm;
    throw ConfigError("unknown classifier kind \"" + s + "\"");
}

struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::Rf;
    std::uint64_t seed = 0;

    std::size_t knn_k = 5;
    std::size_t mlp_hidden = 64;
    double mlp_learning_rate = 0.01;
    std::size_t mlp_epochs = 200;
    std::size_t mlp_batch = 32;
    std::size_t n_trees = 100;
    std::size_t cart_max_depth = std::numeric_limits<std::size_t>::max();
    std::size_t min_samples_leaf = 1;
    std::size_t adaboost_rounds = 50;
    std::size_t gbm_rounds = 100;
    std::size_t gbm_depth = 3;
    double gbm_learning_rate = 0.1;
    double nb_variance_floor = 1e-9;

    void validate() const {
        if (n_trees < 1) throw ConfigError("n_trees must be >= 1");
        if (knn_k < 1) throw ConfigError("knn_k must be >= 1");
        if (mlp_hidden < 1) throw ConfigError("mlp_hidden must be >= 1");
        if (mlp_learning_rate <= 0.0) throw ConfigError("mlp_learning_rate must be > 0");
        if (mlp_batch < 1) throw ConfigError("mlp_batch must be >= 1");
        if (adaboost_rounds < 1) throw ConfigError("adaboost_rounds must be >= 1");
        if (gbm_rounds < 1) throw ConfigError("gbm_rounds must be >= 1");
        if (gbm_learning_rate < 0.0) throw ConfigError("gbm_learning_rate must be >= 0");
        if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
        if (nb_variance_floor <= 0.0) throw ConfigError("nb_variance_floor must be > 0");
    }
};

// One-hidden-layer network with rectifier units and a softmax head. Exposed
// as its own struct so the gradient computation can be checked against
// finite differences.
struct MlpNetwork {
    Matrix w1;  // hidden x in
    std::vector<double> b1;
    Matrix w2;  // out x hidden
    std::vector<double> b2;

    std::size_t n_in() const { return w1.empty() ? 0 : w1[0].size(); }
    std::size_t n_hidden() const { return w1.size(); }
    std::size_t n_out() const { return w2.size(); }

    std::vector<double> forward(const std::vector<double>& x) const {
        std::vector<double> a1(n_hidden());
        for (std::size_t h = 0; h < n_hidden(); ++h) {
            double z = b1[h];
            for (std::size_t j = 0; j < n_in(); ++j) z += w1[h][j] * x[j];
            a1[h] = z > 0.0 ? z : 0.0;
        }
        std::vector<double> logits(n_out());
        for (std::size_t c = 0; c < n_out(); ++c) {
            double z = b2[c];
            for (std::size_t h = 0; h < n_hidden(); ++h) z += w2[c][h] * a1[h];
            logits[c] = z;
        }
        return softmax(logits);
    }

    static std::vector<double> softmax(const std::vector<double>& logits) {
        const double m = *std::max_element(logits.begin(), logits.end());
        std::vector<double> p(logits.size());
        double sum = 0.0;
        for (std::size_t c = 0; c < logits.size(); ++c) {
            p[c] = std::exp(logits[c] - m);
            sum += p[c];
        }
        for (double& v : p) v /= sum;
        return p;
    }

    // Mean softmax cross-entropy over the batch.
    double batch_loss(const Matrix& X, const std::vector<int>& y) const {
        double loss = 0.0;
        for (std::size_t i = 0; i < X.size(); ++i) {
            const auto p = forward(X[i]);
            loss -= std::log(std::max(p[static_cast<std::size_t>(y[i])], 1e-300));
        }
        return loss / static_cast<double>(X.size());
    }

    struct Gradients {
        Matrix w1;
        std::vector<double> b1;
        Matrix w2;
        std::vector<double> b2;
    };

    Gradients batch_gradients(const Matrix& X, const std::vector<int>& y) const {
        Gradients g;
        g.w1.assign(n_hidden(), std::vector<double>(n_in(), 0.0));
        g.b1.assign(n_hidden(), 0.0);
        g.w2.assign(n_out(), std::vector<double>(n_hidden(), 0.0));
        g.b2.assign(n_out(), 0.0);
        std::vector<double> z1(n_hidden()), a1(n_hidden()), logits(n_out());
        for (std::size_t i = 0; i < X.size(); ++i) {
            const auto& x = X[i];
            for (std::size_t h = 0; h < n_hidden(); ++h) {
                double z = b1[h];
                for (std::size_t j = 0; j < n_in(); ++j) z += w1[h][j] * x[j];
                z1[h] = z;
                a1[h] = z > 0.0 ? z : 0.0;
            }
            for (std::size_t c = 0; c < n_out(); ++c) {
                double z = b2[c];
                for (std::size_t h = 0; h < n_hidden(); ++h) z += w2[c][h] * a1[h];
                logits[c] = z;
            }
            const auto p = softmax(logits);
            for (std::size_t c = 0; c < n_out(); ++c) {
                const double dz2 = p[c] - (static_cast<int>(c) == y[i] ? 1.0 : 0.0);
                g.b2[c] += dz2;
                for (std::size_t h = 0; h < n_hidden(); ++h) g.w2[c][h] += dz2 * a1[h];
            }
            for (std::size_t h = 0; h < n_hidden(); ++h) {
                if (z1[h] <= 0.0) continue;
                double da1 = 0.0;
                for (std::size_t c = 0; c < n_out(); ++c) {
                    da1 += w2[c][h] * (p[c] - (static_cast<int>(c) == y[i] ? 1.0 : 0.0));
                }
                g.b1[h] += da1;
                for (std::size_t j = 0; j < n_in(); ++j) g.w1[h][j] += da1 * x[j];
            }
        }
        const double inv = 1.0 / static_cast<double>(X.size());
        for (auto& row : g.w1) {
            for (double& v : row) v *= inv;
        }
        for (double& v : g.b1) v *= inv;
        for (auto& row : g.w2) {
            for (double& v : row) v *= inv;
        }
        for (double& v : g.b2) v *= inv;
        return g;
    }
};

// Immutable fitted classifier. Internal labels are 0..C-1 indices into
// class_labels, which holds the original labels sorted ascending.
struct TrainedModel {
    ClassifierKind kind = ClassifierKind::Rf;
    ClassifierSpec spec;
    std::vector<int> class_labels;
    std::vector<std::string> label_names;  // display names aligned with class_labels
    std::vector<std::string> feature_names;

    // nb
    std::vector<double> nb_log_prior;
    Matrix nb_mean, nb_var;  // class x feature
    // knn
    Matrix knn_X;
    std::vector<int> knn_y;
    // mlp
    MlpNetwork mlp;
    // cart / ensembles
    std::vector<DecisionTree> trees;
    std::vector<double> tree_weights;  // adaboost round weights
    // gbm
    std::vector<double> gbm_base_score;
    std::vector<std::vector<DecisionTree>> gbm_trees;  // [round][class]
    std::vector<double> gbm_log_loss;                  // trace: before rounds, then per round
    // adaboost diagnostic trace: post-normalization weight sums per round
    std::vector<double> adaboost_weight_sums;
    std::vector<double> class_prior;  // fallback and gbm init

    std::size_t n_classes() const { return class_labels.size(); }
};

namespace detail {

inline std::vector<int> to_internal_labels(const std::vector<int>& y, std::vector<int>& class_labels) {
    class_labels = y;
    std::sort(class_labels.begin(), class_labels.end());
    class_labels.erase(std::unique(class_labels.begin(), class_labels.end()), class_labels.end());
    std::vector<int> internal(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        internal[i] = static_cast<int>(
            std::lower_bound(class_labels.begin(), class_labels.end(), y[i]) - class_labels.begin());
    }
    return internal;
}

inline std::size_t argmax_lowest(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

inline std::vector<double> class_priors(const std::vector<int>& internal, std::size_t C) {
    std::vector<double> prior(C, 0.0);
    for (const int c : internal) prior[static_cast<std::size_t>(c)] += 1.0;
    for (double& p : prior) p /= static_cast<double>(internal.size());
    return prior;
}

inline void train_nb(TrainedModel& m, const Matrix& X, const std::vector<int>& yi) {
    const std::size_t C = m.n_classes(), p = X[0].size();
    m.nb_mean.assign(C, std::vector<double>(p, 0.0));
    m.nb_var.assign(C, std::vector<double>(p, 0.0));
    m.nb_log_prior.assign(C, 0.0);
    std::vector<double> count(C, 0.0);
    for (std::size_t i = 0; i < X.size(); ++i) {
        const auto c = static_cast<std::size_t>(yi[i]);
        count[c] += 1.0;
        for (std::size_t j = 0; j < p; ++j) m.nb_mean[c][j] += X[i][j];
    }
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t j = 0; j < p; ++j) m.nb_mean[c][j] /= count[c];
        m.nb_log_prior[c] = std::log(count[c] / static_cast<double>(X.size()));
    }
    for (std::size_t i = 0; i < X.size(); ++i) {
        const auto c = static_cast<std::size_t>(yi[i]);
        for (std::size_t j = 0; j < p; ++j) {
            const double d = X[i][j] - m.nb_mean[c][j];
            m.nb_var[c][j] += d * d;
        }
    }
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t j = 0; j < p; ++j) {
            m.nb_var[c][j] = std::max(m.nb_var[c][j] / count[c], m.spec.nb_variance_floor);
        }
    }
}

inline void train_mlp(TrainedModel& m, const Matrix& X, const std::vector<int>& yi) {
    const std::size_t C = m.n_classes(), p = X[0].size(), H = m.spec.mlp_hidden;
    Rng init_rng(mix_seed(m.spec.seed, 0x6d6c7031ULL));
    m.mlp.w1.assign(H, std::vector<double>(p));
    m.mlp.b1.assign(H, 0.0);
    m.mlp.w2.assign(C, std::vector<double>(H));
    m.mlp.b2.assign(C, 0.0);
    const double s1 = std::sqrt(2.0 / static_cast<double>(p));
    const double s2 = std::sqrt(2.0 / static_cast<double>(H));
    for (auto& row : m.mlp.w1) {
        for (double& v : row) v = init_rng.normal(0.0, s1);
    }
    for (auto& row : m.mlp.w2) {
        for (double& v : row) v = init_rng.normal(0.0, s2);
    }

    Rng shuffle_rng(mix_seed(m.spec.seed, 0x6d6c7032ULL));
    std::vector<std::size_t> order(X.size());
    std::iota(order.begin(), order.end(), 0);
    Matrix bx;
    std::vector<int> by;
    for (std::size_t epoch = 0; epoch < m.spec.mlp_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += m.spec.mlp_batch) {
            const std::size_t end = std::min(order.size(), start + m.spec.mlp_batch);
            bx.clear();
            by.clear();
            for (std::size_t i = start; i < end; ++i) {
                bx.push_back(X[order[i]]);
                by.push_back(yi[order[i]]);
            }
            const auto g = m.mlp.batch_gradients(bx, by);
            const double lr = m.spec.mlp_learning_rate;
            for (std::size_t h = 0; h < H; ++h) {
                for (std::size_t j = 0; j < p; ++j) m.mlp.w1[h][j] -= lr * g.w1[h][j];
                m.mlp.b1[h] -= lr * g.b1[h];
            }
            for (std::size_t c = 0; c < C; ++c) {
                for (std::size_t h = 0; h < H; ++h) m.mlp.w2[c][h] -= lr * g.w2[c][h];
                m.mlp.b2[c] -= lr * g.b2[c];
            }
        }
    }
}

inline void train_tree_ensemble(TrainedModel& m, const Matrix& X, const std::vector<int>& yi) {
    const std::size_t n = X.size(), p = X[0].size(), C = m.n_classes();
    const std::vector<double> unit_weights(n, 1.0);
    const std::size_t sqrt_p = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(p))));

    TreeParams tp;
    tp.min_samples_leaf = m.spec.min_samples_leaf;
    switch (m.kind) {
        case ClassifierKind::Cart:
            tp.max_depth = m.spec.cart_max_depth;
            tp.seed = mix_seed(m.spec.seed, 0);
            m.trees.push_back(build_cart_tree(X, yi, unit_weights, C, tp));
            return;
        case ClassifierKind::Bagging:
            break;
        case ClassifierKind::Rf:
            tp.feature_subsample = sqrt_p;
            break;
        case ClassifierKind::Etc:
            tp.feature_subsample = sqrt_p;
            tp.split_mode = SplitMode::RandomThreshold;
            break;
        default:
            throw Error("train_tree_ensemble: unexpected kind");
    }
    for (std::size_t t = 0; t < m.spec.n_trees; ++t) {
        tp.seed = mix_seed(m.spec.seed, t, 2);
        std::vector<std::size_t> idx;
        if (m.kind == ClassifierKind::Etc) {
            idx.resize(n);
            std::iota(idx.begin(), idx.end(), 0);
        } else {
            Rng boot(mix_seed(m.spec.seed, t, 1));
            idx.reserve(n);
            for (std::size_t i = 0; i < n; ++i) idx.push_back(boot.uniform_index(n));
        }
        m.trees.push_back(build_cart_tree_on(X, yi, unit_weights, std::move(idx), C, tp));
    }
}

// SAMME with depth-1 stumps. A round whose weighted error reaches 1 - 1/C
// is rejected and boosting stops there.
inline void train_adaboost(TrainedModel& m, const Matrix& X, const std::vector<int>& yi) {
    const std::size_t n = X.size(), C = m.n_classes();
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    TreeParams tp;
    tp.max_depth = 1;
    tp.min_samples_leaf = 1;
    for (std::size_t round = 0; round < m.spec.adaboost_rounds; ++round) {
        tp.seed = mix_seed(m.spec.seed, round, 3);
        DecisionTree stump = build_cart_tree(X, yi, w, C, tp);
        double err = 0.0;
        std::vector<int> pred(n);
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] = stump.predict_class_row(X[i]);
            if (pred[i] != yi[i]) err += w[i];
        }
        const double reject_at = 1.0 - 1.0 / static_cast<double>(C);
        if (err >= reject_at) break;
        const bool perfect = err <= 0.0;
        const double e = std::max(err, 1e-12);
        const double alpha = std::log((1.0 - e) / e) + std::log(static_cast<double>(C) - 1.0);
        m.trees.push_back(std::move(stump));
        m.tree_weights.push_back(alpha);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (pred[i] != yi[i]) w[i] *= std::exp(alpha);
            sum += w[i];
        }
        for (double& v : w) v /= sum;
        double check = 0.0;
        for (const double v : w) check += v;
        m.adaboost_weight_sums.push_back(check);
        if (perfect) break;
    }
}

inline std::vector<double> gbm_scores(const TrainedModel& m, const std::vector<double>& x) {
    std::vector<double> F = m.gbm_base_score;
    for (const auto& round : m.gbm_trees) {
        for (std::size_t c = 0; c < F.size(); ++c) F[c] += round[c].predict_value_row(x);
    }
    return F;
}

// Softmax gradient boosting with shrinkage-scaled Newton leaf steps baked
// into the stored leaf values. With learning rate 0 the model reduces to the
// class-prior argmax.
inline void train_gbm(TrainedModel& m, const Matrix& X, const std::vector<int>& yi) {
    const std::size_t n = X.size(), C = m.n_classes();
    m.gbm_base_score.assign(C, 0.0);
    for (std::size_t c = 0; c < C; ++c) m.gbm_base_score[c] = std::log(m.class_prior[c]);

    Matrix F(n, m.gbm_base_score);
    auto log_loss = [&]() {
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto p = MlpNetwork::softmax(F[i]);
            loss -= std::log(std::max(p[static_cast<std::size_t>(yi[i])], 1e-300));
        }
        return loss / static_cast<double>(n);
    };
    m.gbm_log_loss.push_back(log_loss());

    TreeParams tp;
    tp.max_depth = m.spec.gbm_depth;
    tp.min_samples_leaf = 1;
    const double kfac = (static_cast<double>(C) - 1.0) / static_cast<double>(C);
    std::vector<double> residual(n);
    for (std::size_t round = 0; round < m.spec.gbm_rounds; ++round) {
        std::vector<DecisionTree> round_trees;
        round_trees.reserve(C);
        Matrix P(n);
        for (std::size_t i = 0; i < n; ++i) P[i] = MlpNetwork::softmax(F[i]);
        for (std::size_t c = 0; c < C; ++c) {
            for (std::size_t i = 0; i < n; ++i) {
                residual[i] = (static_cast<std::size_t>(yi[i]) == c ? 1.0 : 0.0) - P[i][c];
            }
            DecisionTree tree = build_regression_tree(X, residual, tp);
            for (auto& node : tree.nodes) {
                if (node.feature >= 0) continue;
                double num = 0.0, den = 0.0;
                for (const std::size_t i : node.sample_indices) {
                    num += residual[i];
                    den += std::abs(residual[i]) * (1.0 - std::abs(residual[i]));
                }
                double gamma = kfac * num / std::max(den, 1e-12);
                gamma = std::clamp(gamma, -10.0, 10.0);
                node.value = m.spec.gbm_learning_rate * gamma;
                node.sample_indices.clear();  // only needed during fitting
            }
            for (std::size_t i = 0; i < n; ++i) F[i][c] += tree.predict_value_row(X[i]);
            round_trees.push_back(std::move(tree));
        }
        m.gbm_trees.push_back(std::move(round_trees));
        m.gbm_log_loss.push_back(log_loss());
    }
}

}  // namespace detail

inline TrainedModel train(const ClassifierSpec& spec, const FeatureMatrix& X,
                          const std::vector<int>& y) {
    spec.validate();
    if (X.n_rows() != y.size()) {
        throw LengthMismatchError("train: " + std::to_string(y.size()) + " labels for " +
                                  std::to_string(X.n_rows()) + " rows");
    }
    if (X.n_rows() < 2) throw DegenerateDataError("train needs at least 2 rows");

    TrainedModel m;
    m.kind = spec.kind;
    m.spec = spec;
    m.feature_names = X.feature_names;
    if (m.feature_names.empty() && !X.values.empty()) {
        for (std::size_t j = 0; j < X.values[0].size(); ++j) {
            m.feature_names.push_back("f" + std::to_string(j));
        }
    }
    const std::vector<int> yi = detail::to_internal_labels(y, m.class_labels);
    if (m.class_labels.size() < 2) throw SingleClassError("train needs at least 2 classes");
    for (const int l : m.class_labels) m.label_names.push_back(std::to_string(l));
    m.class_prior = detail::class_priors(yi, m.n_classes());

    const Matrix& XV = X.values;
    switch (spec.kind) {
        case ClassifierKind::Nb:
            detail::train_nb(m, XV, yi);
            break;
        case ClassifierKind::Knn:
            if (spec.knn_k > X.n_rows()) {
                throw DegenerateDataError("knn: k=" + std::to_string(spec.knn_k) +
                                          " exceeds training size " + std::to_string(X.n_rows()));
            }
            m.knn_X = XV;
            m.knn_y = yi;
            break;
        case ClassifierKind::Mlp:
            detail::train_mlp(m, XV, yi);
            break;
        case ClassifierKind::Cart:
        case ClassifierKind::Bagging:
        case ClassifierKind::Rf:
        case ClassifierKind::Etc:
            detail::train_tree_ensemble(m, XV, yi);
            break;
        case ClassifierKind::AdaBoost:
            detail::train_adaboost(m, XV, yi);
            break;
        case ClassifierKind::Gbm:
            detail::train_gbm(m, XV, yi);
            break;
    }
    return m;
}

// Per-row class distribution over model.class_labels; rows sum to 1.
inline Matrix predict_proba(const TrainedModel& m, const Matrix& X) {
    const std::size_t C = m.n_classes();
    if (!X.empty() && !m.feature_names.empty() && X[0].size() != m.feature_names.size()) {
        throw ArityMismatchError("predict: input arity " + std::to_string(X[0].size()) +
                                 " does not match training arity " +
                                 std::to_string(m.feature_names.size()));
    }
    Matrix out;
    out.reserve(X.size());
    for (const auto& x : X) {
        std::vector<double> p(C, 0.0);
        switch (m.kind) {
            case ClassifierKind::Nb: {
                std::vector<double> lp(C);
                for (std::size_t c = 0; c < C; ++c) {
                    double v = m.nb_log_prior[c];
                    for (std::size_t j = 0; j < x.size(); ++j) {
                        const double var = m.nb_var[c][j];
                        const double d = x[j] - m.nb_mean[c][j];
                        v += -0.5 * std::log(2.0 * 3.141592653589793238462643383279 * var) -
                             d * d / (2.0 * var);
                    }
                    lp[c] = v;
                }
                p = MlpNetwork::softmax(lp);
                break;
            }
            case ClassifierKind::Knn: {
                const std::size_t n = m.knn_X.size();
                std::vector<std::pair<double, std::size_t>> dist(n);
                for (std::size_t i = 0; i < n; ++i) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < x.size(); ++j) {
                        const double d = x[j] - m.knn_X[i][j];
                        s += d * d;
                    }
                    dist[i] = {s, i};
                }
                const std::size_t k = std::min(m.spec.knn_k, n);
                std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                                  dist.end());
                for (std::size_t i = 0; i < k; ++i) {
                    p[static_cast<std::size_t>(m.knn_y[dist[i].second])] += 1.0;
                }
                for (double& v : p) v /= static_cast<double>(k);
                break;
            }
            case ClassifierKind::Mlp:
                p = m.mlp.forward(x);
                break;
            case ClassifierKind::Cart:
                p = m.trees[0].predict_proba_row(x);
                break;
            case ClassifierKind::Bagging:
            case ClassifierKind::Rf:
            case ClassifierKind::Etc: {
                for (const auto& tree : m.trees) {
                    p[static_cast<std::size_t>(tree.predict_class_row(x))] += 1.0;
                }
                for (double& v : p) v /= static_cast<double>(m.trees.size());
                break;
            }
            case ClassifierKind::AdaBoost: {
                if (m.trees.empty()) {
                    p = m.class_prior;
                    break;
                }
                double total = 0.0;
                for (std::size_t t = 0; t < m.trees.size(); ++t) {
                    p[static_cast<std::size_t>(m.trees[t].predict_class_row(x))] += m.tree_weights[t];
                    total += m.tree_weights[t];
                }
                for (double& v : p) v /= total;
                break;
            }
            case ClassifierKind::Gbm:
                p = MlpNetwork::softmax(detail::gbm_scores(m, x));
                break;
        }
        out.push_back(std::move(p));
    }
    return out;
}

inline Matrix predict_proba(const TrainedModel& m, const FeatureMatrix& X) {
    return predict_proba(m, X.values);
}

// Argmax of predict_proba; ties go to the lowest class index.
inline std::vector<int> predict(const TrainedModel& m, const Matrix& X) {
    const Matrix proba = predict_proba(m, X);
    std::vector<int> out;
    out.reserve(proba.size());
    for (const auto& p : proba) out.push_back(m.class_labels[detail::argmax_lowest(p)]);
    return out;
}

inline std::vector<int> predict(const TrainedModel& m, const FeatureMatrix& X) {
    return predict(m, X.values);
}

// ---------------------------------------------------------------------------
// Model serialization (versioned JSON)
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json tree_to_json(const DecisionTree& t) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : t.nodes) {
        nlohmann::json jn;
        jn["f"] = n.feature;
        if (n.feature >= 0) {
            jn["t"] = n.threshold;
            jn["l"] = n.left;
            jn["r"] = n.right;
        } else if (!n.distribution.empty()) {
            jn["d"] = n.distribution;
        } else {
            jn["v"] = n.value;
        }
        nodes.push_back(std::move(jn));
    }
    return nlohmann::json{{"n_classes", t.n_classes}, {"nodes", std::move(nodes)}};
}

inline DecisionTree tree_from_json(const nlohmann::json& j) {
    DecisionTree t;
    t.n_classes = j.at("n_classes").get<std::size_t>();
    for (const auto& jn : j.at("nodes")) {
        TreeNode n;
        n.feature = jn.at("f").get<int>();
        if (n.feature >= 0) {
            n.threshold = jn.at("t").get<double>();
            n.left = jn.at("l").get<int>();
            n.right = jn.at("r").get<int>();
        } else if (jn.contains("d")) {
            n.distribution = jn.at("d").get<std::vector<double>>();
        } else {
            n.value = jn.at("v").get<double>();
        }
        t.nodes.push_back(std::move(n));
    }
    return t;
}

}  // namespace detail

inline nlohmann::json model_to_json(const TrainedModel& m) {
    nlohmann::json j;
    j["format"] = "jcat-model";
    j["format_version"] = 1;
    j["kind"] = classifier_kind_name(m.kind);
    j["seed"] = m.spec.seed;
    j["class_labels"] = m.class_labels;
    j["label_names"] = m.label_names;
    j["feature_names"] = m.feature_names;
    j["class_prior"] = m.class_prior;
    nlohmann::json hp;
    hp["knn_k"] = m.spec.knn_k;
    hp["mlp_hidden"] = m.spec.mlp_hidden;
    hp["mlp_learning_rate"] = m.spec.mlp_learning_rate;
    hp["mlp_epochs"] = m.spec.mlp_epochs;
    hp["mlp_batch"] = m.spec.mlp_batch;
    hp["n_trees"] = m.spec.n_trees;
    hp["min_samples_leaf"] = m.spec.min_samples_leaf;
    hp["adaboost_rounds"] = m.spec.adaboost_rounds;
    hp["gbm_rounds"] = m.spec.gbm_rounds;
    hp["gbm_depth"] = m.spec.gbm_depth;
    hp["gbm_learning_rate"] = m.spec.gbm_learning_rate;
    hp["nb_variance_floor"] = m.spec.nb_variance_floor;
    j["hyperparameters"] = std::move(hp);

    switch (m.kind) {
        case ClassifierKind::Nb:
            j["nb"] = {{"log_prior", m.nb_log_prior}, {"mean", m.nb_mean}, {"var", m.nb_var}};
            break;
        case ClassifierKind::Knn:
            j["knn"] = {{"X", m.knn_X}, {"y", m.knn_y}};
            break;
        case ClassifierKind::Mlp:
            j["mlp"] = {{"w1", m.mlp.w1}, {"b1", m.mlp.b1}, {"w2", m.mlp.w2}, {"b2", m.mlp.b2}};
            break;
        case ClassifierKind::Cart:
        case ClassifierKind::Bagging:
        case ClassifierKind::Rf:
        case ClassifierKind::Etc:
        case ClassifierKind::AdaBoost: {
            nlohmann::json trees = nlohmann::json::array();
            for (const auto& t : m.trees) trees.push_back(detail::tree_to_json(t));
            j["trees"] = std::move(trees);
            if (m.kind == ClassifierKind::AdaBoost) j["tree_weights"] = m.tree_weights;
            break;
        }
        case ClassifierKind::Gbm: {
            nlohmann::json rounds = nlohmann::json::array();
            for (const auto& round : m.gbm_trees) {
                nlohmann::json per_class = nlohmann::json::array();
                for (const auto& t : round) per_class.push_back(detail::tree_to_json(t));
                rounds.push_back(std::move(per_class));
            }
            j["gbm"] = {{"base_score", m.gbm_base_score}, {"rounds", std::move(rounds)}};
            break;
        }
    }
    return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "jcat-model" || j.value("format_version", 0) != 1) {
        throw Error("not a recognized model file");
    }
    TrainedModel m;
    m.kind = classifier_kind_from_name(j.at("kind").get<std::string>());
    m.spec.kind = m.kind;
    m.spec.seed = j.at("seed").get<std::uint64_t>();
    m.class_labels = j.at("class_labels").get<std::vector<int>>();
    m.label_names = j.at("label_names").get<std::vector<std::string>>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.class_prior = j.at("class_prior").get<std::vector<double>>();
    const auto& hp = j.at("hyperparameters");
    m.spec.knn_k = hp.at("knn_k").get<std::size_t>();
    m.spec.mlp_hidden = hp.at("mlp_hidden").get<std::size_t>();
    m.spec.mlp_learning_rate = hp.at("mlp_learning_rate").get<double>();
    m.spec.mlp_epochs = hp.at("mlp_epochs").get<std::size_t>();
    m.spec.mlp_batch = hp.at("mlp_batch").get<std::size_t>();
    m.spec.n_trees = hp.at("n_trees").get<std::size_t>();
    m.spec.min_samples_leaf = hp.at("min_samples_leaf").get<std::size_t>();
    m.spec.adaboost_rounds = hp.at("adaboost_rounds").get<std::size_t>();
    m.spec.gbm_rounds = hp.at("gbm_rounds").get<std::size_t>();
    m.spec.gbm_depth = hp.at("gbm_depth").get<std::size_t>();
    m.spec.gbm_learning_rate = hp.at("gbm_learning_rate").get<double>();
    m.spec.nb_variance_floor = hp.at("nb_variance_floor").get<double>();

    switch (m.kind) {
        case ClassifierKind::Nb:
            m.nb_log_prior = j.at("nb").at("log_prior").get<std::vector<double>>();
            m.nb_mean = j.at("nb").at("mean").get<Matrix>();
            m.nb_var = j.at("nb").at("var").get<Matrix>();
            break;
        case ClassifierKind::Knn:
            m.knn_X = j.at("knn").at("X").get<Matrix>();
            m.knn_y = j.at("knn").at("y").get<std::vector<int>>();
            break;
        case ClassifierKind::Mlp:
            m.mlp.w1 = j.at("mlp").at("w1").get<Matrix>();
            m.mlp.b1 = j.at("mlp").at("b1").get<std::vector<double>>();
            m.mlp.w2 = j.at("mlp").at("w2").get<Matrix>();
            m.mlp.b2 = j.at("mlp").at("b2").get<std::vector<double>>();
            break;
        case ClassifierKind::Cart:
        case ClassifierKind::Bagging:
        case ClassifierKind::Rf:
        case ClassifierKind::Etc:
        case ClassifierKind::AdaBoost:
            for (const auto& jt : j.at("trees")) m.trees.push_back(detail::tree_from_json(jt));
            if (m.kind == ClassifierKind::AdaBoost) {
                m.tree_weights = j.at("tree_weights").get<std::vector<double>>();
            }
            break;
        case ClassifierKind::Gbm:
            m.gbm_base_score = j.at("gbm").at("base_score").get<std::vector<double>>();
            for (const auto& round : j.at("gbm").at("rounds")) {
                std::vector<DecisionTree> per_class;
                for (const auto& jt : round) per_class.push_back(detail::tree_from_json(jt));
                m.gbm_trees.push_back(std::move(per_class));
            }
            break;
    }
    return m;
}

}  // namespace jcat
