#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "jcat/classify.hpp"
#include "jcat/errors.hpp"
#include "jcat/featsel.hpp"
#include "jcat/preprocess.hpp"
#include "jcat/random.hpp"

namespace jcat {

// ---------------------------------------------------------------------------
// Splits and folds
// ---------------------------------------------------------------------------

struct SplitResult {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::vector<std::string> warnings;
};

// Stratified shuffle split. Per-class train counts are round(ratio * n_c),
// clamped so both sides stay nonempty; a single-row class stays entirely in
// train and is reported as a warning.
inline SplitResult percentage_split(const std::vector<int>& y, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must be in (0,1)");
    if (y.size() < 2) throw InvalidSizeError("percentage_split needs at least 2 rows");
    int C = 0;
    for (const int l : y) C = std::max(C, l + 1);

    SplitResult out;
    Rng rng(mix_seed(seed, 0x70736dULL));
    for (int c = 0; c < C; ++c) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (y[i] == c) idx.push_back(i);
        }
        if (idx.empty()) continue;
        if (idx.size() < 2) {
            out.warnings.push_back("class " + std::to_string(c) +
                                   " has a single row; kept entirely in train");
            out.train.push_back(idx[0]);
            continue;
        }
        rng.shuffle(idx);
        std::size_t n_train = static_cast<std::size_t>(
            std::lround(ratio * static_cast<double>(idx.size())));
        n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            (i < n_train ? out.train : out.test).push_back(idx[i]);
        }
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

// Stratified k folds: disjoint, covering, per-class counts across folds
// differ by at most one. The fold cursor carries over between classes so
// remainders spread evenly.
inline std::vector<std::vector<std::size_t>> stratified_k_fold(const std::vector<int>& y,
                                                               std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("stratified_k_fold needs k >= 2");
    if (k > y.size()) {
        throw KTooLargeError("stratified_k_fold: k=" + std::to_string(k) + " exceeds n=" +
                             std::to_string(y.size()));
    }
    int C = 0;
    for (const int l : y) C = std::max(C, l + 1);

    std::vector<std::vector<std::size_t>> folds(k);
    Rng rng(mix_seed(seed, 0x63766dULL));
    std::size_t cursor = 0;
    for (int c = 0; c < C; ++c) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (y[i] == c) idx.push_back(i);
        }
        rng.shuffle(idx);
        for (const std::size_t i : idx) {
            folds[cursor % k].push_back(i);
            ++cursor;
        }
    }
    for (auto& fold : folds) std::sort(fold.begin(), fold.end());
    return folds;
}

// ---------------------------------------------------------------------------
// Confusion matrix and metrics
// ---------------------------------------------------------------------------

struct ConfusionMatrix {
    std::size_t n_classes = 0;
    std::vector<std::size_t> counts;  // row = true class, column = predicted

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::size_t C) : n_classes(C), counts(C * C, 0) {}

    std::size_t at(std::size_t t, std::size_t p) const { return counts[t * n_classes + p]; }
    std::size_t& at(std::size_t t, std::size_t p) { return counts[t * n_classes + p]; }

    std::size_t total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

    void add(const ConfusionMatrix& other) {
        for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    }
};

inline ConfusionMatrix confusion_matrix(const std::vector<int>& truth, const std::vector<int>& pred,
                                        std::size_t C) {
    if (truth.size() != pred.size()) {
        throw LengthMismatchError("confusion_matrix: " + std::to_string(truth.size()) +
                                  " true labels, " + std::to_string(pred.size()) + " predictions");
    }
    ConfusionMatrix cm(C);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || pred[i] < 0 || static_cast<std::size_t>(truth[i]) >= C ||
            static_cast<std::size_t>(pred[i]) >= C) {
            throw LabelOutOfRangeError("confusion_matrix: label out of range at row " +
                                       std::to_string(i));
        }
        ++cm.at(static_cast<std::size_t>(truth[i]), static_cast<std::size_t>(pred[i]));
    }
    return cm;
}

struct EvalMetrics {
    double precision = 0.0;  // macro over classes, 0/0 counts as 0
    double recall = 0.0;
    double accuracy = 0.0;
};

inline EvalMetrics metrics(const ConfusionMatrix& cm) {
    const std::size_t C = cm.n_classes;
    const std::size_t total = cm.total();
    if (total == 0) throw EmptyMatrixError("metrics: confusion matrix is empty");

    EvalMetrics out;
    std::size_t diag = 0;
    for (std::size_t c = 0; c < C; ++c) {
        const std::size_t tp = cm.at(c, c);
        diag += tp;
        std::size_t fp = 0, fn = 0;
        for (std::size_t o = 0; o < C; ++o) {
            if (o == c) continue;
            fp += cm.at(o, c);
            fn += cm.at(c, o);
        }
        out.precision += (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        out.recall += (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    }
    out.precision /= static_cast<double>(C);
    out.recall /= static_cast<double>(C);
    out.accuracy = static_cast<double>(diag) / static_cast<double>(total);
    return out;
}

// ---------------------------------------------------------------------------
// Experiment grid
// ---------------------------------------------------------------------------

enum class Regime { Psm, Cvm };

inline std::string regime_name(Regime r) { return r == Regime::Psm ? "psm" : "cvm"; }

struct FeatureSetSpec {
    enum class Method { All, Cfs, Chi2, RfRank };
    Method method = Method::All;
    std::size_t k = 0;  // for Chi2 / RfRank

    std::string key() const {
        switch (method) {
            case Method::All: return "all-15";
            case Method::Cfs: return "cfs";
            case Method::Chi2: return "chi2-" + std::to_string(k);
            case Method::RfRank: return "rf-" + std::to_string(k);
        }
        return "?";
    }

    static FeatureSetSpec parse(const std::string& s) {
        FeatureSetSpec f;
        if (s == "all-15" || s == "all") {
            f.method = Method::All;
            return f;
        }
        if (s == "cfs") {
            f.method = Method::Cfs;
            return f;
        }
        auto parse_k = [&](const std::string& prefix, Method m) -> bool {
            if (s.rfind(prefix, 0) != 0) return false;
            f.method = m;
            f.k = static_cast<std::size_t>(std::stoul(s.substr(prefix.size())));
            if (f.k < 1) throw ConfigError("feature set \"" + s + "\" needs k >= 1");
            return true;
        };
        if (parse_k("chi2-", Method::Chi2) || parse_k("rf-", Method::RfRank)) return f;
        throw ConfigError("unknown feature set \"" + s + "\"");
    }
};

struct ExperimentConfig {
    double psm_ratio = 0.8;
    std::size_t cv_folds = 10;
    std::vector<Regime> regimes = {Regime::Psm, Regime::Cvm};
    std::vector<std::pair<std::string, ClassifierSpec>> classifiers;  // (label, spec)
    std::vector<FeatureSetSpec> feature_sets;
    std::uint64_t master_seed = 0;
    // Default mode refits scaling and feature selection inside every
    // fold/split; the paper-faithful mode selects once on the full data.
    bool paper_faithful_selection = false;
    std::size_t threads = 1;
    std::size_t cfs_stall_limit = 5;
    ForestParams rf_rank_params;
};

struct ReportRow {
    std::string classifier;
    std::string feature_set;
    std::string regime;
    double precision = 0.0;
    double recall = 0.0;
    double accuracy = 0.0;
};

struct EvalReport {
    std::vector<ReportRow> rows;
};

// Everything one train/test round needs: matrices scaled on the training
// rows only and the selections fitted on those rows.
struct FoldContext {
    FeatureMatrix train;
    FeatureMatrix test;
    std::vector<int> y_train;
    std::vector<int> y_test;
    std::vector<std::string> chi2_order;  // all features, best first
    std::vector<std::string> rf_order;
    std::vector<std::string> cfs_subset;
};

namespace detail {

inline NumericTable matrix_as_numeric(const FeatureMatrix& X, const std::vector<std::size_t>& rows) {
    NumericTable t;
    t.column_names = X.feature_names;
    t.kinds = X.kinds;
    for (const std::size_t i : rows) {
        t.values.push_back(X.values[i]);
        t.missing.emplace_back(X.n_features(), 0);
    }
    return t;
}

inline std::vector<int> gather_labels(const std::vector<int>& y, const std::vector<std::size_t>& rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (const std::size_t i : rows) out.push_back(y[i]);
    return out;
}

inline FeatureMatrix gather_rows(const FeatureMatrix& X, const std::vector<std::size_t>& rows) {
    FeatureMatrix out;
    out.feature_names = X.feature_names;
    out.kinds = X.kinds;
    for (const std::size_t i : rows) out.values.push_back(X.values[i]);
    return out;
}

}  // namespace detail

// Fit one fold: scaling statistics from the training rows (held-out rows
// clamp into [0,1]) and all three selection methods on the training side.
// This is the only place fold fitting happens, so leakage safety is a
// property of this function.
inline FoldContext fit_fold_context(const FeatureMatrix& X, const std::vector<int>& y,
                                    const std::vector<std::size_t>& train_rows,
                                    const std::vector<std::size_t>& test_rows,
                                    const ExperimentConfig& config, std::uint64_t fold_seed) {
    FoldContext ctx;
    ctx.y_train = detail::gather_labels(y, train_rows);
    ctx.y_test = detail::gather_labels(y, test_rows);

    if (config.paper_faithful_selection) {
        ctx.train = detail::gather_rows(X, train_rows);
        ctx.test = detail::gather_rows(X, test_rows);
        ctx.chi2_order = select_top_k(chi2_scores(X, y), X.n_features());
        ctx.rf_order = select_top_k(
            rf_importance(X, y, config.rf_rank_params, mix_seed(config.master_seed, 0x7266ULL)),
            X.n_features());
        ctx.cfs_subset = best_first_cfs(X, y, config.cfs_stall_limit).feature_names;
        return ctx;
    }

    const auto scaled = min_max_scale(detail::matrix_as_numeric(X, train_rows));
    ctx.train = scaled.matrix;
    ctx.test = apply_scale(detail::matrix_as_numeric(X, test_rows), scaled.params);
    ctx.chi2_order = select_top_k(chi2_scores(ctx.train, ctx.y_train), X.n_features());
    ctx.rf_order = select_top_k(
        rf_importance(ctx.train, ctx.y_train, config.rf_rank_params, mix_seed(fold_seed, 0x7266ULL)),
        X.n_features());
    ctx.cfs_subset = best_first_cfs(ctx.train, ctx.y_train, config.cfs_stall_limit).feature_names;
    return ctx;
}

inline std::vector<std::string> resolve_feature_set(const FoldContext& ctx, const FeatureSetSpec& set) {
    switch (set.method) {
        case FeatureSetSpec::Method::All: return ctx.train.feature_names;
        case FeatureSetSpec::Method::Cfs: return ctx.cfs_subset;
        case FeatureSetSpec::Method::Chi2:
            if (set.k > ctx.chi2_order.size()) {
                throw KTooLargeError("feature set " + set.key() + " exceeds feature count");
            }
            return {ctx.chi2_order.begin(), ctx.chi2_order.begin() + static_cast<std::ptrdiff_t>(set.k)};
        case FeatureSetSpec::Method::RfRank:
            if (set.k > ctx.rf_order.size()) {
                throw KTooLargeError("feature set " + set.key() + " exceeds feature count");
            }
            return {ctx.rf_order.begin(), ctx.rf_order.begin() + static_cast<std::ptrdiff_t>(set.k)};
    }
    return {};
}

// Train-and-predict callback; the default uses the real classifiers. Tests
// can inject stubs to check the evaluation plumbing end to end.
using TrainPredictFn = std::function<std::vector<int>(
    const ClassifierSpec& spec, const FeatureMatrix& X_train, const std::vector<int>& y_train,
    const FeatureMatrix& X_test)>;

inline std::vector<int> default_train_predict(const ClassifierSpec& spec, const FeatureMatrix& X_train,
                                              const std::vector<int>& y_train,
                                              const FeatureMatrix& X_test) {
    return predict(train(spec, X_train, y_train), X_test);
}

inline EvalReport run_experiment_with(const ExperimentConfig& config, const FeatureMatrix& X,
                                      const std::vector<int>& y, const TrainPredictFn& fn) {
    if (X.n_rows() != y.size()) {
        throw LengthMismatchError("run_experiment: " + std::to_string(y.size()) + " labels for " +
                                  std::to_string(X.n_rows()) + " rows");
    }
    int C = 0;
    for (const int l : y) C = std::max(C, l + 1);
    const std::size_t n_classes = static_cast<std::size_t>(C);

    EvalReport report;
    for (const Regime regime : config.regimes) {
        // Build the train/test rounds for this regime.
        std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> rounds;
        if (regime == Regime::Psm) {
            auto split = percentage_split(y, config.psm_ratio, mix_seed(config.master_seed, 0x70736dULL));
            rounds.emplace_back(std::move(split.train), std::move(split.test));
        } else {
            const auto folds = stratified_k_fold(y, config.cv_folds, mix_seed(config.master_seed, 0x63766dULL));
            for (std::size_t f = 0; f < folds.size(); ++f) {
                std::vector<std::size_t> train_rows;
                for (std::size_t g = 0; g < folds.size(); ++g) {
                    if (g == f) continue;
                    train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
                }
                std::sort(train_rows.begin(), train_rows.end());
                rounds.emplace_back(std::move(train_rows), folds[f]);
            }
        }

        std::vector<FoldContext> contexts;
        contexts.reserve(rounds.size());
        for (std::size_t f = 0; f < rounds.size(); ++f) {
            const std::uint64_t fold_seed =
                mix_seed(config.master_seed, fnv1a64(regime_name(regime)), f);
            contexts.push_back(
                fit_fold_context(X, y, rounds[f].first, rounds[f].second, config, fold_seed));
        }

        // Pre-resolve the per-fold feature matrices once per feature set;
        // they are shared by every classifier.
        struct SetData {
            std::vector<FeatureMatrix> train;
            std::vector<FeatureMatrix> test;
        };
        std::vector<SetData> set_data(config.feature_sets.size());
        for (std::size_t s = 0; s < config.feature_sets.size(); ++s) {
            for (const auto& ctx : contexts) {
                const auto names = resolve_feature_set(ctx, config.feature_sets[s]);
                set_data[s].train.push_back(select_features(ctx.train, names));
                set_data[s].test.push_back(select_features(ctx.test, names));
            }
        }

        // Grid cells are independent; results land in preassigned slots so
        // the report is identical no matter how many workers run.
        struct Cell {
            std::size_t classifier = 0;
            std::size_t set = 0;
        };
        std::vector<Cell> cells;
        for (std::size_t ci = 0; ci < config.classifiers.size(); ++ci) {
            for (std::size_t s = 0; s < config.feature_sets.size(); ++s) {
                cells.push_back({ci, s});
            }
        }
        std::vector<ReportRow> rows(cells.size());

        auto run_cell = [&](std::size_t cell_index) {
            const auto [ci, s] = cells[cell_index];
            const auto& [label, base_spec] = config.classifiers[ci];
            ConfusionMatrix pooled(n_classes);
            for (std::size_t f = 0; f < contexts.size(); ++f) {
                ClassifierSpec spec = base_spec;
                spec.seed = mix_seed(mix_seed(config.master_seed, base_spec.seed),
                                     mix_seed(fnv1a64(label), fnv1a64(config.feature_sets[s].key())),
                                     mix_seed(fnv1a64(regime_name(regime)), f));
                const auto pred = fn(spec, set_data[s].train[f], contexts[f].y_train, set_data[s].test[f]);
                pooled.add(confusion_matrix(contexts[f].y_test, pred, n_classes));
            }
            const EvalMetrics m = metrics(pooled);
            rows[cell_index] = {label, config.feature_sets[s].key(), regime_name(regime),
                                m.precision, m.recall, m.accuracy};
        };

        const std::size_t workers = std::max<std::size_t>(1, config.threads);
        if (workers == 1) {
            for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
        } else {
            std::atomic<std::size_t> next{0};
            std::vector<std::thread> pool;
            for (std::size_t w = 0; w < std::min(workers, cells.size()); ++w) {
                pool.emplace_back([&]() {
                    for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
                        run_cell(i);
                    }
                });
            }
            for (auto& th : pool) th.join();
        }
        report.rows.insert(report.rows.end(), rows.begin(), rows.end());
    }

    // Canonical row order: classifier, then feature set, then regime, all in
    // config order.
    auto index_of = [](const std::vector<std::string>& keys, const std::string& k) {
        return std::find(keys.begin(), keys.end(), k) - keys.begin();
    };
    std::vector<std::string> classifier_keys, set_keys, regime_keys;
    for (const auto& [label, spec] : config.classifiers) classifier_keys.push_back(label);
    for (const auto& s : config.feature_sets) set_keys.push_back(s.key());
    for (const Regime r : config.regimes) regime_keys.push_back(regime_name(r));
    std::sort(report.rows.begin(), report.rows.end(), [&](const ReportRow& a, const ReportRow& b) {
        const auto ka = std::make_tuple(index_of(classifier_keys, a.classifier),
                                        index_of(set_keys, a.feature_set),
                                        index_of(regime_keys, a.regime));
        const auto kb = std::make_tuple(index_of(classifier_keys, b.classifier),
                                        index_of(set_keys, b.feature_set),
                                        index_of(regime_keys, b.regime));
        return ka < kb;
    });
    return report;
}

inline EvalReport run_experiment(const ExperimentConfig& config, const FeatureMatrix& X,
                                 const std::vector<int>& y) {
    return run_experiment_with(config, X, y, default_train_predict);
}

}  // namespace jcat
