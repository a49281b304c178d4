#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "jcat/classify.hpp"
#include "jcat/cluster.hpp"
#include "jcat/errors.hpp"
#include "jcat/evaluate.hpp"
#include "jcat/featsel.hpp"
#include "jcat/preprocess.hpp"
#include "jcat/report.hpp"
#include "jcat/table.hpp"

namespace jcat {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// File helpers. Writes are atomic: temp file in the target directory, then
// rename.
// ---------------------------------------------------------------------------

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write file: " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
    return nlohmann::json::parse(read_file(path));
}

inline std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

// ---------------------------------------------------------------------------
// CSV serialization of intermediate artifacts
// ---------------------------------------------------------------------------

inline void write_numeric_csv(const NumericTable& t, std::ostream& out) {
    write_csv_row(out, t.column_names);
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
        std::vector<std::string> row(t.n_cols());
        for (std::size_t j = 0; j < t.n_cols(); ++j) {
            row[j] = t.missing[r][j] ? "" : format_value(t.values[r][j]);
        }
        write_csv_row(out, row);
    }
}

inline NumericTable read_numeric_csv(std::istream& in) {
    const RawTable raw = read_csv_table(in);
    NumericTable t;
    t.column_names = raw.column_names;
    t.kinds.assign(raw.n_cols(), FeatureKind::Numeric);
    for (std::size_t r = 0; r < raw.n_rows(); ++r) {
        std::vector<double> vals(raw.n_cols(), std::numeric_limits<double>::quiet_NaN());
        std::vector<std::uint8_t> miss(raw.n_cols(), 1);
        for (std::size_t j = 0; j < raw.n_cols(); ++j) {
            if (raw.missing_mask[r][j]) continue;
            vals[j] = std::stod(raw.cells[r][j]);
            miss[j] = 0;
        }
        t.values.push_back(std::move(vals));
        t.missing.push_back(std::move(miss));
    }
    return t;
}

inline void write_matrix_csv(const FeatureMatrix& X, std::ostream& out) {
    write_csv_row(out, X.feature_names);
    for (const auto& row : X.values) {
        std::vector<std::string> cells(row.size());
        for (std::size_t j = 0; j < row.size(); ++j) cells[j] = format_value(row[j]);
        write_csv_row(out, cells);
    }
}

inline FeatureMatrix read_matrix_csv(std::istream& in) {
    const RawTable raw = read_csv_table(in);
    FeatureMatrix X;
    X.feature_names = raw.column_names;
    X.kinds.assign(raw.n_cols(), FeatureKind::Numeric);
    for (std::size_t r = 0; r < raw.n_rows(); ++r) {
        std::vector<double> row(raw.n_cols());
        for (std::size_t j = 0; j < raw.n_cols(); ++j) row[j] = std::stod(raw.cells[r][j]);
        X.values.push_back(std::move(row));
    }
    return X;
}

struct ClusterCsvRow {
    std::size_t row_index;
    int cluster_id;
    std::string category;
};

inline void write_clusters_csv(const std::vector<int>& labels, const CategoryMap& categories,
                               std::ostream& out) {
    out << "row_index,cluster_id,category\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out << i << ',' << labels[i] << ',' << category_name(categories.category_of(labels[i]))
            << '\n';
    }
}

inline std::vector<ClusterCsvRow> read_clusters_csv(std::istream& in) {
    const auto rows = parse_csv(in);
    if (rows.empty() || rows[0] != std::vector<std::string>{"row_index", "cluster_id", "category"}) {
        throw SchemaMismatchError("not a cluster assignment CSV");
    }
    std::vector<ClusterCsvRow> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        out.push_back({std::stoul(rows[i][0]), std::stoi(rows[i][1]), rows[i][2]});
    }
    return out;
}

inline void write_scores_csv(const std::vector<FeatureScore>& scores, std::ostream& out) {
    out << "feature_name,score\n";
    for (const auto& s : scores) {
        std::vector<std::string> row = {s.feature_name, format_value(s.score)};
        write_csv_row(out, row);
    }
}

// ---------------------------------------------------------------------------
// Pipeline configuration
// ---------------------------------------------------------------------------

struct RosterEntry {
    std::string key;    // file-safe identifier from the config
    std::string label;  // report label (gbm proxies are tagged)
    ClassifierSpec spec;
};

inline RosterEntry make_roster_entry(const std::string& key) {
    RosterEntry e;
    e.key = key;
    e.label = key;
    if (key == "xgb" || key == "cb" || key == "lgbm") {
        // The three boosted-tree entries run on the one generic gbm engine,
        // with distinct seeds, and are labeled as proxies.
        e.spec.kind = ClassifierKind::Gbm;
        e.spec.seed = key == "xgb" ? 1 : key == "cb" ? 2 : 3;
        e.label = key + "(gbm-proxy)";
    } else {
        e.spec.kind = classifier_kind_from_name(key);
    }
    return e;
}

struct PipelineConfig {
    std::string input_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    int reference_year = 2021;
    std::size_t k_clusters = 3;
    ImputePolicy impute = ImputePolicy::Fail;
    double psm_ratio = 0.8;
    std::size_t cv_folds = 10;
    std::vector<Regime> regimes = {Regime::Psm, Regime::Cvm};
    std::vector<std::string> classifier_keys = {"nb",  "mlp",  "bagging", "rf",  "xgb",
                                                "cb",  "lgbm", "etc",     "adaboost"};
    std::vector<std::string> feature_set_keys = {"cfs",    "chi2-5",  "chi2-7", "chi2-10",
                                                 "chi2-12", "chi2-15", "rf-5",   "rf-7",
                                                 "rf-10",  "rf-12",   "rf-15"};
    std::vector<std::string> report_formats = {"csv", "markdown", "svg"};
    std::size_t threads = 1;
    bool paper_faithful_selection = false;
    bool gower_respect_kinds = false;
    std::string final_feature_set = "all-15";
    std::size_t cfs_stall_limit = 5;

    void validate() const {
        if (input_path.empty()) throw ConfigError("input path is required");
        if (out_dir.empty()) throw ConfigError("output directory is required");
        if (k_clusters != 3) {
            throw ConfigError("the full pipeline requires k_clusters = 3 (three quality categories)");
        }
        if (!(psm_ratio > 0.0 && psm_ratio < 1.0)) throw ConfigError("psm_ratio must be in (0,1)");
        if (cv_folds < 2) throw ConfigError("cv_folds must be >= 2");
        if (regimes.empty()) throw ConfigError("at least one regime is required");
        if (classifier_keys.empty()) throw ConfigError("at least one classifier is required");
        if (feature_set_keys.empty()) throw ConfigError("at least one feature set is required");
        for (const auto& key : classifier_keys) make_roster_entry(key);
        for (const auto& key : feature_set_keys) FeatureSetSpec::parse(key);
        FeatureSetSpec::parse(final_feature_set);
        for (const auto& f : report_formats) {
            if (f != "csv" && f != "markdown" && f != "svg") {
                throw ConfigError("unknown report format \"" + f + "\"");
            }
        }
        if (threads < 1) throw ConfigError("threads must be >= 1");
    }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, ',')) {
        const std::string t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

inline bool parse_bool(const std::string& s) {
    const std::string t = to_lower(trim(s));
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ConfigError("expected a boolean, got \"" + s + "\"");
}

}  // namespace detail

// Apply one key=value setting; shared by the config file parser and the CLI
// flag overrides.
inline void apply_config_setting(PipelineConfig& c, const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    try {
        if (key == "input") c.input_path = v;
        else if (key == "out_dir") c.out_dir = v;
        else if (key == "seed") c.seed = std::stoull(v);
        else if (key == "reference_year") c.reference_year = std::stoi(v);
        else if (key == "k_clusters") c.k_clusters = std::stoul(v);
        else if (key == "impute") c.impute = impute_policy_from_name(v);
        else if (key == "psm_ratio") c.psm_ratio = std::stod(v);
        else if (key == "cv_folds") c.cv_folds = std::stoul(v);
        else if (key == "regimes") {
            c.regimes.clear();
            for (const auto& r : detail::split_list(v)) {
                if (r == "psm") c.regimes.push_back(Regime::Psm);
                else if (r == "cvm") c.regimes.push_back(Regime::Cvm);
                else throw ConfigError("unknown regime \"" + r + "\"");
            }
        } else if (key == "classifiers") c.classifier_keys = detail::split_list(v);
        else if (key == "feature_sets") c.feature_set_keys = detail::split_list(v);
        else if (key == "report_formats") c.report_formats = detail::split_list(v);
        else if (key == "threads") c.threads = std::stoul(v);
        else if (key == "paper_faithful_selection") c.paper_faithful_selection = detail::parse_bool(v);
        else if (key == "gower") {
            if (v == "numeric") c.gower_respect_kinds = false;
            else if (v == "kinds") c.gower_respect_kinds = true;
            else throw ConfigError("gower must be \"numeric\" or \"kinds\"");
        } else if (key == "final_feature_set") c.final_feature_set = v;
        else if (key == "cfs_stall_limit") c.cfs_stall_limit = std::stoul(v);
        else throw ConfigError("unknown config key \"" + key + "\"");
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("invalid value \"" + v + "\" for config key \"" + key + "\"");
    }
}

// Flat key = value file; blank lines and lines starting with # are skipped.
inline PipelineConfig parse_config_text(const std::string& text) {
    PipelineConfig c;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + " is not key = value");
        }
        apply_config_setting(c, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return c;
}

inline PipelineConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

// Canonical serialization used for the manifest hash; key order is fixed.
inline std::string canonical_config_text(const PipelineConfig& c) {
    std::ostringstream out;
    auto list = [](const std::vector<std::string>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ",";
            s += v[i];
        }
        return s;
    };
    std::vector<std::string> regimes;
    for (const Regime r : c.regimes) regimes.push_back(regime_name(r));
    out << "cfs_stall_limit = " << c.cfs_stall_limit << "\n";
    out << "classifiers = " << list(c.classifier_keys) << "\n";
    out << "cv_folds = " << c.cv_folds << "\n";
    out << "feature_sets = " << list(c.feature_set_keys) << "\n";
    out << "final_feature_set = " << c.final_feature_set << "\n";
    out << "gower = " << (c.gower_respect_kinds ? "kinds" : "numeric") << "\n";
    out << "impute = " << (c.impute == ImputePolicy::Fail ? "fail" : "column-median") << "\n";
    out << "input = " << c.input_path << "\n";
    out << "k_clusters = " << c.k_clusters << "\n";
    out << "out_dir = " << c.out_dir << "\n";
    out << "paper_faithful_selection = " << (c.paper_faithful_selection ? "true" : "false") << "\n";
    out << "psm_ratio = " << format_value(c.psm_ratio) << "\n";
    out << "reference_year = " << c.reference_year << "\n";
    out << "regimes = " << list(regimes) << "\n";
    out << "report_formats = " << list(c.report_formats) << "\n";
    out << "seed = " << c.seed << "\n";
    out << "threads = " << c.threads << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Pipeline run
// ---------------------------------------------------------------------------

struct PipelineResult {
    std::vector<int> cluster_labels;
    CategoryMap categories;
    std::vector<int> y;  // category code per row
    double silhouette = 0.0;
    double ari_stability = 0.0;
    double ari_vs_kmeans = 0.0;
    EvalReport report;
};

inline PipelineResult run_pipeline(const PipelineConfig& config, std::ostream& log) {
    config.validate();
    const std::filesystem::path out_dir(config.out_dir);
    std::filesystem::create_directories(out_dir / "models");
    std::filesystem::create_directories(out_dir / "figures");
    std::vector<std::string> artifacts;
    auto emit = [&](const std::string& name, const std::string& content) {
        write_file_atomic(out_dir / name, content);
        artifacts.push_back(name);
    };

    log << "loading " << config.input_path << "\n";
    const RawTable raw = load_table_file(config.input_path);
    const ValidationReport validation = validate_schema(raw);
    log << "rows " << raw.n_rows() << ", missing cells " << validation.total_missing << " in "
        << validation.rows_with_missing << " rows\n";

    const DropResult dropped = drop_identifier_columns(raw);
    for (const auto& w : dropped.warnings) log << "warning: " << w << "\n";
    {
        std::ostringstream ss;
        write_csv(dropped.table, ss);
        emit("cleaned.csv", ss.str());
    }

    EncodeResult encoded = encode_record_fields(dropped.table, config.reference_year);
    {
        std::ostringstream ss;
        write_numeric_csv(encoded.table, ss);
        emit("encoded.csv", ss.str());
        emit("encoding_map.json", encoded.map.to_json().dump(2) + "\n");
    }

    const NumericTable imputed = impute_missing(encoded.table, config.impute);
    const ScaleResult scaled = min_max_scale(imputed);
    {
        std::ostringstream ss;
        write_matrix_csv(scaled.matrix, ss);
        emit("scaled.csv", ss.str());
        emit("scale_params.json", scaled.params.to_json().dump(2) + "\n");
    }

    log << "clustering " << scaled.matrix.n_rows() << " rows into " << config.k_clusters << "\n";
    const DistanceMatrix D = config.gower_respect_kinds
                                 ? gower_matrix(scaled.matrix, scaled.matrix.kinds)
                                 : gower_matrix(scaled.matrix);
    {
        double lo = 1.0, hi = 0.0, sum = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < D.n; ++i) {
            for (std::size_t j = i + 1; j < D.n; ++j) {
                lo = std::min(lo, D.at(i, j));
                hi = std::max(hi, D.at(i, j));
                sum += D.at(i, j);
                ++count;
            }
        }
        nlohmann::json j = {{"n", D.n},
                            {"off_diagonal_min", count ? lo : 0.0},
                            {"off_diagonal_max", count ? hi : 0.0},
                            {"off_diagonal_mean", count ? sum / static_cast<double>(count) : 0.0}};
        emit("distance_summary.json", j.dump(2) + "\n");
    }

    PipelineResult result;
    const ClusterAssignment assignment = k_medoids(D, config.k_clusters, config.seed);
    result.cluster_labels = assignment.labels;
    result.silhouette = silhouette_width(D, assignment.labels);
    // PAM's local search is deterministic, so two seeds must agree exactly;
    // the k-means comparison is the informative stability number.
    const ClusterAssignment second = k_medoids(D, config.k_clusters, config.seed + 1);
    result.ari_stability = adjusted_rand_index(assignment.labels, second.labels);
    const ClusterAssignment kmeans = k_means(scaled.matrix, config.k_clusters, config.seed);
    result.ari_vs_kmeans = adjusted_rand_index(assignment.labels, kmeans.labels);

    result.categories = assign_categories(scaled.matrix, assignment.labels);
    for (const int l : assignment.labels) {
        result.y.push_back(static_cast<int>(result.categories.category_of(l)));
    }
    {
        std::ostringstream ss;
        write_clusters_csv(assignment.labels, result.categories, ss);
        emit("clusters.csv", ss.str());

        nlohmann::json j;
        j["k"] = config.k_clusters;
        j["medoid_indices"] = assignment.medoid_indices;
        j["total_cost"] = assignment.total_cost;
        j["silhouette_width"] = result.silhouette;
        j["ari_stability_two_seeds"] = result.ari_stability;
        j["ari_vs_kmeans"] = result.ari_vs_kmeans;
        j["kmeans_total_cost"] = kmeans.total_cost;
        nlohmann::json cats = nlohmann::json::array();
        for (std::size_t c = 0; c < result.categories.cluster_to_category.size(); ++c) {
            std::size_t size = 0;
            for (const int l : assignment.labels) {
                if (l == static_cast<int>(c)) ++size;
            }
            cats.push_back({{"cluster", c},
                            {"category", category_name(result.categories.cluster_to_category[c])},
                            {"composite_score", result.categories.composite_scores[c]},
                            {"size", size}});
        }
        j["categories"] = cats;
        emit("cluster_summary.json", j.dump(2) + "\n");
    }
    log << "silhouette " << format_metric(result.silhouette, 3) << ", ari(two seeds) "
        << format_metric(result.ari_stability, 3) << ", ari(vs k-means) "
        << format_metric(result.ari_vs_kmeans, 3) << "\n";

    // Whole-data selection artifacts (the per-fold selections used for
    // evaluation are refit inside run_experiment).
    ExperimentConfig exp;
    exp.psm_ratio = config.psm_ratio;
    exp.cv_folds = config.cv_folds;
    exp.regimes = config.regimes;
    exp.master_seed = config.seed;
    exp.paper_faithful_selection = config.paper_faithful_selection;
    exp.threads = config.threads;
    exp.cfs_stall_limit = config.cfs_stall_limit;
    for (const auto& key : config.classifier_keys) {
        const RosterEntry e = make_roster_entry(key);
        exp.classifiers.emplace_back(e.label, e.spec);
    }
    for (const auto& key : config.feature_set_keys) {
        exp.feature_sets.push_back(FeatureSetSpec::parse(key));
    }

    {
        std::ostringstream ss;
        write_scores_csv(chi2_scores(scaled.matrix, result.y), ss);
        emit("feature_scores_chi2.csv", ss.str());
    }
    {
        std::ostringstream ss;
        write_scores_csv(rf_importance(scaled.matrix, result.y, exp.rf_rank_params,
                                       mix_seed(config.seed, 0x7266ULL)),
                         ss);
        emit("feature_scores_rf.csv", ss.str());
    }
    const FeatureSubset cfs = best_first_cfs(scaled.matrix, result.y, config.cfs_stall_limit);
    {
        std::ostringstream ss;
        ss << "feature_name,merit\n";
        for (const auto& name : cfs.feature_names) {
            std::vector<std::string> row = {name, format_value(cfs.merit)};
            write_csv_row(ss, row);
        }
        emit("cfs_subset.csv", ss.str());
    }

    log << "running experiment grid: " << exp.classifiers.size() << " classifiers x "
        << exp.feature_sets.size() << " feature sets x " << exp.regimes.size() << " regimes\n";
    result.report = run_experiment(exp, scaled.matrix, result.y);

    for (const auto& format : config.report_formats) {
        if (format == "csv") {
            std::ostringstream ss;
            write_report_csv(result.report, ss);
            emit("report.csv", ss.str());
        } else if (format == "markdown") {
            emit("report.md", render_markdown(result.report));
        } else if (format == "svg") {
            for (const auto& [name, content] : render_report_charts(result.report)) {
                write_file_atomic(out_dir / "figures" / name, content);
                artifacts.push_back("figures/" + name);
            }
        }
    }

    // Final models: fit each roster classifier on the full data with the
    // configured final feature set, for the predict command.
    {
        FoldContext full;
        full.train = scaled.matrix;
        full.y_train = result.y;
        full.chi2_order = select_top_k(chi2_scores(scaled.matrix, result.y), scaled.matrix.n_features());
        full.rf_order = select_top_k(rf_importance(scaled.matrix, result.y, exp.rf_rank_params,
                                                   mix_seed(config.seed, 0x7266ULL)),
                                     scaled.matrix.n_features());
        full.cfs_subset = cfs.feature_names;
        const auto final_names = resolve_feature_set(full, FeatureSetSpec::parse(config.final_feature_set));
        const FeatureMatrix X_final = select_features(scaled.matrix, final_names);
        for (const auto& key : config.classifier_keys) {
            RosterEntry e = make_roster_entry(key);
            e.spec.seed = mix_seed(config.seed, e.spec.seed, fnv1a64(e.key));
            TrainedModel model = train(e.spec, X_final, result.y);
            model.label_names.clear();
            for (const int l : model.class_labels) {
                model.label_names.push_back(category_name(static_cast<Category>(l)));
            }
            const std::string model_file = "models/" + e.key + ".json";
            write_file_atomic(out_dir / model_file, model_to_json(model).dump() + "\n");
            artifacts.push_back(model_file);

            std::ostringstream preds;
            preds << "row_index,category\n";
            const auto predicted = predict(model, X_final);
            for (std::size_t i = 0; i < predicted.size(); ++i) {
                preds << i << ',' << category_name(static_cast<Category>(predicted[i])) << '\n';
            }
            const std::string pred_file = "models/" + e.key + "_train_predictions.csv";
            write_file_atomic(out_dir / pred_file, preds.str());
            artifacts.push_back(pred_file);
        }
    }

    {
        const std::string config_text = canonical_config_text(config);
        char hash_hex[32];
        std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(config_text)));
        std::sort(artifacts.begin(), artifacts.end());
        nlohmann::json j;
        j["format"] = "jcat-manifest";
        j["format_version"] = 1;
        j["version"] = kVersion;
        j["seed"] = config.seed;
        j["config_hash_fnv1a64"] = std::string(hash_hex);
        j["config"] = config_text;
        j["artifacts"] = artifacts;
        write_file_atomic(out_dir / "manifest.json", j.dump(2) + "\n");
    }
    log << "wrote " << artifacts.size() + 1 << " artifacts to " << config.out_dir << "\n";
    return result;
}

// ---------------------------------------------------------------------------
// Predict
// ---------------------------------------------------------------------------

struct PredictOptions {
    std::string model_path;
    std::string encoding_path;
    std::string scale_path;
    std::string input_path;
    bool unseen_as_new_code = false;
    ImputePolicy impute = ImputePolicy::Fail;
};

// Applies the stored preprocessing to new journal rows and prints one
// "row_index,category" line per row.
inline void run_predict(const PredictOptions& opts, std::ostream& out) {
    const TrainedModel model = model_from_json(read_json_file(opts.model_path));
    const EncodingMap encoding = EncodingMap::from_json(read_json_file(opts.encoding_path));
    const ScaleParams scale = ScaleParams::from_json(read_json_file(opts.scale_path));

    std::ifstream in(opts.input_path, std::ios::binary);
    if (!in) throw Error("cannot open input file: " + opts.input_path);
    const RawTable raw = load_table(in, /*allow_empty=*/true);
    if (raw.n_rows() == 0) return;

    const DropResult dropped = drop_identifier_columns(raw);
    NumericTable encoded = apply_encoding(dropped.table, encoding, opts.unseen_as_new_code);
    encoded = impute_missing(encoded, opts.impute);
    const FeatureMatrix scaled_matrix = apply_scale(encoded, scale);

    FeatureMatrix X;
    try {
        X = select_features(scaled_matrix, model.feature_names);
    } catch (const UnknownFeatureError& e) {
        throw SchemaMismatchError(std::string("input does not provide the model's features: ") +
                                  e.what());
    }
    const auto predicted = predict(model, X);
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const auto it = std::lower_bound(model.class_labels.begin(), model.class_labels.end(),
                                         predicted[i]);
        const std::size_t idx = static_cast<std::size_t>(it - model.class_labels.begin());
        out << i << ',' << model.label_names[idx] << '\n';
    }
}

// ---------------------------------------------------------------------------
// Report regeneration
// ---------------------------------------------------------------------------

inline void run_report(const std::string& report_csv_path, const std::vector<std::string>& formats,
                       const std::string& out_dir) {
    std::ifstream in(report_csv_path, std::ios::binary);
    if (!in) throw Error("cannot open report file: " + report_csv_path);
    const EvalReport report = read_report_csv(in);
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    for (const auto& format : formats) {
        if (format == "markdown") {
            write_file_atomic(dir / "report.md", render_markdown(report));
        } else if (format == "svg") {
            for (const auto& [name, content] : render_report_charts(report)) {
                write_file_atomic(dir / name, content);
            }
        } else {
            throw ConfigError("unknown report format \"" + format + "\"");
        }
    }
}

}  // namespace jcat
