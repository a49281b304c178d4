// jcat - journal categorization pipeline CLI.
//
// Subcommands:
//   pipeline  run the full flow: ingest, preprocess, cluster, select, train,
//             evaluate, report
//   predict   classify new journals with artifacts from a prior pipeline run
//   report    re-render markdown / SVG charts from a report CSV
//   synth     generate a synthetic journal table with three quality tiers
//
// Exit codes: 0 success, 1 configuration error, 2 data error, 3 internal
// error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jcat/pipeline.hpp"

namespace {

int run_pipeline_cmd(const std::string& config_path,
                     const std::vector<std::pair<std::string, std::string>>& overrides) {
    jcat::PipelineConfig config;
    if (!config_path.empty()) config = jcat::parse_config_file(config_path);
    for (const auto& [key, value] : overrides) jcat::apply_config_setting(config, key, value);
    jcat::run_pipeline(config, std::cout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"journal categorization pipeline"};
    app.require_subcommand(1);

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "run the full pipeline");
    std::string config_path;
    std::optional<std::string> opt_input, opt_out, opt_impute;
    std::optional<std::uint64_t> opt_seed;
    std::optional<double> opt_ratio;
    std::optional<std::size_t> opt_folds, opt_k, opt_threads;
    std::optional<int> opt_ref_year;
    bool opt_paper_faithful = false;
    pipeline->add_option("--config", config_path, "key = value config file");
    pipeline->add_option("--input", opt_input, "input journal CSV");
    pipeline->add_option("--out", opt_out, "output directory");
    pipeline->add_option("--seed", opt_seed, "master seed");
    pipeline->add_option("--ratio", opt_ratio, "percentage-split train ratio");
    pipeline->add_option("--folds", opt_folds, "cross-validation folds");
    pipeline->add_option("--k", opt_k, "number of clusters");
    pipeline->add_option("--reference-year", opt_ref_year, "reference year for coverage");
    pipeline->add_option("--impute", opt_impute, "imputation policy: fail | column-median");
    pipeline->add_option("--threads", opt_threads, "worker threads for the evaluation grid");
    pipeline->add_flag("--paper-faithful-selection", opt_paper_faithful,
                       "select features once globally instead of per fold");

    // predict
    auto* predict = app.add_subcommand("predict", "classify journals with a trained model");
    jcat::PredictOptions predict_opts;
    std::string predict_impute = "fail";
    predict->add_option("--model", predict_opts.model_path, "model JSON from a pipeline run")
        ->required();
    predict->add_option("--encoding", predict_opts.encoding_path, "encoding_map.json sidecar")
        ->required();
    predict->add_option("--scale", predict_opts.scale_path, "scale_params.json sidecar")->required();
    predict->add_option("--input", predict_opts.input_path, "journal CSV to classify")->required();
    predict->add_flag("--unseen-as-new-code", predict_opts.unseen_as_new_code,
                      "map unseen categories to a reserved code instead of failing");
    predict->add_option("--impute", predict_impute, "imputation policy: fail | column-median");

    // report
    auto* report = app.add_subcommand("report", "render a report CSV");
    std::string report_csv, report_out = ".";
    std::vector<std::string> report_formats = {"markdown", "svg"};
    report->add_option("--input", report_csv, "report.csv from a pipeline run")->required();
    report->add_option("--out", report_out, "output directory");
    report->add_option("--format", report_formats, "formats: markdown, svg");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic journal table");
    std::size_t synth_n = 340;
    std::uint64_t synth_seed = 7;
    std::string synth_out, synth_tiers_out;
    synth->add_option("--n", synth_n, "number of journals (>= 9)");
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--out", synth_out, "output CSV path")->required();
    synth->add_option("--tiers-out", synth_tiers_out, "optional CSV with the latent quality tiers");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*pipeline) {
            std::vector<std::pair<std::string, std::string>> overrides;
            if (opt_input) overrides.emplace_back("input", *opt_input);
            if (opt_out) overrides.emplace_back("out_dir", *opt_out);
            if (opt_seed) overrides.emplace_back("seed", std::to_string(*opt_seed));
            if (opt_ratio) overrides.emplace_back("psm_ratio", jcat::format_value(*opt_ratio));
            if (opt_folds) overrides.emplace_back("cv_folds", std::to_string(*opt_folds));
            if (opt_k) overrides.emplace_back("k_clusters", std::to_string(*opt_k));
            if (opt_ref_year) overrides.emplace_back("reference_year", std::to_string(*opt_ref_year));
            if (opt_impute) overrides.emplace_back("impute", *opt_impute);
            if (opt_threads) overrides.emplace_back("threads", std::to_string(*opt_threads));
            if (opt_paper_faithful) overrides.emplace_back("paper_faithful_selection", "true");
            return run_pipeline_cmd(config_path, overrides);
        }
        if (*predict) {
            predict_opts.impute = jcat::impute_policy_from_name(predict_impute);
            jcat::run_predict(predict_opts, std::cout);
            return 0;
        }
        if (*report) {
            jcat::run_report(report_csv, report_formats, report_out);
            return 0;
        }
        if (*synth) {
            const jcat::SyntheticDataset data = jcat::synthesize_dataset(synth_n, synth_seed);
            std::ostringstream ss;
            jcat::write_csv(data.table, ss);
            jcat::write_file_atomic(synth_out, ss.str());
            if (!synth_tiers_out.empty()) {
                std::ostringstream ts;
                ts << "row_index,tier\n";
                for (std::size_t i = 0; i < data.tiers.size(); ++i) {
                    ts << i << ',' << data.tiers[i] << '\n';
                }
                jcat::write_file_atomic(synth_tiers_out, ts.str());
            }
            std::cout << "wrote " << data.table.n_rows() << " journals to " << synth_out << "\n";
            return 0;
        }
    } catch (const jcat::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const jcat::Error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
