#pragma once

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "jcat/csv.hpp"
#include "jcat/errors.hpp"
#include "jcat/evaluate.hpp"

namespace jcat {

inline std::string format_metric(double v, int decimals = 6) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return std::string(buf);
}

// Reference targets previously reported for this pipeline design, carried in
// report footnotes for orientation only; nothing in this artifact asserts
// them, because the underlying journal dataset is not available.
inline const std::vector<std::string>& reference_target_footnotes() {
    static const std::vector<std::string> notes = {
        "ETC accuracy 0.987 (chi2-12 and rf-12 features, cvm) - best previously reported cell",
        "ETC accuracy 0.987 with precision 0.98 and recall 0.95 (chi2-12, cvm)",
        "AdaBoost accuracy 0.547 (chi2-10, cvm) - weakest previously reported classifier",
        "NB accuracy 0.941 with precision 0.627 and recall 0.777 (cfs, psm)",
        "Silhouette width 0.238 on the original (unpublished) journal dataset",
    };
    return notes;
}

inline void write_report_csv(const EvalReport& report, std::ostream& out) {
    out << "classifier,feature_set,regime,precision,recall,accuracy\n";
    for (const auto& r : report.rows) {
        std::vector<std::string> row = {r.classifier,              r.feature_set,
                                        r.regime,                  format_metric(r.precision),
                                        format_metric(r.recall),   format_metric(r.accuracy)};
        write_csv_row(out, row);
    }
}

inline EvalReport read_report_csv(std::istream& in) {
    const auto rows = parse_csv(in);
    if (rows.empty()) throw EmptyTableError("report CSV has no header");
    const std::vector<std::string> expected = {"classifier", "feature_set", "regime",
                                               "precision",  "recall",      "accuracy"};
    if (rows[0] != expected) throw SchemaMismatchError("report CSV header does not match");
    if (rows.size() <= 1) throw EmptyTableError("report CSV has no rows");
    EvalReport report;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 6) {
            throw CsvFormatError("report row " + std::to_string(i) + " has " +
                                 std::to_string(rows[i].size()) + " fields");
        }
        ReportRow r;
        r.classifier = rows[i][0];
        r.feature_set = rows[i][1];
        r.regime = rows[i][2];
        try {
            r.precision = std::stod(rows[i][3]);
            r.recall = std::stod(rows[i][4]);
            r.accuracy = std::stod(rows[i][5]);
        } catch (const std::exception&) {
            throw CsvFormatError("report row " + std::to_string(i) + " has non-numeric metrics");
        }
        report.rows.push_back(std::move(r));
    }
    return report;
}

namespace detail {

inline std::vector<std::string> ordered_unique(const std::vector<std::string>& values) {
    std::vector<std::string> out;
    for (const auto& v : values) {
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
    return out;
}

}  // namespace detail

// Markdown rendering: per regime, one three-metric table for each standalone
// feature set and one table per metric for each ranked family (chi2-k,
// rf-k), mirroring the usual grid layout for this kind of study.
inline std::string render_markdown(const EvalReport& report) {
    std::ostringstream md;
    md << "# Evaluation report\n";

    std::vector<std::string> regimes, classifiers, sets;
    for (const auto& r : report.rows) {
        regimes.push_back(r.regime);
        classifiers.push_back(r.classifier);
        sets.push_back(r.feature_set);
    }
    regimes = detail::ordered_unique(regimes);
    classifiers = detail::ordered_unique(classifiers);
    sets = detail::ordered_unique(sets);

    auto find_row = [&](const std::string& cl, const std::string& set,
                        const std::string& regime) -> const ReportRow* {
        for (const auto& r : report.rows) {
            if (r.classifier == cl && r.feature_set == set && r.regime == regime) return &r;
        }
        return nullptr;
    };

    for (const auto& regime : regimes) {
        const std::string regime_title = regime == "cvm" ? "10-fold cross-validation (cvm)"
                                                         : "percentage split (psm)";
        md << "\n## Regime: " << regime_title << "\n";

        std::vector<std::string> standalone;
        std::vector<std::string> chi2_family, rf_family;
        for (const auto& s : sets) {
            if (s.rfind("chi2-", 0) == 0) chi2_family.push_back(s);
            else if (s.rfind("rf-", 0) == 0) rf_family.push_back(s);
            else standalone.push_back(s);
        }

        for (const auto& set : standalone) {
            md << "\n### Feature set: " << set << "\n\n";
            md << "| Classifier | Precision | Recall | Accuracy |\n";
            md << "|---|---|---|---|\n";
            for (const auto& cl : classifiers) {
                const ReportRow* r = find_row(cl, set, regime);
                if (!r) continue;
                md << "| " << cl << " | " << format_metric(r->precision, 3) << " | "
                   << format_metric(r->recall, 3) << " | " << format_metric(r->accuracy, 3)
                   << " |\n";
            }
        }

        struct Family {
            const char* title;
            const std::vector<std::string>* sets;
        };
        const Family families[] = {{"chi2-ranked features", &chi2_family},
                                   {"RF-ranked features", &rf_family}};
        const std::pair<const char*, double ReportRow::*> metric_fields[] = {
            {"Accuracy", &ReportRow::accuracy},
            {"Precision", &ReportRow::precision},
            {"Recall", &ReportRow::recall}};
        for (const auto& family : families) {
            if (family.sets->empty()) continue;
            for (const auto& [metric_name, field] : metric_fields) {
                md << "\n### " << metric_name << " with " << family.title << "\n\n";
                md << "| Classifier |";
                for (const auto& s : *family.sets) md << " " << s << " |";
                md << "\n|---|";
                for (std::size_t i = 0; i < family.sets->size(); ++i) md << "---|";
                md << "\n";
                for (const auto& cl : classifiers) {
                    bool any = false;
                    std::ostringstream line;
                    line << "| " << cl << " |";
                    for (const auto& s : *family.sets) {
                        const ReportRow* r = find_row(cl, s, regime);
                        if (r) {
                            line << " " << format_metric(r->*field, 3) << " |";
                            any = true;
                        } else {
                            line << " - |";
                        }
                    }
                    if (any) md << line.str() << "\n";
                }
            }
        }
    }

    md << "\n## Reference targets\n\n";
    md << "Previously reported values for this pipeline design, quoted for orientation only\n";
    md << "(the journal dataset behind them was never published, so they are not asserted):\n\n";
    for (const auto& note : reference_target_footnotes()) {
        md << "- " << note << "\n";
    }
    return md.str();
}

// Deterministic standalone SVG bar chart; values are expected in [0,1].
inline std::string render_bar_chart(const std::string& title,
                                    const std::vector<std::pair<std::string, double>>& bars) {
    const int bar_width = 46;
    const int gap = 18;
    const int left = 64;
    const int plot_h = 300;
    const int top = 48;
    const int width = left + static_cast<int>(bars.size()) * (bar_width + gap) + 24;
    const int height = top + plot_h + 72;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";

    for (int tick = 0; tick <= 5; ++tick) {
        const double v = 0.2 * tick;
        const int y = top + plot_h - static_cast<int>(v * plot_h);
        svg << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << width - 16 << "\" y2=\""
            << y << "\" stroke=\"#d0d0d0\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << left - 8 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << format_metric(v, 1) << "</text>\n";
    }

    int x = left + gap / 2;
    for (const auto& [label, value] : bars) {
        double v = value;
        if (v < 0.0) v = 0.0;
        if (v > 1.0) v = 1.0;
        const int bar_h = static_cast<int>(v * plot_h + 0.5);
        const int y = top + plot_h - bar_h;
        svg << "<rect class=\"bar\" x=\"" << x << "\" y=\"" << y << "\" width=\"" << bar_width
            << "\" height=\"" << bar_h << "\" fill=\"#4878a8\"/>\n";
        svg << "<text x=\"" << x + bar_width / 2 << "\" y=\"" << y - 5
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
            << format_metric(value, 3) << "</text>\n";
        svg << "<text x=\"" << x + bar_width / 2 << "\" y=\"" << top + plot_h + 16
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\" "
            << "transform=\"rotate(30 " << x + bar_width / 2 << " " << top + plot_h + 16 << ")\">"
            << label << "</text>\n";
        x += bar_width + gap;
    }
    svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << width - 16
        << "\" y2=\"" << top + plot_h << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    svg << "</svg>\n";
    return svg.str();
}

// One chart per (regime, feature set, metric), bars in the report's
// classifier order.
inline std::vector<std::pair<std::string, std::string>> render_report_charts(const EvalReport& report) {
    std::vector<std::string> regimes, sets;
    for (const auto& r : report.rows) {
        regimes.push_back(r.regime);
        sets.push_back(r.feature_set);
    }
    regimes = detail::ordered_unique(regimes);
    sets = detail::ordered_unique(sets);

    const std::pair<const char*, double ReportRow::*> metric_fields[] = {
        {"accuracy", &ReportRow::accuracy},
        {"precision", &ReportRow::precision},
        {"recall", &ReportRow::recall}};

    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& regime : regimes) {
        for (const auto& set : sets) {
            for (const auto& [metric_name, field] : metric_fields) {
                std::vector<std::pair<std::string, double>> bars;
                for (const auto& r : report.rows) {
                    if (r.regime == regime && r.feature_set == set) {
                        bars.emplace_back(r.classifier, r.*field);
                    }
                }
                if (bars.empty()) continue;
                const std::string title = std::string(metric_name) + " / " + set + " / " + regime;
                const std::string name = "fig_" + regime + "_" + set + "_" + metric_name + ".svg";
                files.emplace_back(name, render_bar_chart(title, bars));
            }
        }
    }
    return files;
}

}  // namespace jcat
