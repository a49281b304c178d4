#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "jcat/csv.hpp"
#include "jcat/errors.hpp"
#include "jcat/random.hpp"

namespace jcat {

enum class ColumnKind { Text, Category, Numeric };

struct SchemaColumn {
    std::string name;  // canonical header written by write_csv
    ColumnKind kind;
    std::vector<std::string> aliases;  // extra canonicalized spellings accepted on input
};

// Lowercase alphanumeric form used for header matching; real exports vary in
// casing, spacing and punctuation.
inline std::string canon_header(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char ch : s) {
        const unsigned char u = static_cast<unsigned char>(ch);
        if (std::isalnum(u)) out.push_back(static_cast<char>(std::tolower(u)));
    }
    return out;
}

// The 20-column raw journal schema. Order is the canonical column order.
inline const std::vector<SchemaColumn>& journal_schema() {
    static const std::vector<SchemaColumn> schema = {
        {"Full Title", ColumnKind::Text, {"title"}},
        {"ISSN", ColumnKind::Text, {}},
        {"Publisher", ColumnKind::Category, {}},
        {"Journal Impact Factor", ColumnKind::Numeric, {"jif", "impactfactor"}},
        {"Journal Homepage", ColumnKind::Text, {"homepage"}},
        {"Website", ColumnKind::Text, {"journalwebsite"}},
        {"Cite Score", ColumnKind::Numeric, {}},
        {"SJR", ColumnKind::Numeric, {"scimagojournalranking"}},
        {"SNIP", ColumnKind::Numeric, {"sourcenormalizedimpactperpaper"}},
        {"Country", ColumnKind::Category, {}},
        {"Coverage", ColumnKind::Text, {}},
        {"Hirsch Index", ColumnKind::Numeric, {"hindex"}},
        {"Eigenfactor Score", ColumnKind::Numeric, {"eigenfactor"}},
        {"Article Influence Score", ColumnKind::Numeric, {"ais"}},
        {"Immediacy Index", ColumnKind::Numeric, {"immediacyscore", "immediacyscoreindex", "immediacyfactor"}},
        {"Cited Half-Life", ColumnKind::Numeric, {"citedhalflife"}},
        {"Total Articles", ColumnKind::Numeric, {}},
        {"Open Access", ColumnKind::Text, {}},
        {"5 Year Impact Factor", ColumnKind::Numeric,
         {"5yearsimpactfactor", "fiveyearimpactfactor", "5yrimpactfactor"}},
        {"Issues Per Year", ColumnKind::Numeric,
         {"noofissuesperyear", "numberofissuesperyear", "issuesyear"}},
    };
    return schema;
}

inline std::optional<std::size_t> schema_column_index(const std::string& header) {
    const std::string c = canon_header(header);
    const auto& schema = journal_schema();
    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (canon_header(schema[i].name) == c) return i;
        for (const auto& alias : schema[i].aliases) {
            if (alias == c) return i;
        }
    }
    return std::nullopt;
}

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::string to_lower(const std::string& s) {
    std::string out = s;
    for (char& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
}

// Recognized missing markers: empty cell, "N/A", "NA", "-" (case-insensitive).
inline bool is_missing_marker(const std::string& cell) {
    const std::string t = to_lower(trim(cell));
    return t.empty() || t == "n/a" || t == "na" || t == "-";
}

// Strict full-string parse of a finite nonnegative number.
inline std::optional<double> parse_nonneg_real(const std::string& cell) {
    const std::string t = trim(cell);
    if (t.empty()) return std::nullopt;
    const char* begin = t.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end != begin + t.size()) return std::nullopt;
    if (!std::isfinite(v) || v < 0.0) return std::nullopt;
    return v;
}

// Generic tabular container. Cell text is preserved verbatim so that a
// write/load cycle is bit-exact; missingness is carried in an explicit mask.
struct RawTable {
    std::vector<std::string> column_names;
    std::vector<std::vector<std::string>> cells;          // row-major
    std::vector<std::vector<std::uint8_t>> missing_mask;  // row-major, parallel to cells

    std::size_t n_rows() const { return cells.size(); }
    std::size_t n_cols() const { return column_names.size(); }

    std::optional<std::size_t> find_column(const std::string& name) const {
        const std::string c = canon_header(name);
        for (std::size_t j = 0; j < column_names.size(); ++j) {
            if (canon_header(column_names[j]) == c) return j;
        }
        return std::nullopt;
    }

    bool operator==(const RawTable& other) const {
        return column_names == other.column_names && cells == other.cells &&
               missing_mask == other.missing_mask;
    }
};

namespace detail {

inline std::vector<std::vector<std::string>> parse_rectangular_csv(std::istream& in) {
    auto rows = parse_csv(in);
    if (rows.empty()) throw EmptyTableError("CSV input has no header row");
    const std::size_t arity = rows[0].size();
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != arity) {
            throw CsvFormatError("row " + std::to_string(r) + " has " +
                                 std::to_string(rows[r].size()) + " cells, header has " +
                                 std::to_string(arity));
        }
    }
    return rows;
}

}  // namespace detail

// Schema-free CSV table read; missingness from the marker list only.
inline RawTable read_csv_table(std::istream& in) {
    auto rows = detail::parse_rectangular_csv(in);
    RawTable t;
    t.column_names = rows[0];
    for (std::size_t r = 1; r < rows.size(); ++r) {
        std::vector<std::uint8_t> miss(rows[r].size());
        for (std::size_t j = 0; j < rows[r].size(); ++j) {
            miss[j] = is_missing_marker(rows[r][j]) ? 1 : 0;
        }
        t.cells.push_back(std::move(rows[r]));
        t.missing_mask.push_back(std::move(miss));
    }
    return t;
}

// Load a journal table, matching columns to the 20-column schema by
// canonicalized header. Columns come out in schema order under canonical
// names; unknown input columns are ignored. Unparseable numeric cells are
// marked missing rather than zeroed.
inline RawTable load_table(std::istream& in, bool allow_empty = false) {
    auto rows = detail::parse_rectangular_csv(in);
    const auto& schema = journal_schema();

    std::vector<std::optional<std::size_t>> source_of(schema.size());
    for (std::size_t j = 0; j < rows[0].size(); ++j) {
        const auto idx = schema_column_index(rows[0][j]);
        if (!idx) continue;
        if (source_of[*idx]) {
            throw DuplicateColumnError("duplicate column \"" + schema[*idx].name + "\"");
        }
        source_of[*idx] = j;
    }
    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (!source_of[i]) throw MissingColumnError("missing column \"" + schema[i].name + "\"");
    }
    if (rows.size() <= 1 && !allow_empty) throw EmptyTableError("table has 0 data rows");

    RawTable t;
    for (const auto& col : schema) t.column_names.push_back(col.name);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        std::vector<std::string> out_cells(schema.size());
        std::vector<std::uint8_t> miss(schema.size(), 0);
        for (std::size_t i = 0; i < schema.size(); ++i) {
            const std::string& cell = rows[r][*source_of[i]];
            out_cells[i] = cell;
            if (is_missing_marker(cell)) {
                miss[i] = 1;
            } else if (schema[i].kind == ColumnKind::Numeric && !parse_nonneg_real(cell)) {
                miss[i] = 1;
            }
        }
        t.cells.push_back(std::move(out_cells));
        t.missing_mask.push_back(std::move(miss));
    }
    return t;
}

inline RawTable load_table_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open input file: " + path);
    return load_table(in);
}

inline void write_csv(const RawTable& t, std::ostream& out) {
    write_csv_row(out, t.column_names);
    for (const auto& row : t.cells) write_csv_row(out, row);
}

inline std::string table_to_csv_string(const RawTable& t) {
    std::ostringstream os;
    write_csv(t, os);
    return os.str();
}

struct ValidationReport {
    std::vector<std::size_t> missing_per_column;
    std::size_t rows_with_missing = 0;
    std::size_t total_missing = 0;
};

inline ValidationReport validate_schema(const RawTable& t) {
    ValidationReport rep;
    rep.missing_per_column.assign(t.n_cols(), 0);
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
        bool any = false;
        for (std::size_t j = 0; j < t.n_cols(); ++j) {
            if (t.missing_mask[r][j]) {
                ++rep.missing_per_column[j];
                ++rep.total_missing;
                any = true;
            }
        }
        if (any) ++rep.rows_with_missing;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Synthetic data. The generator draws three latent quality tiers whose
// bibliometric indicator means are at least 3 standard deviations apart, so
// downstream clustering and classification have a separable target to hit.
// The latent tier is returned out-of-band for oracle tests.
// ---------------------------------------------------------------------------

struct SyntheticDataset {
    RawTable table;
    std::vector<int> tiers;  // 0 = low, 1 = medium, 2 = high, aligned with rows
};

namespace detail {

inline std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v < 0.0 ? 0.0 : v);
    return std::string(buf);
}

struct TierSpec {
    double mean[3];
    double sd[3];
    int decimals;
};

}  // namespace detail

inline SyntheticDataset synthesize_dataset(std::size_t n, std::uint64_t seed) {
    if (n < 9) {
        throw InvalidSizeError("synthesize_dataset needs n >= 9 to fill 3 tiers, got " +
                               std::to_string(n));
    }
    Rng rng(mix_seed(seed, 0x6a636174u));  // independent of any other stream

    const std::size_t base = n / 3, rem = n % 3;
    const std::size_t tier_count[3] = {base + (rem > 0 ? 1 : 0), base + (rem > 1 ? 1 : 0), base};

    static const std::vector<std::string> kPublishers = {
        "Elsevier",        "Springer",  "Wiley-Blackwell",
        "IEEE",            "Taylor & Francis", "SAGE",
        "Oxford University Press", "Cambridge University Press",
        "De Gruyter, Inc.", "MDPI",     "Hindawi",
        "Frontiers Media"};
    static const std::vector<std::string> kCountries = {
        "USA",   "United Kingdom", "Germany", "Netherlands", "Switzerland",
        "China", "India",          "Pakistan", "Brazil",     "Japan"};
    static const std::vector<std::string> kFields = {
        "Applied",  "Theoretical", "Computational", "Experimental", "Clinical",
        "Advanced", "Molecular",   "Quantitative",  "Environmental", "Structural"};
    static const std::vector<std::string> kTopics = {
        "Dynamics",  "Informatics", "Materials",  "Medicine",  "Economics",
        "Ecology",   "Photonics",   "Statistics", "Chemistry", "Linguistics"};
    static const std::vector<std::string> kYes = {"Yes", "yes", "YES"};
    static const std::vector<std::string> kNo = {"No", "no", "NO"};
    static const std::vector<std::string> kMissing = {"N/A", "", "-", "NA"};

    const detail::TierSpec jif{{1.2, 4.2, 9.0}, {0.6, 0.6, 0.6}, 3};
    const detail::TierSpec cite_score{{1.5, 5.0, 11.0}, {0.8, 0.8, 0.8}, 2};
    const detail::TierSpec sjr{{0.30, 1.50, 4.00}, {0.25, 0.25, 0.25}, 3};
    const detail::TierSpec snip{{0.40, 1.20, 2.60}, {0.20, 0.20, 0.20}, 3};
    const detail::TierSpec hirsch{{15, 60, 160}, {5, 12, 25}, 0};
    const detail::TierSpec eigenfactor{{0.002, 0.020, 0.080}, {0.0005, 0.004, 0.015}, 5};
    const detail::TierSpec ais{{0.30, 1.20, 3.50}, {0.10, 0.10, 0.10}, 3};
    const detail::TierSpec immediacy{{0.20, 0.90, 2.50}, {0.15, 0.15, 0.15}, 3};
    const detail::TierSpec chl{{3.5, 6.5, 10.5}, {0.7, 0.7, 0.7}, 1};
    const detail::TierSpec fiveyear{{1.4, 4.5, 9.5}, {0.6, 0.6, 0.6}, 3};
    const double open_access_prob[3] = {0.15, 0.55, 0.92};
    const double coverage_mean[3] = {12, 25, 40};
    const double coverage_sd[3] = {5, 8, 8};
    const int reference_year = 2021;

    auto draw = [&](const detail::TierSpec& s, int tier) {
        return detail::format_fixed(rng.normal(s.mean[tier], s.sd[tier]), s.decimals);
    };

    RawTable t;
    for (const auto& col : journal_schema()) t.column_names.push_back(col.name);
    std::vector<int> tiers;

    std::size_t serial = 0;
    for (int tier = 0; tier < 3; ++tier) {
        for (std::size_t i = 0; i < tier_count[tier]; ++i, ++serial) {
            std::vector<std::string> row(20);
            char buf[96];

            const auto& field = kFields[rng.uniform_index(kFields.size())];
            const auto& topic = kTopics[rng.uniform_index(kTopics.size())];
            std::snprintf(buf, sizeof(buf), "Journal of %s %s %04zu", field.c_str(),
                          topic.c_str(), serial);
            row[0] = buf;

            std::snprintf(buf, sizeof(buf), "%04u-%04u",
                          static_cast<unsigned>(rng.uniform_index(9000) + 1000),
                          static_cast<unsigned>(rng.uniform_index(9000) + 1000));
            row[1] = buf;

            // Publisher leans toward a per-tier subset; mirrors the kind of
            // publisher/quality association the classifiers should pick up.
            if (rng.uniform() < 0.65) {
                const std::size_t off = static_cast<std::size_t>(2 - tier) * 4;
                row[2] = kPublishers[off + rng.uniform_index(4)];
            } else {
                row[2] = kPublishers[rng.uniform_index(kPublishers.size())];
            }

            row[3] = draw(jif, tier);

            std::snprintf(buf, sizeof(buf), "https://journals.example.org/j%04zu", serial);
            row[4] = buf;
            std::snprintf(buf, sizeof(buf), "https://www.example.org/j%04zu", serial);
            row[5] = buf;

            row[6] = draw(cite_score, tier);
            row[7] = draw(sjr, tier);
            row[8] = draw(snip, tier);
            row[9] = kCountries[rng.uniform_index(kCountries.size())];

            int years = static_cast<int>(std::lround(rng.normal(coverage_mean[tier], coverage_sd[tier])));
            if (years < 1) years = 1;
            if (years > 120) years = 120;
            const int start_year = reference_year - years + 1;
            const double style = rng.uniform();
            if (style < 0.5) {
                std::snprintf(buf, sizeof(buf), "%d-present", start_year);
            } else if (style < 0.8) {
                std::snprintf(buf, sizeof(buf), "%d-%d", start_year, reference_year - 1);
            } else {
                std::snprintf(buf, sizeof(buf), "%d", start_year);
            }
            row[10] = buf;

            row[11] = draw(hirsch, tier);
            row[12] = draw(eigenfactor, tier);
            row[13] = draw(ais, tier);
            row[14] = draw(immediacy, tier);
            row[15] = draw(chl, tier);

            // Mostly unavailable, as with real exports of this field.
            if (rng.uniform() < 0.7) {
                row[16] = kMissing[rng.uniform_index(kMissing.size())];
            } else {
                row[16] = std::to_string(20 + rng.uniform_index(381));
            }

            const bool open = rng.uniform() < open_access_prob[tier];
            row[17] = open ? kYes[rng.uniform_index(kYes.size())]
                           : kNo[rng.uniform_index(kNo.size())];

            row[18] = draw(fiveyear, tier);
            row[19] = std::to_string(2 + rng.uniform_index(23));

            std::vector<std::uint8_t> miss(20, 0);
            for (std::size_t j = 0; j < 20; ++j) {
                if (is_missing_marker(row[j])) miss[j] = 1;
            }
            t.cells.push_back(std::move(row));
            t.missing_mask.push_back(std::move(miss));
            tiers.push_back(tier);
        }
    }

    // Interleave tiers so row order carries no signal.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    SyntheticDataset out;
    out.table.column_names = t.column_names;
    for (std::size_t i = 0; i < n; ++i) {
        out.table.cells.push_back(t.cells[order[i]]);
        out.table.missing_mask.push_back(t.missing_mask[order[i]]);
        out.tiers.push_back(tiers[order[i]]);
    }
    return out;
}

}  // namespace jcat
