#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "jcat/errors.hpp"
#include "jcat/table.hpp"

namespace jcat {

enum class FeatureKind { Numeric, EncodedCategorical };

inline std::string feature_kind_name(FeatureKind k) {
    return k == FeatureKind::Numeric ? "numeric" : "encoded-categorical";
}

inline FeatureKind feature_kind_from_name(const std::string& s) {
    if (s == "numeric") return FeatureKind::Numeric;
    if (s == "encoded-categorical") return FeatureKind::EncodedCategorical;
    throw Error("unknown feature kind: " + s);
}

// Numeric table: encoded but not yet scaled. Missing cells hold NaN and are
// flagged in the mask; the mask is authoritative.
struct NumericTable {
    std::vector<std::string> column_names;
    std::vector<FeatureKind> kinds;
    std::vector<std::vector<double>> values;           // row-major
    std::vector<std::vector<std::uint8_t>> missing;    // row-major

    std::size_t n_rows() const { return values.size(); }
    std::size_t n_cols() const { return column_names.size(); }
};

// Fully numeric, min-max-scaled matrix. Every cell is finite and in [0,1].
struct FeatureMatrix {
    std::vector<std::vector<double>> values;  // row-major
    std::vector<std::string> feature_names;
    std::vector<FeatureKind> kinds;

    std::size_t n_rows() const { return values.size(); }
    std::size_t n_features() const { return feature_names.size(); }

    std::size_t feature_index(const std::string& name) const {
        for (std::size_t j = 0; j < feature_names.size(); ++j) {
            if (feature_names[j] == name) return j;
        }
        throw UnknownFeatureError("unknown feature \"" + name + "\"");
    }

    std::vector<double> column(std::size_t j) const {
        std::vector<double> out(n_rows());
        for (std::size_t i = 0; i < n_rows(); ++i) out[i] = values[i][j];
        return out;
    }
};

// Restrict a matrix to the named features, in the given order.
inline FeatureMatrix select_features(const FeatureMatrix& X, const std::vector<std::string>& names) {
    std::vector<std::size_t> idx;
    idx.reserve(names.size());
    for (const auto& n : names) idx.push_back(X.feature_index(n));
    FeatureMatrix out;
    out.feature_names = names;
    for (std::size_t j : idx) out.kinds.push_back(X.kinds[j]);
    out.values.reserve(X.n_rows());
    for (const auto& row : X.values) {
        std::vector<double> r;
        r.reserve(idx.size());
        for (std::size_t j : idx) r.push_back(row[j]);
        out.values.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Column dropping
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& identifier_columns() {
    static const std::vector<std::string> cols = {"Full Title", "Website", "Journal Homepage",
                                                  "ISSN", "Total Articles"};
    return cols;
}

struct DropResult {
    RawTable table;
    std::vector<std::string> warnings;  // one entry per already-absent column
};

// Removes the five identifier columns. Idempotent: absent columns warn.
inline DropResult drop_identifier_columns(const RawTable& t) {
    DropResult out;
    std::vector<bool> drop(t.n_cols(), false);
    for (const auto& name : identifier_columns()) {
        const auto j = t.find_column(name);
        if (j) {
            drop[*j] = true;
        } else {
            out.warnings.push_back("column \"" + name + "\" not present; nothing to drop");
        }
    }
    for (std::size_t j = 0; j < t.n_cols(); ++j) {
        if (!drop[j]) out.table.column_names.push_back(t.column_names[j]);
    }
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
        std::vector<std::string> cells;
        std::vector<std::uint8_t> miss;
        for (std::size_t j = 0; j < t.n_cols(); ++j) {
            if (!drop[j]) {
                cells.push_back(t.cells[r][j]);
                miss.push_back(t.missing_mask[r][j]);
            }
        }
        out.table.cells.push_back(std::move(cells));
        out.table.missing_mask.push_back(std::move(miss));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& open_access_yes_spellings() {
    static const std::vector<std::string> v = {"yes", "y", "true", "1", "open", "open access"};
    return v;
}

inline const std::vector<std::string>& open_access_no_spellings() {
    static const std::vector<std::string> v = {"no", "n", "false", "0", "closed", "subscription"};
    return v;
}

// Per-column category vocabulary plus the reference year for coverage
// arithmetic. Codes are dense 0..k-1 in lexicographic (byte-wise) order of
// the category text, so encoding is deterministic and locale-independent.
struct EncodingMap {
    int reference_year = 2021;
    // column name -> lexicographically sorted category list
    std::vector<std::pair<std::string, std::vector<std::string>>> categories;

    const std::vector<std::string>* vocabulary(const std::string& column) const {
        for (const auto& [name, cats] : categories) {
            if (name == column) return &cats;
        }
        return nullptr;
    }

    std::optional<int> encode_category(const std::string& column, const std::string& text) const {
        const auto* cats = vocabulary(column);
        if (!cats) return std::nullopt;
        const auto it = std::lower_bound(cats->begin(), cats->end(), text);
        if (it == cats->end() || *it != text) return std::nullopt;
        return static_cast<int>(it - cats->begin());
    }

    const std::string& decode_category(const std::string& column, int code) const {
        const auto* cats = vocabulary(column);
        if (!cats || code < 0 || static_cast<std::size_t>(code) >= cats->size()) {
            throw Error("cannot decode code " + std::to_string(code) + " for column \"" + column + "\"");
        }
        return (*cats)[static_cast<std::size_t>(code)];
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["format_version"] = 1;
        j["reference_year"] = reference_year;
        j["open_access_yes"] = open_access_yes_spellings();
        j["open_access_no"] = open_access_no_spellings();
        j["columns"] = nlohmann::json::array();
        for (const auto& [name, cats] : categories) {
            j["columns"].push_back({{"name", name}, {"categories", cats}});
        }
        return j;
    }

    static EncodingMap from_json(const nlohmann::json& j) {
        EncodingMap m;
        m.reference_year = j.at("reference_year").get<int>();
        for (const auto& col : j.at("columns")) {
            m.categories.emplace_back(col.at("name").get<std::string>(),
                                      col.at("categories").get<std::vector<std::string>>());
        }
        return m;
    }
};

inline std::optional<bool> parse_open_access(const std::string& cell) {
    const std::string t = to_lower(trim(cell));
    for (const auto& s : open_access_yes_spellings()) {
        if (t == s) return true;
    }
    for (const auto& s : open_access_no_spellings()) {
        if (t == s) return false;
    }
    return std::nullopt;
}

// Years of coverage: reference_year - start_year + 1, both endpoints counted.
// start_year is the first run of exactly four digits in the text.
inline int parse_coverage_years(const std::string& text, int reference_year) {
    const std::string t = trim(text);
    int year = -1;
    for (std::size_t i = 0; i < t.size();) {
        if (!std::isdigit(static_cast<unsigned char>(t[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < t.size() && std::isdigit(static_cast<unsigned char>(t[j]))) ++j;
        if (j - i == 4) {
            year = std::stoi(t.substr(i, 4));
            break;
        }
        i = j;
    }
    if (year < 0) throw UnparseableCoverageError("no 4-digit year in coverage \"" + text + "\"");
    if (year > reference_year) {
        throw FutureStartYearError("coverage start year " + std::to_string(year) +
                                   " is after reference year " + std::to_string(reference_year));
    }
    return reference_year - year + 1;
}

struct EncodeResult {
    NumericTable table;
    EncodingMap map;
};

namespace detail {

enum class EncodeRole { OpenAccess, Coverage, Category, Real };

inline EncodeRole encode_role(const std::string& column_name) {
    const std::string c = canon_header(column_name);
    if (c == "openaccess") return EncodeRole::OpenAccess;
    if (c == "coverage" || c == "coverageinyears") return EncodeRole::Coverage;
    if (c == "publisher" || c == "country") return EncodeRole::Category;
    return EncodeRole::Real;
}

inline void reject_identifier_columns(const RawTable& t) {
    for (const auto& name : identifier_columns()) {
        if (t.find_column(name)) {
            throw Error("identifier column \"" + name + "\" present; drop identifier columns before encoding");
        }
    }
}

enum class UnseenCategoryPolicy { Reject, ReserveNewCode };

inline NumericTable encode_with_map(const RawTable& t, const EncodingMap& map,
                                    UnseenCategoryPolicy unseen_policy) {
    reject_identifier_columns(t);
    NumericTable out;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    std::vector<EncodeRole> roles;
    for (const auto& name : t.column_names) {
        const EncodeRole role = encode_role(name);
        roles.push_back(role);
        out.column_names.push_back(role == EncodeRole::Coverage ? "Coverage in Years" : name);
        out.kinds.push_back(role == EncodeRole::Real || role == EncodeRole::Coverage
                                ? FeatureKind::Numeric
                                : FeatureKind::EncodedCategorical);
    }

    for (std::size_t r = 0; r < t.n_rows(); ++r) {
        std::vector<double> vals(t.n_cols(), nan);
        std::vector<std::uint8_t> miss(t.n_cols(), 1);
        for (std::size_t j = 0; j < t.n_cols(); ++j) {
            if (t.missing_mask[r][j]) continue;
            const std::string& cell = t.cells[r][j];
            switch (roles[j]) {
                case EncodeRole::OpenAccess: {
                    const auto oa = parse_open_access(cell);
                    if (!oa) {
                        throw UnrecognizedOpenAccessError("row " + std::to_string(r) +
                                                          ": unrecognized open access value \"" + cell + "\"");
                    }
                    vals[j] = *oa ? 1.0 : 0.0;
                    break;
                }
                case EncodeRole::Coverage:
                    vals[j] = parse_coverage_years(cell, map.reference_year);
                    break;
                case EncodeRole::Category: {
                    auto code = map.encode_category(t.column_names[j], cell);
                    if (!code) {
                        if (unseen_policy == UnseenCategoryPolicy::Reject) {
                            throw UnseenCategoryError("row " + std::to_string(r) + ", column \"" +
                                                      t.column_names[j] + "\": unseen category \"" + cell + "\"");
                        }
                        const auto* cats = map.vocabulary(t.column_names[j]);
                        code = cats ? static_cast<int>(cats->size()) : 0;
                    }
                    vals[j] = static_cast<double>(*code);
                    break;
                }
                case EncodeRole::Real: {
                    const auto v = parse_nonneg_real(cell);
                    if (!v) continue;  // stays missing
                    vals[j] = *v;
                    break;
                }
            }
            miss[j] = 0;
        }
        out.values.push_back(std::move(vals));
        out.missing.push_back(std::move(miss));
    }
    return out;
}

}  // namespace detail

// Encode a cleaned table: open access to 0/1, coverage text to years,
// publisher and country to dense lexicographic codes, everything else
// parsed as reals. Builds the EncodingMap from the observed categories.
inline EncodeResult encode_record_fields(const RawTable& t, int reference_year) {
    detail::reject_identifier_columns(t);
    EncodeResult out;
    out.map.reference_year = reference_year;
    for (std::size_t j = 0; j < t.n_cols(); ++j) {
        if (detail::encode_role(t.column_names[j]) != detail::EncodeRole::Category) continue;
        std::vector<std::string> cats;
        for (std::size_t r = 0; r < t.n_rows(); ++r) {
            if (!t.missing_mask[r][j]) cats.push_back(t.cells[r][j]);
        }
        std::sort(cats.begin(), cats.end());
        cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
        out.map.categories.emplace_back(t.column_names[j], std::move(cats));
    }
    out.table = detail::encode_with_map(t, out.map, detail::UnseenCategoryPolicy::Reject);
    return out;
}

// Encode held-out data with a stored map (the predict path).
inline NumericTable apply_encoding(const RawTable& t, const EncodingMap& map,
                                   bool unseen_as_new_code = false) {
    return detail::encode_with_map(t, map,
                                   unseen_as_new_code ? detail::UnseenCategoryPolicy::ReserveNewCode
                                                      : detail::UnseenCategoryPolicy::Reject);
}

// ---------------------------------------------------------------------------
// Imputation
// ---------------------------------------------------------------------------

enum class ImputePolicy { Fail, ColumnMedian };

inline ImputePolicy impute_policy_from_name(const std::string& s) {
    if (s == "fail") return ImputePolicy::Fail;
    if (s == "column-median") return ImputePolicy::ColumnMedian;
    throw ConfigError("unknown imputation policy \"" + s + "\" (expected fail or column-median)");
}

inline NumericTable impute_missing(const NumericTable& t, ImputePolicy policy) {
    NumericTable out = t;
    for (std::size_t j = 0; j < t.n_cols(); ++j) {
        std::vector<double> observed;
        for (std::size_t r = 0; r < t.n_rows(); ++r) {
            if (!t.missing[r][j]) observed.push_back(t.values[r][j]);
        }
        if (observed.size() == t.n_rows()) continue;
        if (policy == ImputePolicy::Fail) {
            for (std::size_t r = 0; r < t.n_rows(); ++r) {
                if (t.missing[r][j]) {
                    throw MissingCellError("missing cell at row " + std::to_string(r) + ", column \"" +
                                           t.column_names[j] + "\" (policy fail)");
                }
            }
        }
        if (observed.empty()) {
            throw AllMissingColumnError("column \"" + t.column_names[j] +
                                        "\" has no observed values; median undefined");
        }
        std::sort(observed.begin(), observed.end());
        const std::size_t m = observed.size();
        const double median = (m % 2 == 1) ? observed[m / 2]
                                           : 0.5 * (observed[m / 2 - 1] + observed[m / 2]);
        for (std::size_t r = 0; r < t.n_rows(); ++r) {
            if (out.missing[r][j]) {
                out.values[r][j] = median;
                out.missing[r][j] = 0;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scaling
// ---------------------------------------------------------------------------

// Observed per-column (min, max) from the fit; reused on held-out data.
struct ScaleParams {
    std::vector<std::string> column_names;
    std::vector<FeatureKind> kinds;
    std::vector<double> mins;
    std::vector<double> maxs;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["format_version"] = 1;
        j["columns"] = nlohmann::json::array();
        for (std::size_t i = 0; i < column_names.size(); ++i) {
            j["columns"].push_back({{"name", column_names[i]},
                                    {"kind", feature_kind_name(kinds[i])},
                                    {"min", mins[i]},
                                    {"max", maxs[i]}});
        }
        return j;
    }

    static ScaleParams from_json(const nlohmann::json& j) {
        ScaleParams p;
        for (const auto& col : j.at("columns")) {
            p.column_names.push_back(col.at("name").get<std::string>());
            p.kinds.push_back(feature_kind_from_name(col.at("kind").get<std::string>()));
            p.mins.push_back(col.at("min").get<double>());
            p.maxs.push_back(col.at("max").get<double>());
        }
        return p;
    }
};

struct ScaleResult {
    FeatureMatrix matrix;
    ScaleParams params;
};

namespace detail {

inline double scale_cell(double x, double lo, double hi) {
    if (hi <= lo) return 0.0;  // constant column maps to 0 everywhere
    double v = (x - lo) / (hi - lo);
    if (v < 0.0) v = 0.0;  // held-out rows may fall outside the fit range
    if (v > 1.0) v = 1.0;
    return v;
}

}  // namespace detail

// Fit min-max parameters on the table and scale it into [0,1].
inline ScaleResult min_max_scale(const NumericTable& t) {
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
        for (std::size_t j = 0; j < t.n_cols(); ++j) {
            if (t.missing[r][j] || !std::isfinite(t.values[r][j])) {
                throw MissingCellError("cannot scale: row " + std::to_string(r) + ", column \"" +
                                       t.column_names[j] + "\" is missing or non-finite");
            }
        }
    }
    ScaleResult out;
    out.params.column_names = t.column_names;
    out.params.kinds = t.kinds;
    out.params.mins.assign(t.n_cols(), std::numeric_limits<double>::infinity());
    out.params.maxs.assign(t.n_cols(), -std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
        for (std::size_t j = 0; j < t.n_cols(); ++j) {
            out.params.mins[j] = std::min(out.params.mins[j], t.values[r][j]);
            out.params.maxs[j] = std::max(out.params.maxs[j], t.values[r][j]);
        }
    }
    out.matrix.feature_names = t.column_names;
    out.matrix.kinds = t.kinds;
    out.matrix.values.reserve(t.n_rows());
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
        std::vector<double> row(t.n_cols());
        for (std::size_t j = 0; j < t.n_cols(); ++j) {
            row[j] = detail::scale_cell(t.values[r][j], out.params.mins[j], out.params.maxs[j]);
        }
        out.matrix.values.push_back(std::move(row));
    }
    return out;
}

// Scale held-out data with stored parameters; out-of-range values clamp to [0,1].
inline FeatureMatrix apply_scale(const NumericTable& t, const ScaleParams& p) {
    if (t.n_cols() != p.column_names.size()) {
        throw SchemaMismatchError("scale params have " + std::to_string(p.column_names.size()) +
                                  " columns, table has " + std::to_string(t.n_cols()));
    }
    for (std::size_t j = 0; j < t.n_cols(); ++j) {
        if (t.column_names[j] != p.column_names[j]) {
            throw SchemaMismatchError("column \"" + t.column_names[j] +
                                      "\" does not match stored column \"" + p.column_names[j] + "\"");
        }
    }
    FeatureMatrix out;
    out.feature_names = t.column_names;
    out.kinds = p.kinds;
    out.values.reserve(t.n_rows());
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
        std::vector<double> row(t.n_cols());
        for (std::size_t j = 0; j < t.n_cols(); ++j) {
            if (t.missing[r][j]) {
                throw MissingCellError("cannot scale: row " + std::to_string(r) + ", column \"" +
                                       t.column_names[j] + "\" is missing");
            }
            row[j] = detail::scale_cell(t.values[r][j], p.mins[j], p.maxs[j]);
        }
        out.values.push_back(std::move(row));
    }
    return out;
}

}  // namespace jcat
