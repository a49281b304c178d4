#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "jcat/pipeline.hpp"
#include "jcat/preprocess.hpp"
#include "jcat/table.hpp"

using namespace jcat;

namespace {

RawTable tiny_cleaned_table() {
    // Already free of identifier columns.
    RawTable t;
    t.column_names = {"Publisher", "Journal Impact Factor", "Country", "Coverage", "Open Access"};
    t.cells = {
        {"Elsevier", "3.5", "Germany", "1999-present", "Yes"},
        {"Springer", "1.25", "Pakistan", "2010", "no"},
        {"MDPI", "0.5", "UK", "2002-2018", "YES"},
    };
    t.missing_mask.assign(3, std::vector<std::uint8_t>(5, 0));
    return t;
}

}  // namespace

TEST_CASE("drop_identifier_columns removes exactly the five identifier columns") {
    const SyntheticDataset d = synthesize_dataset(12, 5);
    const DropResult res = drop_identifier_columns(d.table);
    CHECK(res.table.n_cols() == 15);
    CHECK(res.warnings.empty());
    for (const auto& name : identifier_columns()) {
        CHECK_FALSE(res.table.find_column(name).has_value());
    }
    // untouched columns keep their order and contents
    CHECK(res.table.column_names[0] == "Publisher");
    CHECK(res.table.column_names[1] == "Journal Impact Factor");
    const std::size_t pub_src = *d.table.find_column("Publisher");
    for (std::size_t r = 0; r < d.table.n_rows(); ++r) {
        CHECK(res.table.cells[r][0] == d.table.cells[r][pub_src]);
    }
}

TEST_CASE("drop_identifier_columns is idempotent and warns on absent columns") {
    const SyntheticDataset d = synthesize_dataset(12, 5);
    const DropResult once = drop_identifier_columns(d.table);
    const DropResult twice = drop_identifier_columns(once.table);
    CHECK(twice.table == once.table);
    CHECK(twice.warnings.size() == 5);
}

TEST_CASE("open access encodes yes to 1 and no to 0") {
    const RawTable t = tiny_cleaned_table();
    const EncodeResult res = encode_record_fields(t, 2021);
    const std::size_t oa = 4;
    CHECK(res.table.values[0][oa] == 1.0);
    CHECK(res.table.values[1][oa] == 0.0);
    CHECK(res.table.values[2][oa] == 1.0);
    CHECK(res.table.kinds[oa] == FeatureKind::EncodedCategorical);
}

TEST_CASE("unrecognized open access value is an error") {
    RawTable t = tiny_cleaned_table();
    t.cells[1][4] = "sometimes";
    CHECK_THROWS_AS(encode_record_fields(t, 2021), UnrecognizedOpenAccessError);
}

TEST_CASE("coverage becomes years including both endpoints") {
    CHECK(parse_coverage_years("1999-present", 2021) == 23);
    CHECK(parse_coverage_years("1999–present", 2021) == 23);  // en dash
    CHECK(parse_coverage_years("2021", 2021) == 1);
    CHECK(parse_coverage_years("2002-2018", 2021) == 20);
    CHECK(parse_coverage_years("since 2010", 2021) == 12);
    CHECK_THROWS_AS(parse_coverage_years("unknown", 2021), UnparseableCoverageError);
    CHECK_THROWS_AS(parse_coverage_years("12345", 2021), UnparseableCoverageError);
    CHECK_THROWS_AS(parse_coverage_years("2030-present", 2021), FutureStartYearError);
}

TEST_CASE("coverage column is renamed and computed against the reference year") {
    const RawTable t = tiny_cleaned_table();
    const EncodeResult res = encode_record_fields(t, 2021);
    const std::size_t cov = 3;
    CHECK(res.table.column_names[cov] == "Coverage in Years");
    CHECK(res.table.values[0][cov] == 23.0);
    CHECK(res.table.values[1][cov] == 12.0);
    CHECK(res.table.values[2][cov] == 20.0);

    const EncodeResult res24 = encode_record_fields(t, 2024);
    CHECK(res24.table.values[0][cov] == 26.0);
}

TEST_CASE("categories get dense lexicographic codes") {
    const RawTable t = tiny_cleaned_table();
    const EncodeResult res = encode_record_fields(t, 2021);
    // countries {Germany, Pakistan, UK} -> {0, 1, 2}
    CHECK(res.table.values[0][2] == 0.0);
    CHECK(res.table.values[1][2] == 1.0);
    CHECK(res.table.values[2][2] == 2.0);
    // publishers {Elsevier, MDPI, Springer} sorted -> Elsevier 0, MDPI 1, Springer 2
    CHECK(res.table.values[0][0] == 0.0);
    CHECK(res.table.values[1][0] == 2.0);
    CHECK(res.table.values[2][0] == 1.0);
}

TEST_CASE("encoding map is invertible over every encoded cell") {
    const SyntheticDataset d = synthesize_dataset(60, 9);
    const DropResult cleaned = drop_identifier_columns(d.table);
    const EncodeResult res = encode_record_fields(cleaned.table, 2021);
    for (const auto& column : {"Publisher", "Country"}) {
        const std::size_t src = *cleaned.table.find_column(column);
        for (std::size_t r = 0; r < cleaned.table.n_rows(); ++r) {
            const int code = static_cast<int>(res.table.values[r][src]);
            CHECK(res.map.decode_category(column, code) == cleaned.table.cells[r][src]);
        }
    }
}

TEST_CASE("encoding rejects tables that still carry identifier columns") {
    const SyntheticDataset d = synthesize_dataset(12, 5);
    CHECK_THROWS_AS(encode_record_fields(d.table, 2021), Error);
}

TEST_CASE("apply_encoding rejects unseen categories unless told otherwise") {
    const RawTable t = tiny_cleaned_table();
    const EncodeResult res = encode_record_fields(t, 2021);

    RawTable t2 = tiny_cleaned_table();
    t2.cells[0][2] = "France";
    CHECK_THROWS_AS(apply_encoding(t2, res.map, false), UnseenCategoryError);
    const NumericTable mapped = apply_encoding(t2, res.map, true);
    CHECK(mapped.values[0][2] == 3.0);  // reserved code = vocabulary size
}

TEST_CASE("encoding map survives JSON round trip") {
    const RawTable t = tiny_cleaned_table();
    const EncodeResult res = encode_record_fields(t, 2021);
    const EncodingMap back = EncodingMap::from_json(res.map.to_json());
    CHECK(back.reference_year == res.map.reference_year);
    CHECK(back.categories == res.map.categories);
}

TEST_CASE("impute: no missing cells leaves the table unchanged") {
    const RawTable t = tiny_cleaned_table();
    const EncodeResult res = encode_record_fields(t, 2021);
    const NumericTable a = impute_missing(res.table, ImputePolicy::Fail);
    const NumericTable b = impute_missing(res.table, ImputePolicy::ColumnMedian);
    CHECK(a.values == res.table.values);
    CHECK(b.values == res.table.values);
}

TEST_CASE("impute: column median fills holes") {
    NumericTable t;
    t.column_names = {"x"};
    t.kinds = {FeatureKind::Numeric};
    t.values = {{1.0}, {0.0}, {3.0}};
    t.missing = {{0}, {1}, {0}};
    const NumericTable filled = impute_missing(t, ImputePolicy::ColumnMedian);
    CHECK(filled.values[1][0] == 2.0);  // median of {1, 3}
    CHECK_FALSE(filled.missing[1][0]);

    t.values.push_back({7.0});
    t.missing.push_back({0});
    const NumericTable filled2 = impute_missing(t, ImputePolicy::ColumnMedian);
    CHECK(filled2.values[1][0] == 3.0);  // median of {1, 3, 7}
}

TEST_CASE("impute: fail policy names the offending cell") {
    NumericTable t;
    t.column_names = {"x"};
    t.kinds = {FeatureKind::Numeric};
    t.values = {{1.0}, {0.0}};
    t.missing = {{0}, {1}};
    try {
        impute_missing(t, ImputePolicy::Fail);
        FAIL("expected MissingCellError");
    } catch (const MissingCellError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 1") != std::string::npos);
        CHECK(msg.find("x") != std::string::npos);
    }
}

TEST_CASE("impute: all-missing column cannot take a median") {
    NumericTable t;
    t.column_names = {"x"};
    t.kinds = {FeatureKind::Numeric};
    t.values = {{0.0}, {0.0}};
    t.missing = {{1}, {1}};
    CHECK_THROWS_AS(impute_missing(t, ImputePolicy::ColumnMedian), AllMissingColumnError);
}

TEST_CASE("min_max_scale maps columns onto [0,1] with expected values") {
    NumericTable t;
    t.column_names = {"a", "b", "c"};
    t.kinds = {FeatureKind::Numeric, FeatureKind::Numeric, FeatureKind::Numeric};
    t.values = {{2.0, 5.0, 0.0}, {4.0, 5.0, 0.3}, {6.0, 5.0, 1.0}};
    t.missing.assign(3, std::vector<std::uint8_t>(3, 0));
    const ScaleResult res = min_max_scale(t);

    CHECK(res.matrix.values[0][0] == 0.0);
    CHECK(res.matrix.values[1][0] == 0.5);
    CHECK(res.matrix.values[2][0] == 1.0);
    // constant column maps to all zeros
    CHECK(res.matrix.values[0][1] == 0.0);
    CHECK(res.matrix.values[2][1] == 0.0);
    // already [0,1] is a fixed point
    CHECK(res.matrix.values[0][2] == 0.0);
    CHECK(res.matrix.values[1][2] == 0.3);
    CHECK(res.matrix.values[2][2] == 1.0);

    CHECK(res.params.mins[0] == 2.0);
    CHECK(res.params.maxs[0] == 6.0);
}

TEST_CASE("every scaled column attains 0 and 1 unless constant") {
    const SyntheticDataset d = synthesize_dataset(80, 21);
    const EncodeResult enc = encode_record_fields(drop_identifier_columns(d.table).table, 2021);
    const ScaleResult res = min_max_scale(impute_missing(enc.table, ImputePolicy::ColumnMedian));
    for (std::size_t j = 0; j < res.matrix.n_features(); ++j) {
        double lo = 1e300, hi = -1e300;
        for (std::size_t r = 0; r < res.matrix.n_rows(); ++r) {
            lo = std::min(lo, res.matrix.values[r][j]);
            hi = std::max(hi, res.matrix.values[r][j]);
            CHECK(res.matrix.values[r][j] >= 0.0);
            CHECK(res.matrix.values[r][j] <= 1.0);
        }
        if (res.params.mins[j] == res.params.maxs[j]) {
            CHECK(lo == 0.0);
            CHECK(hi == 0.0);
        } else {
            CHECK(lo == 0.0);
            CHECK(hi == 1.0);
        }
    }
}

TEST_CASE("held-out rows clamp into [0,1]") {
    NumericTable fit;
    fit.column_names = {"a"};
    fit.kinds = {FeatureKind::Numeric};
    fit.values = {{0.0}, {10.0}};
    fit.missing = {{0}, {0}};
    const ScaleResult res = min_max_scale(fit);

    NumericTable held;
    held.column_names = {"a"};
    held.kinds = {FeatureKind::Numeric};
    held.values = {{12.0}, {-3.0}, {5.0}};
    held.missing = {{0}, {0}, {0}};
    const FeatureMatrix scaled = apply_scale(held, res.params);
    CHECK(scaled.values[0][0] == 1.0);  // clamp(1.2) = 1
    CHECK(scaled.values[1][0] == 0.0);
    CHECK(scaled.values[2][0] == 0.5);
}

TEST_CASE("scale params survive JSON round trip") {
    NumericTable t;
    t.column_names = {"a", "b"};
    t.kinds = {FeatureKind::Numeric, FeatureKind::EncodedCategorical};
    t.values = {{0.125, 3.0}, {2.5, 4.0}};
    t.missing.assign(2, std::vector<std::uint8_t>(2, 0));
    const ScaleResult res = min_max_scale(t);
    const ScaleParams back = ScaleParams::from_json(res.params.to_json());
    CHECK(back.column_names == res.params.column_names);
    CHECK(back.kinds == res.params.kinds);
    CHECK(back.mins == res.params.mins);
    CHECK(back.maxs == res.params.maxs);
}

TEST_CASE("numeric and matrix CSV artifacts round trip through the readers") {
    const SyntheticDataset d = synthesize_dataset(25, 31);
    const EncodeResult enc = encode_record_fields(drop_identifier_columns(d.table).table, 2021);
    {
        std::ostringstream out;
        write_numeric_csv(enc.table, out);
        std::istringstream in(out.str());
        const NumericTable back = read_numeric_csv(in);
        REQUIRE(back.column_names == enc.table.column_names);
        REQUIRE(back.missing == enc.table.missing);
        for (std::size_t r = 0; r < enc.table.n_rows(); ++r) {
            for (std::size_t j = 0; j < enc.table.n_cols(); ++j) {
                if (!enc.table.missing[r][j]) CHECK(back.values[r][j] == enc.table.values[r][j]);
            }
        }
    }
    const ScaleResult scaled = min_max_scale(impute_missing(enc.table, ImputePolicy::ColumnMedian));
    {
        std::ostringstream out;
        write_matrix_csv(scaled.matrix, out);
        std::istringstream in(out.str());
        const FeatureMatrix back = read_matrix_csv(in);
        CHECK(back.feature_names == scaled.matrix.feature_names);
        CHECK(back.values == scaled.matrix.values);
    }
}

TEST_CASE("pipeline stages preserve row count and order") {
    const SyntheticDataset d = synthesize_dataset(40, 2);
    const DropResult cleaned = drop_identifier_columns(d.table);
    REQUIRE(cleaned.table.n_rows() == 40);
    const EncodeResult enc = encode_record_fields(cleaned.table, 2021);
    REQUIRE(enc.table.n_rows() == 40);
    const NumericTable imputed = impute_missing(enc.table, ImputePolicy::ColumnMedian);
    const ScaleResult scaled = min_max_scale(imputed);
    REQUIRE(scaled.matrix.n_rows() == 40);

    // order check: coverage years must match a direct recompute per row
    const std::size_t cov_src = *cleaned.table.find_column("Coverage");
    for (std::size_t r = 0; r < 40; ++r) {
        CHECK(enc.table.values[r][cov_src] ==
              parse_coverage_years(cleaned.table.cells[r][cov_src], 2021));
    }
}
