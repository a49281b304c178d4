#pragma once

#include <stdexcept>
#include <string>

namespace jcat {

// Base class for all library errors. Every specific failure mode gets its
// own type so callers can catch what they can actually handle.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// --- table / ingest ---
class MissingColumnError : public Error {
public:
    using Error::Error;
};
class DuplicateColumnError : public Error {
public:
    using Error::Error;
};
class EmptyTableError : public Error {
public:
    using Error::Error;
};
class InvalidSizeError : public Error {
public:
    using Error::Error;
};
class CsvFormatError : public Error {
public:
    using Error::Error;
};

// --- preprocess ---
class UnrecognizedOpenAccessError : public Error {
public:
    using Error::Error;
};
class UnparseableCoverageError : public Error {
public:
    using Error::Error;
};
class FutureStartYearError : public Error {
public:
    using Error::Error;
};
class MissingCellError : public Error {
public:
    using Error::Error;
};
class AllMissingColumnError : public Error {
public:
    using Error::Error;
};
class UnseenCategoryError : public Error {
public:
    using Error::Error;
};

// --- cluster ---
class ArityMismatchError : public Error {
public:
    using Error::Error;
};
class KTooLargeError : public Error {
public:
    using Error::Error;
};
class SingleClusterError : public Error {
public:
    using Error::Error;
};
class LengthMismatchError : public Error {
public:
    using Error::Error;
};
class UnknownFeatureError : public Error {
public:
    using Error::Error;
};

// --- featsel ---
class NegativeFeatureError : public Error {
public:
    using Error::Error;
};
class SingleClassError : public Error {
public:
    using Error::Error;
};
class EmptySubsetError : public Error {
public:
    using Error::Error;
};

// --- classify ---
class EmptyDataError : public Error {
public:
    using Error::Error;
};
class DegenerateDataError : public Error {
public:
    using Error::Error;
};

// --- evaluate / reporting ---
class LabelOutOfRangeError : public Error {
public:
    using Error::Error;
};
class EmptyMatrixError : public Error {
public:
    using Error::Error;
};
class SchemaMismatchError : public Error {
public:
    using Error::Error;
};

}  // namespace jcat
