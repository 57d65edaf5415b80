#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rteff {

/// Base class for all library errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A required CSV column could not be resolved. Carries the column name.
class schema_error : public error {
public:
    explicit schema_error(const std::string& column)
        : error("missing required column: " + column), column_(column) {}
    const std::string& column() const { return column_; }

private:
    std::string column_;
};

/// Input contained no usable rows.
class empty_input_error : public error {
public:
    using error::error;
};

/// Timestamps are not strictly increasing. Carries the first offending row.
class data_order_error : public error {
public:
    data_order_error(const std::string& msg, std::size_t row)
        : error(msg), row_(row) {}
    std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

/// Invalid configuration value or file.
class config_error : public error {
public:
    using error::error;
};

/// A round trip with zero charge energy cannot yield an efficiency.
class degenerate_trip_error : public error {
public:
    using error::error;
};

/// Spearman correlation is undefined (constant input or length mismatch).
class undefined_correlation_error : public error {
public:
    using error::error;
};

/// Fewer observations than the operation needs.
class insufficient_data_error : public error {
public:
    using error::error;
};

/// Regression design matrix is rank deficient. Carries the offending column.
class degenerate_design_error : public error {
public:
    explicit degenerate_design_error(const std::string& column)
        : error("degenerate regression design, offending column: " + column),
          column_(column) {}
    const std::string& column() const { return column_; }

private:
    std::string column_;
};

/// A duty profile drives SoC out of [0, 1]. Carries the phase index.
class infeasible_profile_error : public error {
public:
    infeasible_profile_error(const std::string& msg, std::size_t phase)
        : error(msg), phase_(phase) {}
    std::size_t phase() const { return phase_; }

private:
    std::size_t phase_;
};

/// Argument outside the mathematical domain of an operation.
class domain_error : public error {
public:
    using error::error;
};

} // namespace rteff
