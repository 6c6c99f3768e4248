#pragma once

#include "rdmono/design.hpp"
#include "rdmono/error.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace rdmono::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "0.1.0";

/// Malformed CSV input, located by file line (header = line 1) and column.
class CsvError : public InputError {
public:
    CsvError(const std::string& what, std::size_t row, std::string column)
        : InputError(what), row_(row), column_(std::move(column)) {}
    std::size_t row() const { return row_; }
    const std::string& column() const { return column_; }

private:
    std::size_t row_;
    std::string column_;
};

/// Header row, then columns y, x1..xd, optional treated (0/1), optional sigma.
Dataset parse_csv(std::istream& in);
Dataset read_csv(const std::string& path);

/// Runs one subcommand. Reports go to `out` (or --out); on failure a JSON
/// error object goes to `out` and a one-line message to `err`.
/// Exit codes: 0 ok, 1 numeric failure, 2 input error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace rdmono::cli
