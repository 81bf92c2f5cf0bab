#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "caviar/covmat.hpp"
#include "caviar/estimate.hpp"

namespace caviar {

/// One numeric column of a headed CSV file. Unparsable cells are reported with
/// their line number.
[[nodiscard]] std::vector<double> read_csv_column(const std::string& path, const std::string& column);

/// Single-column CSV with a header line.
void write_column_csv(std::ostream& os, const std::string& header, std::span<const double> values);

struct ReturnsSeries {
    std::vector<std::string> dates;  // empty when the file has no date column
    std::vector<double> y;           // 100 * (ln P_t - ln P_{t-1})
    std::string source;
};

[[nodiscard]] ReturnsSeries returns_from_prices(std::span<const double> prices);
[[nodiscard]] ReturnsSeries ingest_prices(const std::string& path, const std::string& price_column);

/// param,estimate
void write_fit_csv(std::ostream& os, const FitResult& fit);
[[nodiscard]] std::string fit_json(const FitResult& fit, int indent = 2);

/// Matrices as nested arrays, method tag, V_d history.
[[nodiscard]] std::string sandwich_json(const SandwichEstimate& s, int indent = 2);

/// Reads a param,estimate file back into a parameter vector.
[[nodiscard]] std::vector<double> read_fit_csv(const std::string& path);

}  // namespace caviar
