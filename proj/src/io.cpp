#include "caviar/io.hpp"

#include "caviar/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace caviar {

namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n\"");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n\"");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;
};

CsvTable read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    CsvTable tab;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        if (tab.header.empty()) {
            tab.header = split_csv_line(line);
            continue;
        }
        tab.rows.push_back(split_csv_line(line));
        tab.line_numbers.push_back(lineno);
    }
    if (tab.header.empty()) throw InputError(path + ": missing header row");
    return tab;
}

std::size_t column_index(const CsvTable& tab, const std::string& column, const std::string& path) {
    for (std::size_t i = 0; i < tab.header.size(); ++i) {
        if (tab.header[i] == column) return i;
    }
    throw InputError(path + ": no column named '" + column + "'");
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && std::isfinite(out);
}

nlohmann::json matrix_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto row = m.row(r);
        rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return rows;
}

}  // namespace

std::vector<double> read_csv_column(const std::string& path, const std::string& column) {
    const CsvTable tab = read_table(path);
    const std::size_t idx = column_index(tab, column, path);
    std::vector<double> out;
    out.reserve(tab.rows.size());
    for (std::size_t r = 0; r < tab.rows.size(); ++r) {
        double v = 0.0;
        if (idx >= tab.rows[r].size() || !parse_number(tab.rows[r][idx], v)) {
            throw InputError(path + ":" + std::to_string(tab.line_numbers[r]) + ": cannot parse '" +
                             (idx < tab.rows[r].size() ? tab.rows[r][idx] : std::string()) + "' in column " +
                             column);
        }
        out.push_back(v);
    }
    return out;
}

void write_column_csv(std::ostream& os, const std::string& header, std::span<const double> values) {
    os << header << '\n';
    char buf[40];
    for (double v : values) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf << '\n';
    }
}

ReturnsSeries returns_from_prices(std::span<const double> prices) {
    if (prices.size() < 51) {
        throw InputError("need at least 51 prices, got " + std::to_string(prices.size()));
    }
    ReturnsSeries s;
    for (std::size_t t = 0; t < prices.size(); ++t) {
        if (!(prices[t] > 0.0)) {
            throw InputError("price " + std::to_string(t + 1) + " is not positive");
        }
        if (t > 0) s.y.push_back(100.0 * (std::log(prices[t]) - std::log(prices[t - 1])));
    }
    return s;
}

ReturnsSeries ingest_prices(const std::string& path, const std::string& price_column) {
    const CsvTable tab = read_table(path);
    const std::size_t idx = column_index(tab, price_column, path);
    std::size_t date_idx = tab.header.size();
    for (std::size_t i = 0; i < tab.header.size(); ++i) {
        std::string h = tab.header[i];
        for (char& c : h) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (h == "date") date_idx = i;
    }
    std::vector<double> prices;
    std::vector<std::string> dates;
    std::string bad;
    for (std::size_t r = 0; r < tab.rows.size(); ++r) {
        double v = 0.0;
        if (idx >= tab.rows[r].size() || !parse_number(tab.rows[r][idx], v)) {
            bad += (bad.empty() ? "" : ", ") + std::to_string(tab.line_numbers[r]);
            continue;
        }
        if (!(v > 0.0)) {
            throw InputError(path + ":" + std::to_string(tab.line_numbers[r]) + ": nonpositive price");
        }
        prices.push_back(v);
        if (date_idx < tab.rows[r].size()) dates.push_back(tab.rows[r][date_idx]);
    }
    if (!bad.empty()) {
        throw InputError(path + ": unparsable prices on lines " + bad);
    }
    ReturnsSeries s = returns_from_prices(prices);
    if (dates.size() == prices.size()) {
        s.dates.assign(dates.begin() + 1, dates.end());
    }
    s.source = path + ":" + price_column;
    return s;
}

void write_fit_csv(std::ostream& os, const FitResult& fit) {
    os << "param,estimate\n";
    const auto names = fit.spec.param_names();
    char buf[40];
    for (std::size_t k = 0; k < fit.beta.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", fit.beta[k]);
        os << names[k] << ',' << buf << '\n';
    }
}

std::vector<double> read_fit_csv(const std::string& path) {
    return read_csv_column(path, "estimate");
}

std::string fit_json(const FitResult& fit, int indent) {
    nlohmann::json j;
    j["model"] = fit.spec.name();
    j["tau"] = fit.spec.tau;
    j["beta"] = fit.beta;
    j["param_names"] = fit.spec.param_names();
    j["rq"] = fit.rq;
    j["f0"] = fit.f0;
    j["n_obs"] = fit.n_obs();
    j["seed"] = fit.seed;
    j["n_trials"] = fit.trials.size();
    return j.dump(indent);
}

std::string sandwich_json(const SandwichEstimate& s, int indent) {
    nlohmann::json j;
    j["method"] = method_kind_name(s.method);
    j["A_hat"] = matrix_json(s.A_hat);
    j["D_hat"] = matrix_json(s.D_hat);
    j["cov"] = matrix_json(s.cov);
    if (!s.vd_history.empty()) {
        j["n_draws"] = s.n_draws;
        j["vd_updates"] = s.vd_updates;
        j["vd_final"] = matrix_json(s.vd_final);
        nlohmann::json hist = nlohmann::json::array();
        for (const auto& m : s.vd_history) hist.push_back(matrix_json(m));
        j["vd_history"] = hist;
        j["degenerate_draws"] = s.degenerate_draws;
    }
    if (s.method == MethodKind::FiniteDifference) j["crossings"] = s.crossings;
    if (std::isfinite(s.bandwidth)) j["bandwidth"] = s.bandwidth;
    double h_sum = 0.0;
    for (double h : s.h_hat) h_sum += h;
    j["h_hat_mean"] = s.h_hat.empty() ? 0.0 : h_sum / static_cast<double>(s.h_hat.size());
    return j.dump(indent);
}

}  // namespace caviar
