#pragma once
// CSV serialization of run artifacts. All numbers print with %.17g so values
// round-trip exactly and identical runs produce byte-identical files.
//
// coefficients.csv   header: t,target,<basis labels...>
//                    rows:   one per (t, target in {R,E,V}); t = 0 carries the
//                            time-zero values as an intercept-only row.
// validation_report.csv  t,stat,a,b,c with stat-dependent columns:
//                    rmse/nrmse: a,b,c = R,E,V values
//                    andp_band/aroc_band: a,b = band lo,hi; c = mean (andp)
//                            or median (aroc)
//                    aroc_excluded: a = excluded count
// histograms.csv     t,series,bin_lower_edge,count  (series: andp, aroc)
// oracle.csv         value,standard_error,method

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "errors.hpp"
#include "lsm_engine.hpp"
#include "oracle.hpp"
#include "validation.hpp"

namespace lsmcoc {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline void check_csv_safe(const std::string& label) {
    if (label.find_first_of(",\n\r\"") != std::string::npos)
        throw std::invalid_argument("csv: label contains a delimiter: " + label);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

inline double parse_double(const std::string& s, const char* where) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(std::string(where) + ": malformed number '" + s + "'");
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Coefficient table

inline void write_coefficients(std::ostream& os, const CoefficientTable& table) {
    os << "t,target";
    for (const auto& label : table.labels) {
        detail::check_csv_safe(label);
        os << ',' << label;
    }
    os << '\n';
    auto row = [&](int t, const char* target, const std::vector<double>& beta) {
        os << t << ',' << target;
        for (double b : beta) os << ',' << format_double(b);
        os << '\n';
    };
    const std::size_t p = table.labels.size();
    auto intercept_only = [&](double value) {
        std::vector<double> beta(p, 0.0);
        beta[0] = value;
        return beta;
    };
    row(0, "R", intercept_only(table.time_zero.r));
    row(0, "E", intercept_only(table.time_zero.e));
    row(0, "V", intercept_only(table.time_zero.v));
    for (std::size_t i = 0; i < table.per_time.size(); ++i) {
        int t = static_cast<int>(i) + 1;
        row(t, "R", table.per_time[i].r);
        row(t, "E", table.per_time[i].e);
        row(t, "V", table.per_time[i].v);
    }
}

// Rebuilds the table structure from CSV. The capital parameters and training
// seed live in the manifest, not the CSV; the caller fills them afterwards.
inline CoefficientTable read_coefficients(std::istream& is) {
    CoefficientTable table;
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("coefficients: empty file");
    auto header = detail::split_csv_line(line);
    if (header.size() < 3 || header[0] != "t" || header[1] != "target")
        throw ConfigError("coefficients: malformed header");
    table.labels.assign(header.begin() + 2, header.end());
    const std::size_t p = table.labels.size();

    int max_t = 0;
    struct Row {
        int t;
        std::string target;
        std::vector<double> beta;
    };
    std::vector<Row> rows;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != p + 2)
            throw ConfigError("coefficients: row " + std::to_string(line_no) + " has " +
                              std::to_string(fields.size()) + " fields, expected " +
                              std::to_string(p + 2));
        Row row;
        row.t = static_cast<int>(detail::parse_double(fields[0], "coefficients"));
        row.target = fields[1];
        for (std::size_t j = 0; j < p; ++j)
            row.beta.push_back(detail::parse_double(fields[j + 2], "coefficients"));
        if (row.t < 0) throw ConfigError("coefficients: negative time step");
        max_t = std::max(max_t, row.t);
        rows.push_back(std::move(row));
    }
    table.horizon = max_t + 1;
    table.per_time.resize(static_cast<std::size_t>(max_t));
    bool have_zero_r = false, have_zero_e = false;
    std::vector<int> seen(static_cast<std::size_t>(max_t), 0);
    for (auto& row : rows) {
        if (row.t == 0) {
            if (row.target == "R") {
                table.time_zero.r = row.beta[0];
                have_zero_r = true;
            } else if (row.target == "E") {
                table.time_zero.e = row.beta[0];
                have_zero_e = true;
            } else if (row.target == "V") {
                table.time_zero.v = row.beta[0];
            } else {
                throw ConfigError("coefficients: unknown target '" + row.target + "'");
            }
            continue;
        }
        auto& slot = table.per_time[static_cast<std::size_t>(row.t - 1)];
        if (row.target == "R") {
            slot.r = std::move(row.beta);
            seen[static_cast<std::size_t>(row.t - 1)] |= 1;
        } else if (row.target == "E") {
            slot.e = std::move(row.beta);
            seen[static_cast<std::size_t>(row.t - 1)] |= 2;
        } else if (row.target == "V") {
            slot.v = std::move(row.beta);
            seen[static_cast<std::size_t>(row.t - 1)] |= 4;
        } else {
            throw ConfigError("coefficients: unknown target '" + row.target + "'");
        }
    }
    if (!have_zero_r || !have_zero_e)
        throw ConfigError("coefficients: missing time-zero rows");
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (seen[i] != 7)
            throw ConfigError("coefficients: incomplete targets at t = " + std::to_string(i + 1));
    return table;
}

// ---------------------------------------------------------------------------
// Validation artifacts

inline void write_validation_report(std::ostream& os, const ValidationReport& report) {
    os << "t,stat,a,b,c\n";
    for (const auto& tv : report.per_time) {
        os << tv.t << ",rmse," << format_double(tv.rmse_r) << ',' << format_double(tv.rmse_e)
           << ',' << format_double(tv.rmse_v) << '\n';
        os << tv.t << ",nrmse," << format_double(tv.nrmse_r) << ',' << format_double(tv.nrmse_e)
           << ',' << format_double(tv.nrmse_v) << '\n';
        os << tv.t << ",andp_band," << format_double(tv.andp_lo) << ','
           << format_double(tv.andp_hi) << ',' << format_double(tv.andp_mean) << '\n';
        os << tv.t << ",aroc_band," << format_double(tv.aroc_lo) << ','
           << format_double(tv.aroc_hi) << ',' << format_double(tv.aroc_median) << '\n';
        os << tv.t << ",aroc_excluded," << tv.aroc_excluded << ",,\n";
    }
}

inline void write_histograms(std::ostream& os, const ValidationReport& report) {
    os << "t,series,bin_lower_edge,count\n";
    auto series = [&](int t, const char* name, const Histogram& h) {
        for (std::size_t b = 0; b < h.counts.size(); ++b)
            os << t << ',' << name << ',' << format_double(h.lower_edges[b]) << ',' << h.counts[b]
               << '\n';
    };
    for (const auto& tv : report.per_time) {
        series(tv.t, "andp", tv.andp_hist);
        series(tv.t, "aroc", tv.aroc_hist);
    }
}

inline void write_oracle(std::ostream& os, const OracleEstimate& est) {
    os << "value,standard_error,method\n";
    os << format_double(est.value) << ',' << format_double(est.standard_error) << ','
       << est.method << '\n';
}

// ---------------------------------------------------------------------------
// File helpers

inline void write_file(const std::string& path, const std::string& contents) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open for writing: " + path);
    os << contents;
    if (!os) throw ConfigError("write failed: " + path);
}

inline std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace lsmcoc
