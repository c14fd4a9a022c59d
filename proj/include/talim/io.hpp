#ifndef TALIM_IO_HPP
#define TALIM_IO_HPP

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "talim/error.hpp"
#include "talim/stats/correlation.hpp"
#include "talim/stats/factor.hpp"
#include "talim/stats/matrix.hpp"
#include "talim/synth.hpp"
#include "talim/timbre.hpp"

namespace talim {

/// Shortest decimal string that parses back to exactly `v`.
inline std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Fixed-point with `digits` decimals, used for human-facing tables.
inline std::string format_fixed(double v, int digits) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
    return std::string(buf, res.ptr);
}

namespace csv {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

/// Splits one line on commas; double quotes group fields ("" escapes a quote).
inline std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.emplace_back(trim(cur));
    return out;
}

inline std::string quote(std::string_view field) {
    if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

inline double parse_double(std::string_view s, const std::string& where) {
    s = trim(s);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw Error(ErrorCode::InvalidMatrix, "not a number at " + where + ": '" + std::string(s) + "'");
    return v;
}

inline bool skippable(std::string_view line) {
    line = trim(line);
    return line.empty() || line.front() == '#';
}

} // namespace csv

/// Header row holds variable ids (first cell is the row-id column name);
/// each following row starts with its observation id. Blank lines and
/// lines starting with '#' are ignored.
inline stats::FeatureMatrix read_feature_matrix(std::istream& in) {
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (csv::skippable(line)) continue;
        header = csv::split(line);
        break;
    }
    if (header.size() < 2) throw Error(ErrorCode::InvalidMatrix, "missing header row");

    stats::FeatureMatrix m;
    m.col_ids.assign(header.begin() + 1, header.end());
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::skippable(line)) continue;
        const auto cells = csv::split(line);
        if (cells.size() != header.size())
            throw Error(ErrorCode::InvalidMatrix, "line " + std::to_string(line_no) + " has " +
                                                      std::to_string(cells.size()) + " cells, expected " +
                                                      std::to_string(header.size()));
        m.row_ids.push_back(cells[0]);
        std::vector<double> row;
        for (std::size_t j = 1; j < cells.size(); ++j)
            row.push_back(csv::parse_double(cells[j], "line " + std::to_string(line_no) + " column " + header[j]));
        rows.push_back(std::move(row));
    }
    m.values = rows.empty() ? stats::Matrix(0, m.col_ids.size()) : stats::Matrix::from_rows(rows);
    return m;
}

inline stats::FeatureMatrix read_feature_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    return read_feature_matrix(in);
}

inline void write_feature_matrix(const stats::FeatureMatrix& m, std::ostream& out, std::string_view id_header = "id") {
    out << csv::quote(id_header);
    for (const auto& c : m.col_ids) out << ',' << csv::quote(c);
    out << '\n';
    for (std::size_t i = 0; i < m.n(); ++i) {
        out << csv::quote(m.row_ids[i]);
        for (std::size_t j = 0; j < m.p(); ++j) out << ',' << format_number(m.values(i, j));
        out << '\n';
    }
}

// ---- timbre vectors ------------------------------------------------------

inline nlohmann::ordered_json to_json(const TimbreVector& v) {
    nlohmann::ordered_json j;
    const auto names = TimbreVector::field_names();
    const auto vals = v.values();
    for (std::size_t i = 0; i < names.size(); ++i) j[std::string(names[i])] = vals[i];
    return j;
}

inline std::string csv_header(const TimbreVector&) {
    std::string out;
    for (auto name : TimbreVector::field_names()) {
        if (!out.empty()) out += ',';
        out += name;
    }
    return out;
}

inline std::string csv_row(const TimbreVector& v) {
    std::string out;
    for (double x : v.values()) {
        if (!out.empty()) out += ',';
        out += format_number(x);
    }
    return out;
}

// ---- synth sidecar -------------------------------------------------------

inline nlohmann::ordered_json to_json(const SynthSpec& s) {
    nlohmann::ordered_json j;
    j["f0"] = s.f0;
    j["partial_amps"] = s.partial_amps;
    std::vector<double> stretch, decay;
    for (std::size_t i = 0; i < s.partial_amps.size(); ++i) {
        stretch.push_back(s.stretch_of(i));
        decay.push_back(s.decay_of(i));
    }
    j["stretch"] = stretch;
    j["attack"] = s.attack;
    j["decay"] = decay;
    j["duration"] = s.duration;
    j["sample_rate"] = s.sample_rate;
    return j;
}

inline SynthSpec synth_spec_from_json(const nlohmann::json& j) {
    try {
        SynthSpec s;
        s.f0 = j.at("f0").get<double>();
        s.partial_amps = j.at("partial_amps").get<std::vector<double>>();
        if (j.contains("stretch")) s.stretch = j.at("stretch").get<std::vector<double>>();
        if (j.contains("attack")) s.attack = j.at("attack").get<double>();
        if (j.contains("decay")) s.decay = j.at("decay").get<std::vector<double>>();
        if (j.contains("duration")) s.duration = j.at("duration").get<double>();
        if (j.contains("sample_rate")) s.sample_rate = j.at("sample_rate").get<int>();
        s.validate();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SpecInvalid, e.what());
    }
}

// ---- statistics reports --------------------------------------------------

/// Square matrix with ids on both axes.
inline void write_square(const std::vector<std::string>& ids, const stats::Matrix& m, std::ostream& out) {
    out << "variable";
    for (const auto& id : ids) out << ',' << csv::quote(id);
    out << '\n';
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out << csv::quote(ids[i]);
        for (std::size_t j = 0; j < ids.size(); ++j) out << ',' << format_number(m(i, j));
        out << '\n';
    }
}

/// r matrix with significance stars appended to each off-diagonal cell.
inline void write_flagged_correlation(const stats::CorrelationResult& c, std::ostream& out) {
    out << "variable";
    for (const auto& id : c.ids) out << ',' << csv::quote(id);
    out << '\n';
    for (std::size_t i = 0; i < c.ids.size(); ++i) {
        out << csv::quote(c.ids[i]);
        for (std::size_t j = 0; j < c.ids.size(); ++j) {
            out << ',' << format_fixed(c.r(i, j), 3);
            if (i != j) out << stats::significance_stars(c.p_values(i, j));
        }
        out << '\n';
    }
    out << "# ** p < 0.01 (2-tailed); * p < 0.05 (2-tailed); N = " << c.n << '\n';
}

/// One row per unordered pair.
inline void write_correlation_pairs(const stats::CorrelationResult& c, std::ostream& out) {
    out << "var_a,var_b,r,p,n,flag\n";
    for (std::size_t i = 0; i < c.ids.size(); ++i)
        for (std::size_t j = i + 1; j < c.ids.size(); ++j)
            out << csv::quote(c.ids[i]) << ',' << csv::quote(c.ids[j]) << ',' << format_number(c.r(i, j)) << ','
                << format_number(c.p_values(i, j)) << ',' << c.n << ',' << stats::significance_stars(c.p_values(i, j))
                << '\n';
}

inline void write_communalities(const stats::FactorModel& f, std::ostream& out) {
    out << "variable,initial,extraction\n";
    for (std::size_t i = 0; i < f.variables.size(); ++i)
        out << csv::quote(f.variables[i]) << ",1," << format_number(f.communalities_extraction[i]) << '\n';
}

inline void write_variance_table(const stats::VarianceTable& t, std::ostream& out) {
    out << "component,initial_total,initial_pct,initial_cum_pct,extraction_total,extraction_pct,"
           "extraction_cum_pct,rotation_total,rotation_pct,rotation_cum_pct\n";
    auto cells = [&](const std::optional<stats::VarianceSums>& s) {
        if (s) out << ',' << format_number(s->total) << ',' << format_number(s->percent) << ','
                   << format_number(s->cumulative);
        else out << ",,,";
    };
    for (const auto& row : t) {
        out << row.component << ',' << format_number(row.initial.total) << ',' << format_number(row.initial.percent)
            << ',' << format_number(row.initial.cumulative);
        cells(row.extraction);
        cells(row.rotation);
        out << '\n';
    }
}

/// Loadings with cells below `threshold` left blank; the footer records it.
inline void write_loadings(const std::vector<std::string>& vars, const stats::Matrix& loadings, double threshold,
                           std::ostream& out) {
    out << "variable";
    for (std::size_t j = 0; j < loadings.cols(); ++j) out << ",component_" << j + 1;
    out << '\n';
    const auto shown = stats::suppress(loadings, threshold);
    for (std::size_t i = 0; i < vars.size(); ++i) {
        out << csv::quote(vars[i]);
        for (const auto& cell : shown[i]) {
            out << ',';
            if (cell) out << format_number(*cell);
        }
        out << '\n';
    }
    if (threshold > 0.0) out << "# loadings with absolute value below " << format_number(threshold) << " suppressed\n";
}

inline void write_scree(const std::vector<double>& eigenvalues, std::ostream& out) {
    out << "factor,eigenvalue\n";
    for (const auto& [k, v] : stats::scree_data(eigenvalues)) out << k << ',' << format_number(v) << '\n';
}

} // namespace talim

#endif
