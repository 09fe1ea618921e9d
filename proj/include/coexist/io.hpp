// Serialization glue: locale-independent number formatting, CSV tables,
// JSON matrices, range parsing, and atomic file output.
#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unistd.h>
#include <utility>
#include <vector>

#include <json.hpp>

#include "coexist/error.hpp"
#include "coexist/experiments.hpp"
#include "coexist/linalg.hpp"

namespace coexist::io {

using json = nlohmann::json;
using Metadata = std::vector<std::pair<std::string, std::string>>;

inline constexpr int kSignificantDigits = 9;

/// Shortest general-format rendering with 9 significant digits, '.' decimal point.
inline std::string format_double(double v, int digits = kSignificantDigits) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, digits);
    if (res.ec != std::errc{}) throw Error(ErrorCode::Io, "number formatting failed");
    return std::string(buf, res.ptr);
}

inline std::string format_fixed(double v, int decimals) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
    if (res.ec != std::errc{}) throw Error(ErrorCode::Io, "number formatting failed");
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw Error(ErrorCode::Usage, "not a number: '" + std::string(s) + "'");
    return v;
}

inline long long parse_int(std::string_view s) {
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw Error(ErrorCode::Usage, "not an integer: '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

/// Angle grid "start:stop:count" (inclusive endpoints) or a single value.
inline std::vector<double> parse_grid(std::string_view spec) {
    const auto parts = split(spec, ':');
    if (parts.size() == 1) return {parse_double(parts[0])};
    if (parts.size() != 3) throw Error(ErrorCode::Usage, "grid must be start:stop:count");
    const long long count = parse_int(parts[2]);
    if (count <= 0) throw Error(ErrorCode::EmptyGrid, "grid count must be positive");
    return linspace(parse_double(parts[0]), parse_double(parts[1]), static_cast<std::size_t>(count));
}

/// Cycle sizes "first:last:step" or a single n.
inline std::vector<int> parse_n_range(std::string_view spec) {
    const auto parts = split(spec, ':');
    if (parts.size() == 1) {
        const int n = static_cast<int>(parse_int(parts[0]));
        validate_cycle(n);
        return {n};
    }
    if (parts.size() != 3) throw Error(ErrorCode::Usage, "n range must be first:last:step");
    return odd_range(static_cast<int>(parse_int(parts[0])), static_cast<int>(parse_int(parts[1])),
                     static_cast<int>(parse_int(parts[2])));
}

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---------------------------------------------------------------------------
// atomic output

/// Writes `content` to `path` through a sibling temp file and rename, so
/// the destination is either untouched or complete.
inline void write_atomic(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    const fs::path target = fs::absolute(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(ErrorCode::Io, "cannot open " + tmp.string() + " for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw Error(ErrorCode::Io, "write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        std::error_code ignore;
        fs::remove(tmp, ignore);
        throw Error(ErrorCode::Io, "cannot move output into place at " + target.string() + ": " + ec.message());
    }
}

// ---------------------------------------------------------------------------
// CSV

/// A parsed CSV table: '#' comment lines become metadata, the first other
/// line is the header.
struct CsvTable {
    Metadata metadata;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw Error(ErrorCode::Io, "missing CSV column " + std::string(name));
    }
};

inline std::string metadata_block(const Metadata& meta) {
    std::string out;
    for (const auto& [k, v] : meta) out += "# " + k + "=" + v + "\n";
    return out;
}

inline CsvTable parse_csv(std::string_view text) {
    CsvTable t;
    bool have_header = false;
    for (auto line : split(text, '\n')) {
        if (line.empty()) continue;
        if (line.front() == '#') {
            line.remove_prefix(1);
            while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
            const auto eq = line.find('=');
            t.metadata.emplace_back(std::string(line.substr(0, eq)),
                                    eq == std::string_view::npos ? "" : std::string(line.substr(eq + 1)));
            continue;
        }
        std::vector<std::string> cells;
        for (auto c : split(line, ',')) cells.emplace_back(c);
        if (!have_header) {
            t.header = std::move(cells);
            have_header = true;
        } else {
            if (cells.size() != t.header.size()) throw Error(ErrorCode::Io, "ragged CSV row");
            t.rows.push_back(std::move(cells));
        }
    }
    if (!have_header) throw Error(ErrorCode::Io, "CSV has no header");
    return t;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cannot read " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline std::string_view mode_name(ScanMode m) { return m == ScanMode::Analytic ? "analytic" : "circuit"; }

inline std::string landscape_csv(const std::vector<LandscapeRecord>& recs, const Metadata& meta = {}) {
    std::string out = metadata_block(meta);
    out += "n,theta_deg,phi_deg,chsh_margin,kcbs_margin,mode,shots,seed\n";
    for (const auto& r : recs) {
        out += std::to_string(r.n) + ',' + format_double(r.theta_deg) + ',' + format_double(r.phi_deg) + ',' +
               format_double(r.chsh_margin) + ',' + format_double(r.kcbs_margin) + ',' +
               std::string(mode_name(r.mode)) + ',' + (r.shots ? std::to_string(*r.shots) : "") + ',' +
               (r.seed ? std::to_string(*r.seed) : "") + '\n';
    }
    return out;
}

inline std::string coexist_csv(const std::vector<CoexistenceRecord>& recs, const Metadata& meta = {}) {
    std::string out = metadata_block(meta);
    out += "n,theta_opt_deg,overlap,residual\n";
    for (const auto& r : recs)
        out += std::to_string(r.n) + ',' + format_double(r.theta_opt_deg) + ',' + format_double(r.overlap) +
               ',' + format_double(r.residual) + '\n';
    return out;
}

inline std::string scaling_csv(const ScalingStudy& s, const Metadata& meta = {}) {
    Metadata m = meta;
    m.emplace_back("overlap_loglog_slope", format_double(s.overlap_slope));
    m.emplace_back("theta_loglog_slope", format_double(s.theta_slope));
    std::string out = metadata_block(m);
    out += "n,theta_opt_deg,overlap,residual,psi_n_kcbs_margin,psi_n_chsh_margin,asym_kcbs,asym_chsh\n";
    for (const auto& row : s.rows) {
        const auto& c = row.coexistence;
        out += std::to_string(c.n) + ',' + format_double(c.theta_opt_deg) + ',' + format_double(c.overlap) + ',' +
               format_double(c.residual) + ',' + format_double(row.psi_n.kcbs) + ',' +
               format_double(row.psi_n.chsh) + ',' + format_double(row.asymptotic.kcbs) + ',' +
               format_double(row.asymptotic.chsh) + '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON

/// {"rows": r, "cols": c, "entries": [[re, im], ...]} in row-major order.
inline json matrix_to_json(const ComplexMatrix& m) {
    json entries = json::array();
    for (const auto& e : m.entries()) entries.push_back({e.real(), e.imag()});
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"entries", std::move(entries)}};
}

inline ComplexMatrix matrix_from_json(const json& j) {
    try {
        const auto rows = j.at("rows").get<std::size_t>();
        const auto cols = j.at("cols").get<std::size_t>();
        std::vector<cplx> entries;
        for (const auto& e : j.at("entries")) {
            if (!e.is_array() || e.size() != 2) throw Error(ErrorCode::Io, "matrix entry must be [re, im]");
            entries.emplace_back(e[0].get<double>(), e[1].get<double>());
        }
        return ComplexMatrix(rows, cols, std::move(entries));
    } catch (const json::exception& ex) {
        throw Error(ErrorCode::Io, std::string("malformed matrix JSON: ") + ex.what());
    }
}

inline json state_to_json(std::span<const cplx> v) { return matrix_to_json(ComplexMatrix::column(v)); }

inline json metadata_json(const Metadata& meta) {
    json j = json::object();
    for (const auto& [k, v] : meta) j[k] = v;
    return j;
}

}  // namespace coexist::io
