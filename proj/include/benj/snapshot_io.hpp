#pragma once

#include <benj/errors.hpp>
#include <benj/spectral.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace benj {

// Snapshot file, format version 1:
//
//   benj-snapshot 1
//   N <int>
//   L <real>
//   t <real>
//   <k> <re> <im>        2N+1 lines, k = -N..N
//
// Reals are written with 17 significant digits, which round-trips doubles.

inline constexpr int kSnapshotVersion = 1;

/// 17 significant digits, scientific.
inline std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", x);
    return buf;
}

inline double parse_real(std::string_view text, int line = 0) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw ParseError("expected a real number, got '" + std::string(text) + "'", line);
    return value;
}

inline long parse_integer(std::string_view text, int line = 0) {
    long value = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw ParseError("expected an integer, got '" + std::string(text) + "'", line);
    return value;
}

inline void write_snapshot(std::ostream& os, const SpectralField& field, double t) {
    os << "benj-snapshot " << kSnapshotVersion << '\n';
    os << "N " << field.n_modes() << '\n';
    os << "L " << format_real(field.domain_scale()) << '\n';
    os << "t " << format_real(t) << '\n';
    for (int k = -field.n_modes(); k <= field.n_modes(); ++k) {
        const Complex c = field[k];
        os << k << ' ' << format_real(c.real()) << ' ' << format_real(c.imag()) << '\n';
    }
}

struct SnapshotData {
    SpectralField field;
    double t = 0.0;
};

inline SnapshotData read_snapshot(std::istream& is) {
    std::string line;
    int line_no = 0;
    auto next_tokens = [&](std::size_t expected, const char* what) {
        if (!std::getline(is, line)) throw ParseError(std::string("snapshot: missing ") + what, line_no + 1);
        ++line_no;
        std::istringstream ss(line);
        std::vector<std::string> tokens;
        for (std::string tok; ss >> tok;) tokens.push_back(tok);
        if (tokens.size() != expected)
            throw ParseError(std::string("snapshot: malformed ") + what + " line", line_no);
        return tokens;
    };

    auto magic = next_tokens(2, "header");
    if (magic[0] != "benj-snapshot") throw ParseError("snapshot: not a benj snapshot file", line_no);
    if (parse_integer(magic[1], line_no) != kSnapshotVersion)
        throw ParseError("snapshot: unsupported format version " + magic[1], line_no);
    auto n_line = next_tokens(2, "N");
    auto l_line = next_tokens(2, "L");
    auto t_line = next_tokens(2, "t");
    if (n_line[0] != "N" || l_line[0] != "L" || t_line[0] != "t")
        throw ParseError("snapshot: header keys must be N, L, t in that order", line_no);
    const long n = parse_integer(n_line[1], 2);
    if (n < 0) throw ParseError("snapshot: N must be >= 0", 2);
    const double domain = parse_real(l_line[1], 3);
    if (!(domain > 0.0)) throw ParseError("snapshot: L must be > 0", 3);
    const double t = parse_real(t_line[1], 4);

    std::vector<Complex> full(2 * static_cast<std::size_t>(n) + 1);
    for (long k = -n; k <= n; ++k) {
        auto row = next_tokens(3, "coefficient");
        if (parse_integer(row[0], line_no) != k)
            throw ParseError("snapshot: expected mode " + std::to_string(k), line_no);
        full[k + n] = {parse_real(row[1], line_no), parse_real(row[2], line_no)};
    }
    return {SpectralField::from_full(domain, full), t};
}

inline void write_snapshot_file(const std::string& path, const SpectralField& field, double t) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    write_snapshot(os, field, t);
    if (!os) throw Error("failed writing '" + path + "'");
}

inline SnapshotData read_snapshot_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ParseError("cannot open snapshot '" + path + "'");
    return read_snapshot(is);
}

}  // namespace benj
