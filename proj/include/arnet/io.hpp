#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "arnet/core.hpp"

namespace arnet {

enum class SeriesFormat { matrix_text, edge_csv };

inline SeriesFormat format_from_string(const std::string& s) {
    if (s == "matrix-text") return SeriesFormat::matrix_text;
    if (s == "edge-csv") return SeriesFormat::edge_csv;
    throw ValueError("unknown series format: \"" + s + "\"");
}

inline std::string to_string(SeriesFormat f) {
    return f == SeriesFormat::matrix_text ? "matrix-text" : "edge-csv";
}

namespace detail {

inline bool parse_header_pn(const std::string& line, int& p, int& n) {
    int consumed = 0;
    return std::sscanf(line.c_str(), "p=%d n=%d%n", &p, &n, &consumed) == 2;
}

inline bool blank(const std::string& s) {
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    return true;
}

inline SnapshotSeries load_matrix_text(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("matrix-text: empty file");
    int p = 0, n = 0;
    if (!parse_header_pn(line, p, n))
        throw ParseError("matrix-text: first line must be \"p=<int> n=<int>\"");
    if (p < 3) throw DimensionError("matrix-text: p must be >= 3");
    if (n < 1) throw DimensionError("matrix-text: n must be >= 1");
    SnapshotSeries s = SnapshotSeries::zeros(p, n);
    for (int t = 0; t < n; ++t) {
        int row = 0;
        std::vector<std::vector<int>> block(p);
        while (row < p) {
            if (!std::getline(in, line))
                throw ParseError("matrix-text: unexpected end of file in snapshot " +
                                 std::to_string(t + 1));
            if (blank(line)) continue;  // blank separator between blocks
            std::istringstream ls(line);
            std::vector<int>& r = block[row];
            int tok;
            while (ls >> tok) {
                if (tok != 0 && tok != 1)
                    throw ValueError("matrix-text: entry outside {0,1} in snapshot " +
                                     std::to_string(t + 1));
                r.push_back(tok);
            }
            if (!ls.eof()) throw ParseError("matrix-text: malformed line in snapshot " +
                                            std::to_string(t + 1));
            if (static_cast<int>(r.size()) != p)
                throw DimensionError("matrix-text: row length != p in snapshot " +
                                     std::to_string(t + 1));
            ++row;
        }
        // symmetry is enforced by mirroring the upper triangle; diag forced 0
        for (int i = 0; i < p; ++i)
            for (int j = i + 1; j < p; ++j)
                s.set_edge(t, i, j, static_cast<std::uint8_t>(block[i][j]));
    }
    return s;
}

inline SnapshotSeries load_edge_csv(std::istream& in) {
    std::string line;
    int p = -1, n = -1;
    bool saw_header = false;
    SnapshotSeries s;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            size_t start = body.find_first_not_of(' ');
            if (start != std::string::npos && parse_header_pn(body.substr(start), p, n)) {
                if (p < 3 || n < 1) throw DimensionError("edge-csv: bad p/n in header comment");
                s = SnapshotSeries::zeros(p, n);
            }
            continue;
        }
        if (!saw_header) {
            if (line != "t,i,j") throw ParseError("edge-csv: expected header \"t,i,j\"");
            if (p < 0) throw ParseError("edge-csv: missing \"# p=<int> n=<int>\" comment line");
            saw_header = true;
            continue;
        }
        int t, i, j, consumed = 0;
        if (std::sscanf(line.c_str(), "%d,%d,%d%n", &t, &i, &j, &consumed) != 3 ||
            consumed != static_cast<int>(line.size()))
            throw ParseError("edge-csv: malformed row at line " + std::to_string(lineno));
        if (t < 1 || t > n) throw IndexError("edge-csv: t out of [1,n] at line " + std::to_string(lineno));
        if (i < 1 || i > p || j < 1 || j > p)
            throw IndexError("edge-csv: node id out of [1,p] at line " + std::to_string(lineno));
        if (i == j) throw IndexError("edge-csv: self-loop at line " + std::to_string(lineno));
        s.set_edge(t - 1, std::min(i, j) - 1, std::max(i, j) - 1, 1);
    }
    if (!saw_header) throw ParseError("edge-csv: missing header row \"t,i,j\"");
    return s;
}

}  // namespace detail

inline SnapshotSeries load_series(std::istream& in, SeriesFormat format) {
    return format == SeriesFormat::matrix_text ? detail::load_matrix_text(in)
                                               : detail::load_edge_csv(in);
}

inline SnapshotSeries load_series(const std::string& path, SeriesFormat format) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file for reading: " + path);
    return load_series(in, format);
}

inline void save_series(const SnapshotSeries& s, std::ostream& out, SeriesFormat format) {
    if (format == SeriesFormat::matrix_text) {
        out << "p=" << s.p() << " n=" << s.n() << "\n";
        for (int t = 0; t < s.n(); ++t) {
            if (t > 0) out << "\n";
            for (int i = 0; i < s.p(); ++i) {
                for (int j = 0; j < s.p(); ++j) {
                    if (j > 0) out << ' ';
                    out << int(s.at(t, i, j));
                }
                out << "\n";
            }
        }
    } else {
        out << "# p=" << s.p() << " n=" << s.n() << "\n";
        out << "t,i,j\n";
        for (int t = 0; t < s.n(); ++t)
            for (int i = 0; i < s.p(); ++i)
                for (int j = i + 1; j < s.p(); ++j)
                    if (s.at(t, i, j)) out << (t + 1) << ',' << (i + 1) << ',' << (j + 1) << "\n";
    }
    if (!out) throw IoError("failed writing series");
}

inline void save_series(const SnapshotSeries& s, const std::string& path, SeriesFormat format) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open file for writing: " + path);
    save_series(s, out, format);
}

// Guesses the format from the first line of the file.
inline SeriesFormat sniff_format(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file for reading: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty series file: " + path);
    int p, n;
    if (detail::parse_header_pn(line, p, n)) return SeriesFormat::matrix_text;
    return SeriesFormat::edge_csv;
}

}  // namespace arnet
