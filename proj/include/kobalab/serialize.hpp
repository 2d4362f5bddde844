#pragma once

#include <charconv>
#include <fstream>
#include <string>
#include <vector>

#include "kobalab/common.hpp"

namespace kobalab {

// Shortest decimal string that parses back to exactly the same double.
inline std::string dtos(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string itos(long long v) { return std::to_string(v); }

// Minimal CSV emitter. All numeric cells go through dtos so output is
// byte-stable across runs and parses back losslessly.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header)
        : own_(path, std::ios::binary), out_(&own_) {
        if (!own_) throw std::runtime_error("cannot open for writing: " + path);
        write_cells(header);
    }

    // Write to a caller-owned stream (tests, stdout).
    CsvWriter(std::ostream& os, const std::vector<std::string>& header) : out_(&os) {
        write_cells(header);
    }

    void row_values(const std::vector<std::string>& cells) { write_cells(cells); }

    // Convenience for all-numeric rows.
    void row(const std::vector<double>& vals) {
        std::vector<std::string> cells;
        cells.reserve(vals.size());
        for (double v : vals) cells.push_back(dtos(v));
        write_cells(cells);
    }

    void close() {
        if (own_.is_open()) own_.close();
    }

private:
    void write_cells(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) *out_ << ',';
            *out_ << cells[i];
        }
        *out_ << '\n';
    }

    std::ofstream own_;
    std::ostream* out_;
};

}  // namespace kobalab
