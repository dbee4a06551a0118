#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pdp/partition.hpp"

namespace pdp {

struct ParseError : std::runtime_error {
    ParseError(std::size_t line_, const std::string& what)
        : std::runtime_error("line " + std::to_string(line_) + ": " + what),
          line(line_) {}
    std::size_t line;
};

// Trajectory text format, one token per line: "N" for a new class,
// "E <j>" for existing class j.
inline void write_trajectory(std::ostream& os,
                             std::span<const StepChoice> steps) {
    for (const auto& c : steps) {
        if (c.is_new_class())
            os << "N\n";
        else
            os << "E " << c.index() << "\n";
    }
}

struct IngestResult {
    Abundance abundance;
    std::vector<StepChoice> steps;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::int64_t parse_int(std::string_view s, std::size_t line) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError(line, "expected an integer, got '" + std::string(s) + "'");
    return v;
}

}  // namespace detail

// Observation stream: each token is either a species label (positive
// integer, first uses must run 1, 2, 3, ...) or a step token "N" / "E j".
// Tokens are newline-separated; commas also split within a line.
inline IngestResult ingest_observations(std::istream& is) {
    std::vector<StepChoice> steps;
    Abundance a;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        std::string_view rest(raw);
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            std::string_view tok = detail::trim(rest.substr(0, comma));
            rest = comma == std::string_view::npos ? std::string_view{}
                                                   : rest.substr(comma + 1);
            if (tok.empty()) continue;

            StepChoice c = StepChoice::new_class();
            if (tok == "N" || tok == "n") {
                // new class
            } else if (tok.front() == 'E' || tok.front() == 'e') {
                const std::int64_t j = detail::parse_int(detail::trim(tok.substr(1)), line_no);
                if (j < 1 || j > a.k())
                    throw ParseError(line_no, "existing-class index " + std::to_string(j) +
                                                  " out of range (k = " + std::to_string(a.k()) + ")");
                c = StepChoice::existing(j);
            } else {
                const std::int64_t label = detail::parse_int(tok, line_no);
                if (label < 1)
                    throw ParseError(line_no, "species labels must be positive");
                if (label > a.k() + 1)
                    throw ParseError(line_no,
                                     "discovery-order violation: label " + std::to_string(label) +
                                         " seen while only " + std::to_string(a.k()) +
                                         " classes are known");
                c = label == a.k() + 1 ? StepChoice::new_class()
                                       : StepChoice::existing(label);
            }
            a.apply(c);
            steps.push_back(c);
        }
    }
    if (steps.empty()) throw ParseError(line_no, "no observations");
    return {std::move(a), std::move(steps)};
}

// Full round-trip precision for report floats.
inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Plot-ready CSV: header row, period decimal separator, 17 significant
// digits.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    void header(std::span<const std::string> cols) { write_row(cols); }

    void cell(std::int64_t v) { add(std::to_string(v)); }
    void cell(double v) { add(format_double(v)); }
    void cell(const std::string& v) { add(v); }

    void end_row() {
        os_ << row_ << "\n";
        row_.clear();
    }

private:
    void add(const std::string& s) {
        if (!row_.empty()) row_ += ',';
        row_ += s;
    }
    void write_row(std::span<const std::string> cols) {
        for (const auto& c : cols) add(c);
        end_row();
    }
    std::ostream& os_;
    std::string row_;
};

}  // namespace pdp
