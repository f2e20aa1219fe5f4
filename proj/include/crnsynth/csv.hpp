#ifndef CRNSYNTH_CSV_HPP
#define CRNSYNTH_CSV_HPP

// CSV output: header row, comma separated, '.' decimals, shortest
// round-trip formatting for doubles.

#include <charconv>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

namespace crnsynth {

inline std::string formatDouble(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) return "nan";
    return std::string(buf, end);
}

inline std::string csvField(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline void writeCsvRow(std::ostream& os, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ',';
        os << csvField(fields[i]);
    }
    os << '\n';
}

} // namespace crnsynth

#endif
