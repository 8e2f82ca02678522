#include "hdrx/rates.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hdrx {

Rates compute_rates(std::uint64_t packets, std::uint64_t bytes, double duration_s) {
    if (!(duration_s > 0.0)) throw std::invalid_argument("compute_rates: duration must be > 0");
    Rates r;
    r.pps = static_cast<double>(packets) / duration_s;
    r.mbps = static_cast<double>(bytes) * 8.0 / duration_s / 1e6;
    return r;
}

bool RateReport::consistent(double rel_tol) const {
    for (const auto& row : rows) {
        const double expected = row.pps * row.packet_size * 8.0 / 1e6;
        const double scale = std::max(std::abs(expected), std::abs(row.mbps));
        if (scale == 0.0) continue;
        if (std::abs(row.mbps - expected) > rel_tol * scale) return false;
    }
    return true;
}

void write_report_tsv(const RateReport& report, std::ostream& out) {
    char buf[160];
    out << "# accounting: " << kReportAccounting << '\n';
    out << "# mode: " << to_string(report.mode) << '\n';
    std::snprintf(buf, sizeof buf, "# duration_s: %.6f\n", report.duration_s);
    out << buf;
    out << "size_bytes\tmbps\tpps\n";
    for (const auto& row : report.rows) {
        std::snprintf(buf, sizeof buf, "%.17g\t%.17g\t%.17g\n", row.packet_size, row.mbps, row.pps);
        out << buf;
    }
    out.flush();
    if (!out) throw std::runtime_error("rate report: write failed");
}

RateReport read_report_tsv(std::istream& in) {
    RateReport report;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# mode: ", 0) == 0) report.mode = parse_replay_mode(line.substr(8));
            if (line.rfind("# duration_s: ", 0) == 0) report.duration_s = std::stod(line.substr(14));
            continue;
        }
        if (!header_seen) {
            if (line != "size_bytes\tmbps\tpps") {
                throw std::runtime_error("rate report: unexpected header '" + line + "'");
            }
            header_seen = true;
            continue;
        }
        std::istringstream fields(line);
        RateRow row;
        char tab1 = 0, tab2 = 0;
        fields >> row.packet_size;
        fields.get(tab1);
        fields >> row.mbps;
        fields.get(tab2);
        fields >> row.pps;
        if (!fields || tab1 != '\t' || tab2 != '\t' || fields.peek() != std::char_traits<char>::eof()) {
            throw std::runtime_error("rate report: malformed row '" + line + "'");
        }
        report.rows.push_back(row);
    }
    if (!header_seen) throw std::runtime_error("rate report: missing header row");
    return report;
}

std::string format_thousands(double value) {
    char digits[64];
    std::snprintf(digits, sizeof digits, "%.0f", std::round(value));
    std::string s = digits;
    const bool negative = !s.empty() && s[0] == '-';
    std::string body = negative ? s.substr(1) : s;
    std::string out;
    const std::size_t n = body.size();
    for (std::size_t i = 0; i < n; ++i) {
        out += body[i];
        const std::size_t left = n - i - 1;
        if (left > 0 && left % 3 == 0) out += ',';
    }
    return negative ? "-" + out : out;
}

std::string format_rate_table(const RateReport& report) {
    std::string out;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-19s| %-17s| %s\n", "Packet Size (Byte)", "Data Rate (Mbps)",
                  "Packet Rate (pps)");
    out += buf;
    for (const auto& row : report.rows) {
        char size[32];
        std::snprintf(size, sizeof size, row.packet_size == std::floor(row.packet_size) ? "%.0f" : "%.1f",
                      row.packet_size);
        std::snprintf(buf, sizeof buf, "%-19s| %-17s| %s\n", size,
                      format_thousands(row.mbps).c_str(), format_thousands(row.pps).c_str());
        out += buf;
    }
    return out;
}

}  // namespace hdrx
