#include "hdrx/traffic_matrix.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace hdrx {

void TrafficMatrix::add(std::uint32_t anon_src, std::uint32_t anon_dst, std::uint64_t count) {
    if (count == 0) return;
    entries_[key(anon_src, anon_dst)] += count;
    total_ += count;
}

void TrafficMatrix::ingest_summary(const SummaryPacket& s, const Anonymizer& anonymizer) {
    for (const auto& p : s.pairs) {
        add(anonymizer.anonymize(p.src_ip), anonymizer.anonymize(p.dst_ip));
    }
}

void TrafficMatrix::merge(const TrafficMatrix& other) {
    for (const auto& [k, count] : other.entries_) entries_[k] += count;
    total_ += other.total_;
}

std::uint64_t TrafficMatrix::at(std::uint32_t anon_src, std::uint32_t anon_dst) const {
    auto it = entries_.find(key(anon_src, anon_dst));
    return it == entries_.end() ? 0 : it->second;
}

std::vector<std::pair<TrafficMatrix::Cell, std::uint64_t>> TrafficMatrix::sorted_entries() const {
    std::vector<std::pair<Cell, std::uint64_t>> rows;
    rows.reserve(entries_.size());
    for (const auto& [k, count] : entries_) {
        rows.push_back({{static_cast<std::uint32_t>(k >> 32), static_cast<std::uint32_t>(k)}, count});
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

std::map<std::uint64_t, std::uint64_t> TrafficMatrix::count_histogram() const {
    std::map<std::uint64_t, std::uint64_t> hist;
    for (const auto& [k, count] : entries_) ++hist[count];
    return hist;
}

TrafficMatrix merge(const TrafficMatrix& a, const TrafficMatrix& b) {
    TrafficMatrix out = a;
    out.merge(b);
    return out;
}

std::size_t export_matrix(const TrafficMatrix& m, std::ostream& sink) {
    std::size_t rows = 0;
    std::string line;
    for (const auto& [cell, count] : m.sorted_entries()) {
        line.clear();
        line += std::to_string(cell.first);
        line += '\t';
        line += std::to_string(cell.second);
        line += '\t';
        line += std::to_string(count);
        line += '\n';
        sink.write(line.data(), static_cast<std::streamsize>(line.size()));
        if (!sink) throw std::runtime_error("matrix export: write failed");
        ++rows;
    }
    sink.flush();
    if (!sink) throw std::runtime_error("matrix export: flush failed");
    return rows;
}

namespace {

template <typename T>
T parse_field(std::string_view text, std::size_t line_no) {
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw std::runtime_error("matrix import: bad field '" + std::string(text) + "' on line " +
                                 std::to_string(line_no));
    }
    return value;
}

}  // namespace

TrafficMatrix import_matrix(std::istream& source) {
    TrafficMatrix m;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::string_view v = line;
        auto t1 = v.find('\t');
        auto t2 = t1 == std::string_view::npos ? t1 : v.find('\t', t1 + 1);
        if (t2 == std::string_view::npos) {
            throw std::runtime_error("matrix import: expected 3 tab-separated fields on line " +
                                     std::to_string(line_no));
        }
        auto src = parse_field<std::uint32_t>(v.substr(0, t1), line_no);
        auto dst = parse_field<std::uint32_t>(v.substr(t1 + 1, t2 - t1 - 1), line_no);
        auto count = parse_field<std::uint64_t>(v.substr(t2 + 1), line_no);
        m.add(src, dst, count);
    }
    return m;
}

}  // namespace hdrx
