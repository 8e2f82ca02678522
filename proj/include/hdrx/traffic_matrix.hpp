#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hdrx/aggregator.hpp"
#include "hdrx/anonymizer.hpp"

namespace hdrx {

// Sparse (anon_src, anon_dst) -> packet count. Single writer; shard and
// merge for parallel collection.
class TrafficMatrix {
public:
    using Cell = std::pair<std::uint32_t, std::uint32_t>;

    void add(std::uint32_t anon_src, std::uint32_t anon_dst, std::uint64_t count = 1);

    /// Anonymizes each pair of `s` and bumps its cell by one.
    void ingest_summary(const SummaryPacket& s, const Anonymizer& anonymizer);

    void merge(const TrafficMatrix& other);

    std::uint64_t at(std::uint32_t anon_src, std::uint32_t anon_dst) const;
    std::uint64_t total() const noexcept { return total_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    /// Entries in (anon_src, anon_dst) ascending order.
    std::vector<std::pair<Cell, std::uint64_t>> sorted_entries() const;

    /// Frequency of each count value (count -> number of cells).
    std::map<std::uint64_t, std::uint64_t> count_histogram() const;

    bool operator==(const TrafficMatrix& rhs) const {
        return total_ == rhs.total_ && entries_ == rhs.entries_;
    }

private:
    static std::uint64_t key(std::uint32_t s, std::uint32_t d) noexcept {
        return (std::uint64_t{s} << 32) | d;
    }

    std::unordered_map<std::uint64_t, std::uint64_t> entries_;
    std::uint64_t total_ = 0;
};

TrafficMatrix merge(const TrafficMatrix& a, const TrafficMatrix& b);

/// Writes "anon_src\tanon_dst\tcount\n" rows sorted ascending. Throws
/// std::runtime_error if the stream goes bad. Returns rows written.
std::size_t export_matrix(const TrafficMatrix& m, std::ostream& sink);

/// Inverse of export_matrix. Throws std::runtime_error on a malformed row.
TrafficMatrix import_matrix(std::istream& source);

}  // namespace hdrx
