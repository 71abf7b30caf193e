#pragma once

// Trajectory container format.
//
// Layout (all integers little-endian):
//   magic "PLUM"
//   version            u16
//   header length      u32, followed by that many bytes of canonical JSON
//   per snapshot:
//     step             u32
//     particle count   u32
//     per particle: species u8, release_step u32, position 3 x f64
//
// Only alive particles are stored. Readers stream one snapshot at a time, so
// memory use is independent of file size.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "plume/trajectory.hpp"

namespace plume::io {

struct FormatError : std::runtime_error {
    enum class Kind { bad_magic, unsupported_version, truncated, inconsistent };

    FormatError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}

    Kind kind;
};

inline constexpr char kMagic[4] = {'P', 'L', 'U', 'M'};
inline constexpr std::uint16_t kFormatVersion = 1;

std::string header_to_json(const TrajectoryHeader& header);
TrajectoryHeader header_from_json(const std::string& text);

/// Single-writer sink; snapshots must arrive with strictly increasing steps
/// below the header's n_steps.
class SnapshotWriter {
public:
    SnapshotWriter(std::ostream& out, const TrajectoryHeader& header);

    void write(const TrajectorySnapshot& snap);

    std::uint64_t bytes_written() const { return bytes_; }

private:
    std::ostream& out_;
    std::uint32_t n_steps_;
    std::int64_t last_step_ = -1;
    std::uint64_t bytes_ = 0;
};

/// Writes header plus snapshots; returns total bytes.
std::uint64_t write_snapshots(std::ostream& out, const TrajectoryHeader& header,
                              std::span<const TrajectorySnapshot> snapshots);

/// Streaming reader. Construction consumes and validates the preamble.
class SnapshotReader {
public:
    explicit SnapshotReader(std::istream& in);

    const TrajectoryHeader& header() const { return header_; }

    /// Reads the next snapshot into `out`. Returns false at a clean
    /// end-of-file; throws FormatError{truncated} on a partial record.
    bool next(TrajectorySnapshot& out);

private:
    std::istream& in_;
    TrajectoryHeader header_;
};

std::pair<TrajectoryHeader, std::vector<TrajectorySnapshot>> read_snapshots(std::istream& in);

/// CSV import bridge for externally computed trajectories.
/// Expected header: step,particle,species,x,y,z (order-insensitive; species
/// optional). release_step of a particle is the first step it appears at.
struct ImportOptions {
    std::size_t max_row_errors = 10;  ///< hard fail once exceeded
    Species default_species = Species::type1;
    double dt = 1.0;
    double mean_wind = 0.0;
    TxConfig tx{};  ///< carried into the header for ground-truth distances
};

struct ImportResult {
    TrajectoryHeader header;
    std::vector<TrajectorySnapshot> snapshots;
    std::vector<std::string> row_errors;  ///< "line N: reason" entries
};

ImportResult import_external_csv(std::istream& in, const ImportOptions& options);

}  // namespace plume::io
