#include "plume/trajectory_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "plume/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "trajectory container assumes a little-endian host");

namespace plume::io {

namespace {

using nlohmann::json;

template <typename T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
bool get(std::istream& in, T& value) {
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    return in.gcount() == sizeof(T);
}

json vec_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec_from_json(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

[[noreturn]] void truncated(const char* what) {
    throw FormatError(FormatError::Kind::truncated, std::string("truncated file: ") + what);
}

}  // namespace

std::string header_to_json(const TrajectoryHeader& h) {
    json j;
    j["schema_version"] = h.schema_version;
    j["dt"] = h.dt;
    j["mean_wind"] = h.mean_wind;
    j["domain_min"] = vec_to_json(h.domain_min);
    j["domain_max"] = vec_to_json(h.domain_max);
    j["tx"] = {{"position", vec_to_json(h.tx.position)},
               {"radius", h.tx.radius},
               {"release_per_step", h.tx.release_per_step},
               {"p1", h.tx.p1}};
    j["p_deg"] = h.p_deg;
    j["seed"] = h.seed;
    j["n_steps"] = h.n_steps;
    return j.dump();
}

TrajectoryHeader header_from_json(const std::string& text) {
    json j = json::parse(text);
    TrajectoryHeader h;
    h.schema_version = j.at("schema_version").get<std::uint16_t>();
    h.dt = j.at("dt").get<double>();
    h.mean_wind = j.at("mean_wind").get<double>();
    h.domain_min = vec_from_json(j.at("domain_min"));
    h.domain_max = vec_from_json(j.at("domain_max"));
    const json& tx = j.at("tx");
    h.tx.position = vec_from_json(tx.at("position"));
    h.tx.radius = tx.at("radius").get<double>();
    h.tx.release_per_step = tx.at("release_per_step").get<std::uint32_t>();
    h.tx.p1 = tx.at("p1").get<double>();
    h.p_deg = j.at("p_deg").get<std::array<double, 2>>();
    h.seed = j.at("seed").get<std::uint64_t>();
    h.n_steps = j.at("n_steps").get<std::uint32_t>();
    return h;
}

SnapshotWriter::SnapshotWriter(std::ostream& out, const TrajectoryHeader& header)
    : out_(out), n_steps_(header.n_steps) {
    const std::string hj = header_to_json(header);
    out_.write(kMagic, sizeof(kMagic));
    put<std::uint16_t>(out_, kFormatVersion);
    put<std::uint32_t>(out_, static_cast<std::uint32_t>(hj.size()));
    out_.write(hj.data(), static_cast<std::streamsize>(hj.size()));
    bytes_ = sizeof(kMagic) + sizeof(std::uint16_t) + sizeof(std::uint32_t) + hj.size();
    if (!out_) {
        throw DataError("trajectory write failed (header)");
    }
}

void SnapshotWriter::write(const TrajectorySnapshot& snap) {
    if (static_cast<std::int64_t>(snap.step) <= last_step_ || snap.step >= n_steps_) {
        throw FormatError(FormatError::Kind::inconsistent,
                          "snapshot step " + std::to_string(snap.step) +
                              " out of order or beyond the declared step count");
    }
    const std::size_t n = snap.size();
    put<std::uint32_t>(out_, snap.step);
    put<std::uint32_t>(out_, static_cast<std::uint32_t>(n));
    for (std::size_t i = 0; i < n; ++i) {
        put<std::uint8_t>(out_, snap.species[i]);
        put<std::uint32_t>(out_, snap.release_step[i]);
        put<double>(out_, snap.x[i]);
        put<double>(out_, snap.y[i]);
        put<double>(out_, snap.z[i]);
    }
    if (!out_) {
        throw DataError("trajectory write failed (snapshot)");
    }
    last_step_ = snap.step;
    bytes_ += 8 + n * (1 + 4 + 3 * 8);
}

std::uint64_t write_snapshots(std::ostream& out, const TrajectoryHeader& header,
                              std::span<const TrajectorySnapshot> snapshots) {
    SnapshotWriter writer(out, header);
    for (const TrajectorySnapshot& s : snapshots) {
        writer.write(s);
    }
    return writer.bytes_written();
}

SnapshotReader::SnapshotReader(std::istream& in) : in_(in) {
    char magic[4];
    in_.read(magic, sizeof(magic));
    if (in_.gcount() != sizeof(magic) || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
        throw FormatError(FormatError::Kind::bad_magic, "not a trajectory container (bad magic)");
    }
    std::uint16_t version = 0;
    if (!get(in_, version)) truncated("version field");
    if (version != kFormatVersion) {
        throw FormatError(FormatError::Kind::unsupported_version,
                          "unsupported container version " + std::to_string(version));
    }
    std::uint32_t header_len = 0;
    if (!get(in_, header_len)) truncated("header length");
    std::string text(header_len, '\0');
    in_.read(text.data(), header_len);
    if (in_.gcount() != static_cast<std::streamsize>(header_len)) truncated("header block");
    try {
        header_ = header_from_json(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(FormatError::Kind::inconsistent,
                          std::string("unreadable header block: ") + e.what());
    }
}

bool SnapshotReader::next(TrajectorySnapshot& out) {
    std::uint32_t step = 0;
    in_.read(reinterpret_cast<char*>(&step), sizeof(step));
    if (in_.gcount() == 0 && in_.eof()) {
        return false;  // clean end of file
    }
    if (in_.gcount() != sizeof(step)) truncated("snapshot step");
    std::uint32_t count = 0;
    if (!get(in_, count)) truncated("particle count");

    out.step = step;
    out.species.resize(count);
    out.release_step.resize(count);
    out.x.resize(count);
    out.y.resize(count);
    out.z.resize(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        if (!get(in_, out.species[i])) truncated("particle record");
        if (!get(in_, out.release_step[i])) truncated("particle record");
        if (!get(in_, out.x[i])) truncated("particle record");
        if (!get(in_, out.y[i])) truncated("particle record");
        if (!get(in_, out.z[i])) truncated("particle record");
    }
    return true;
}

std::pair<TrajectoryHeader, std::vector<TrajectorySnapshot>> read_snapshots(std::istream& in) {
    SnapshotReader reader(in);
    std::vector<TrajectorySnapshot> snaps;
    TrajectorySnapshot s;
    while (reader.next(s)) {
        snaps.push_back(s);
    }
    return {reader.header(), std::move(snaps)};
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    for (std::string& f : fields) {
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
    }
    return fields;
}

struct ImportRow {
    std::uint32_t step;
    std::uint64_t particle;
    std::uint8_t species;
    double x, y, z;
};

}  // namespace

ImportResult import_external_csv(std::istream& in, const ImportOptions& options) {
    ImportResult result;
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("csv import: empty input (missing header row)");
    }
    const std::vector<std::string> names = split_csv_line(line);
    int col_step = -1, col_particle = -1, col_species = -1, col_x = -1, col_y = -1, col_z = -1;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == "step") col_step = static_cast<int>(i);
        else if (names[i] == "particle") col_particle = static_cast<int>(i);
        else if (names[i] == "species") col_species = static_cast<int>(i);
        else if (names[i] == "x") col_x = static_cast<int>(i);
        else if (names[i] == "y") col_y = static_cast<int>(i);
        else if (names[i] == "z") col_z = static_cast<int>(i);
    }
    if (col_step < 0 || col_particle < 0 || col_x < 0 || col_y < 0 || col_z < 0) {
        throw DataError("csv import: header must name step,particle,x,y,z columns");
    }

    std::vector<ImportRow> rows;
    std::map<std::uint64_t, std::uint32_t> first_seen;
    std::size_t line_no = 1;
    const auto fail_row = [&](const std::string& why) {
        result.row_errors.push_back("line " + std::to_string(line_no) + ": " + why);
        if (result.row_errors.size() > options.max_row_errors) {
            throw DataError("csv import aborted: more than " +
                            std::to_string(options.max_row_errors) +
                            " malformed rows; first: " + result.row_errors.front());
        }
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> f = split_csv_line(line);
        const std::size_t needed = static_cast<std::size_t>(
            std::max({col_step, col_particle, col_species, col_x, col_y, col_z})) + 1;
        if (f.size() < needed) {
            fail_row("expected at least " + std::to_string(needed) + " fields, got " +
                     std::to_string(f.size()));
            continue;
        }
        ImportRow row{};
        try {
            row.step = static_cast<std::uint32_t>(std::stoul(f[col_step]));
            row.particle = std::stoull(f[col_particle]);
            row.x = std::stod(f[col_x]);
            row.y = std::stod(f[col_y]);
            row.z = std::stod(f[col_z]);
        } catch (const std::exception&) {
            fail_row("unparseable numeric field");
            continue;
        }
        if (!std::isfinite(row.x) || !std::isfinite(row.y) || !std::isfinite(row.z)) {
            fail_row("non-finite coordinate");
            continue;
        }
        if (col_species >= 0 && !f[col_species].empty()) {
            if (f[col_species] == "1") row.species = 1;
            else if (f[col_species] == "2") row.species = 2;
            else {
                fail_row("species must be 1 or 2, got '" + f[col_species] + "'");
                continue;
            }
        } else {
            row.species = static_cast<std::uint8_t>(options.default_species);
        }
        const auto [it, inserted] = first_seen.try_emplace(row.particle, row.step);
        if (!inserted && row.step < it->second) {
            it->second = row.step;
        }
        rows.push_back(row);
    }

    std::stable_sort(rows.begin(), rows.end(),
                     [](const ImportRow& a, const ImportRow& b) { return a.step < b.step; });

    Vec3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
            std::numeric_limits<double>::max()};
    Vec3 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest(),
            std::numeric_limits<double>::lowest()};
    for (const ImportRow& r : rows) {
        lo.x = std::min(lo.x, r.x); lo.y = std::min(lo.y, r.y); lo.z = std::min(lo.z, r.z);
        hi.x = std::max(hi.x, r.x); hi.y = std::max(hi.y, r.y); hi.z = std::max(hi.z, r.z);
    }

    TrajectoryHeader h;
    h.dt = options.dt;
    h.mean_wind = options.mean_wind;
    h.tx = options.tx;
    if (!rows.empty()) {
        h.domain_min = lo;
        h.domain_max = hi;
        h.n_steps = rows.back().step + 1;
    }
    result.header = h;

    for (std::size_t i = 0; i < rows.size();) {
        TrajectorySnapshot snap;
        snap.step = rows[i].step;
        while (i < rows.size() && rows[i].step == snap.step) {
            const ImportRow& r = rows[i];
            snap.species.push_back(r.species);
            snap.release_step.push_back(first_seen.at(r.particle));
            snap.x.push_back(r.x);
            snap.y.push_back(r.y);
            snap.z.push_back(r.z);
            ++i;
        }
        result.snapshots.push_back(std::move(snap));
    }
    return result;
}

}  // namespace plume::io
