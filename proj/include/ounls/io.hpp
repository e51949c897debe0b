#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ounls/experiments.hpp"

namespace ounls {

inline constexpr const char* kToolVersion = "0.1.0";

/// 17 significant digits (%.17g); NaN and infinities
/// are written as the literals nan, inf and -inf.
std::string format_double(double v);

inline constexpr const char* kDiagnosticsHeader =
    "time,mass,energy,h1_native,virial,virial_rhs,morawetz_I,morawetz_dI_bound,"
    "tail_mass_fraction,boundary_mass_fraction";

/// Header plus one row per record. Throws std::invalid_argument on no records.
std::string diagnostics_csv(std::span<const DiagnosticsRecord> records);
std::string table_csv(const Table& table);
/// One JSON object per line: every check, then every ensemble summary.
std::string report_jsonl(const ScenarioReport& report);

/// Git blob object id: SHA-1 of "blob <size>\0" followed by the content.
std::string git_blob_hash(std::string_view content);

/// Writes through a temporary sibling file and renames it into place.
/// Raises IoError when the directory or file cannot be written.
void write_atomic(const std::filesystem::path& path, std::string_view content);

inline constexpr char kSnapshotMagic[16] = {'O', 'U', 'N', 'L', 'S', '-', 'F', 'I',
                                            'E', 'L', 'D', '-', 'v', '1', '\0', '\0'};

/// Flat binary: 16-byte magic, u64 rank, u64 sizes (x axes then α), then the
/// row-major samples as interleaved little-endian doubles (re, im).
std::string encode_snapshot(const Field& field, std::span<const std::uint64_t> shape);
/// (n_x, …, n_alpha) for a field of `disc`.
std::vector<std::uint64_t> snapshot_shape(const Discretization& disc);
void write_snapshot(const std::filesystem::path& path, const Field& field,
                    std::span<const std::uint64_t> shape);

struct Snapshot {
  std::vector<std::uint64_t> shape;
  std::vector<cplx> data;
};
Snapshot read_snapshot(const std::filesystem::path& path);

struct RunManifest {
  std::string tool_version = kToolVersion;
  nlohmann::ordered_json config;
  std::uint64_t seed = 0;
  std::string start_time;
  std::string end_time;
  std::vector<std::pair<std::string, std::string>> outputs;  // file name, blob hash
  nlohmann::ordered_json to_json() const;
};

/// Current UTC time as ISO 8601.
std::string utc_now();

/// Writes diagnostics.csv (when there are records), rows.csv (when the table
/// has rows), report.jsonl, u_plus.bin (when the report carries a field) and
/// finally manifest.json into `dir`. Returns the manifest.
RunManifest emit_report(const ScenarioReport& report, const ScenarioConfig& cfg,
                        const std::filesystem::path& dir, const std::string& start_time);

}  // namespace ounls
