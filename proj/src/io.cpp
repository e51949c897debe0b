#include "ounls/io.hpp"

#include "ounls/config.hpp"

#include <openssl/evp.h>

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

namespace ounls {

namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string diagnostics_csv(std::span<const DiagnosticsRecord> records) {
  if (records.empty()) throw std::invalid_argument("diagnostics_csv: no records");
  std::string out = kDiagnosticsHeader;
  out += '\n';
  for (const auto& r : records) {
    const double row[] = {r.time,       r.mass,        r.energy,           r.h1_native,
                          r.virial,     r.virial_rhs,  r.morawetz_I,       r.morawetz_dI_bound,
                          r.tail_mass_fraction, r.boundary_mass_fraction};
    for (std::size_t i = 0; i < std::size(row); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string table_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += table.columns[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

namespace {

nlohmann::ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

nlohmann::ordered_json stats_json(const RatioStats& s) {
  return {{"count", s.count},
          {"max", number(s.max)},
          {"mean", number(s.mean)},
          {"median", number(s.median)},
          {"q90", number(s.q90)}};
}

}  // namespace

std::string report_jsonl(const ScenarioReport& report) {
  std::string out;
  for (const auto& c : report.checks) {
    nlohmann::ordered_json j = {{"scenario", report.scenario},
                                {"check", c.name},
                                {"pass", c.pass},
                                {"value", number(c.value)},
                                {"limit", number(c.limit)},
                                {"detail", c.detail}};
    out += j.dump() + '\n';
  }
  for (const auto& e : report.ensembles) {
    nlohmann::ordered_json j = {{"scenario", report.scenario},
                                {"ensemble", e.label},
                                {"pass", e.pass},
                                {"coarse", stats_json(e.coarse)},
                                {"fine", stats_json(e.fine)},
                                {"relative_change", number(e.relative_change)},
                                {"ceiling", number(e.ceiling)}};
    out += j.dump() + '\n';
  }
  return out;
}

std::string git_blob_hash(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw std::runtime_error("git_blob_hash: EVP_MD_CTX_new failed");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("git_blob_hash: SHA-1 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

void write_atomic(const fs::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path.string() + "'");
  }
}

namespace {

void put_le(std::string& out, std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap64(v);
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}

std::uint64_t get_le(const char* p) {
  std::uint64_t v;
  std::memcpy(&v, p, 8);
  if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap64(v);
  return v;
}

}  // namespace

std::string encode_snapshot(const Field& field, std::span<const std::uint64_t> shape) {
  std::uint64_t count = 1;
  for (auto s : shape) count *= s;
  if (count != field.data.size() || shape.empty() || shape.back() != field.n_alpha) {
    throw std::invalid_argument("encode_snapshot: shape does not match the field");
  }
  std::string out(kSnapshotMagic, sizeof kSnapshotMagic);
  put_le(out, shape.size());
  for (auto s : shape) put_le(out, s);
  out.reserve(out.size() + 16 * field.data.size());
  for (const auto& v : field.data) {
    put_le(out, std::bit_cast<std::uint64_t>(v.real()));
    put_le(out, std::bit_cast<std::uint64_t>(v.imag()));
  }
  return out;
}

std::vector<std::uint64_t> snapshot_shape(const Discretization& disc) {
  std::vector<std::uint64_t> shape(disc.grid().dim(),
                                   static_cast<std::uint64_t>(disc.grid().points_per_axis()));
  shape.push_back(disc.alpha_size());
  return shape;
}

void write_snapshot(const fs::path& path, const Field& field, std::span<const std::uint64_t> shape) {
  write_atomic(path, encode_snapshot(field, shape));
}

Snapshot read_snapshot(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open snapshot '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  auto fail = [&](const char* why) { throw IoError("bad snapshot '" + path.string() + "': " + why); };
  if (bytes.size() < 24 || std::memcmp(bytes.data(), kSnapshotMagic, 16) != 0) fail("magic");
  const auto rank = get_le(bytes.data() + 16);
  if (rank == 0 || rank > 8 || bytes.size() < 24 + 8 * rank) fail("header");
  Snapshot s;
  std::uint64_t count = 1;
  for (std::uint64_t i = 0; i < rank; ++i) {
    s.shape.push_back(get_le(bytes.data() + 24 + 8 * i));
    count *= s.shape.back();
  }
  const std::size_t offset = 24 + 8 * rank;
  if (bytes.size() != offset + 16 * count) fail("size");
  s.data.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const char* p = bytes.data() + offset + 16 * i;
    s.data[i] = {std::bit_cast<double>(get_le(p)),
                 std::bit_cast<double>(get_le(p + 8))};
  }
  return s;
}

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json files = nlohmann::ordered_json::object();
  for (const auto& [name, hash] : outputs) files[name] = hash;
  return {{"tool_version", tool_version}, {"config", config},   {"seed", seed},
          {"start_time", start_time},     {"end_time", end_time}, {"outputs", files}};
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunManifest emit_report(const ScenarioReport& report, const ScenarioConfig& cfg,
                        const fs::path& dir, const std::string& start_time) {
  RunManifest m;
  m.config = config_to_json(cfg);
  m.seed = cfg.seed;
  m.start_time = start_time;
  auto emit = [&](const std::string& name, const std::string& content) {
    write_atomic(dir / name, content);
    m.outputs.emplace_back(name, git_blob_hash(content));
  };
  if (!report.records.empty()) emit("diagnostics.csv", diagnostics_csv(report.records));
  if (!report.table.rows.empty()) emit("rows.csv", table_csv(report.table));
  emit("report.jsonl", report_jsonl(report));
  if (report.field) {
    std::vector<std::uint64_t> shape;
    const auto side = static_cast<std::uint64_t>(cfg.grid.n_x);
    for (int a = 0; a < cfg.model.d; ++a) shape.push_back(side);
    shape.push_back(report.field->n_alpha);
    emit("u_plus.bin", encode_snapshot(*report.field, shape));
  }
  m.end_time = utc_now();
  write_atomic(dir / "manifest.json", m.to_json().dump(2) + '\n');
  return m;
}

}  // namespace ounls
