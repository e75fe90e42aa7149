#pragma once

// Text configuration, CSV series, run manifests and SVG plots.
//
// Config format: one `key = value` per line, `#` starts a comment, and
// repeatable `[vortex]` / `[patch]` sections. Global keys may only appear
// before the first section.

#include "vwave/core.hpp"
#include "vwave/diagnostics.hpp"
#include "vwave/integrator.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace vwave {

struct RunSpec {
  InitialData init;
  SimConfig cfg;
};

/// Parses config text. Throws ConfigError with the line number for unknown
/// keys, malformed numbers and misplaced keys, and lists every missing
/// required key in one message. The result is validated.
RunSpec parse_config_text(const std::string& text);

/// Reads and parses a config file. Throws ConfigError if it cannot be read.
RunSpec parse_config(const std::filesystem::path& path);

/// Writes a config that parses back to the same values (17 significant digits).
std::string format_config(const RunSpec& spec);

/// Shortest round-tripping rendering used in every emitted file: 17
/// significant digits, "inf"/"-inf" for infinities and "" for NaN.
std::string format_number(double v);

/// One row per stored snapshot: t, then hx_k, hy_k, vx_k, vy_k per vortex.
struct TrajectoryRow {
  double t = 0.0;
  std::vector<MassiveVortex> vortices;
};

std::string trajectory_header(std::size_t vortex_count);
std::string trajectory_line(const TrajectoryRow& row);
std::string diagnostics_header(std::size_t vortex_count);
std::string diagnostics_line(const DiagnosticsRecord& r);

void write_trajectories(const std::filesystem::path& path, std::size_t vortex_count,
                        const std::vector<TrajectoryRow>& rows);
void write_diagnostics(const std::filesystem::path& path, std::size_t vortex_count,
                       const std::vector<DiagnosticsRecord>& rows);

/// Parsed trajectories.csv (vortex masses and circulations are not stored
/// there and come back as zero / one).
std::vector<TrajectoryRow> read_trajectories(const std::filesystem::path& path);

struct RunManifest {
  std::string config_echo;
  std::string start_time;  ///< UTC, ISO 8601
  std::string end_time;
  Termination termination = Termination::completed;
  double failure_time = 0.0;
  std::string message;
  std::size_t steps = 0;
  std::vector<std::string> outputs;
  std::string version;
};

std::string utc_timestamp();
/// "completed", "collision(t=...)" or "stiffness(t=...)".
std::string termination_label(Termination t, double failure_time);
void write_manifest(const std::filesystem::path& path, const RunManifest& m);

/// Vortex paths in the plane.
void write_trajectory_svg(const std::filesystem::path& path, const std::vector<TrajectoryRow>& rows);
/// Relative drift of H0 and I0 against t.
void write_drift_svg(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& rows);

/// Version string compiled into the library.
const char* version_string();

}  // namespace vwave
