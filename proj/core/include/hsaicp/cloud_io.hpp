// File I/O: point-cloud ingestion (PLY ASCII, PLY binary little-endian,
// XYZ text), cloud writers, registration reports, initial-transform files,
// and campaign serialization (JSON + CSV).
#pragma once

#include "hsaicp/geometry.hpp"
#include "hsaicp/simulation.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace hsaicp {

/// Malformed input. The message always names the file and the offending
/// line (text formats) or byte offset (binary).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CloudFormat { PlyAscii, PlyBinaryLE, Xyz };

/// Format is chosen by extension: .ply parses the header (ascii or
/// binary_little_endian), anything else is read as XYZ text.
PointCloud load_cloud(const std::filesystem::path& path);

/// Deterministic output: ASCII formats print 17 significant digits, so a
/// round trip reproduces every coordinate exactly.
void write_cloud(const PointCloud& cloud, const std::filesystem::path& path,
                 CloudFormat format);

/// One registration run, as written to / read from a report file.
struct RegistrationReport {
  std::string algorithm;
  int iterations = 0;
  bool converged = false;
  double xi = 1.0;
  RigidTransform transform;
  std::optional<double> eps_r;      // only when ground truth was known
  std::optional<double> eps_t_raw;
  std::optional<double> eps_t_norm;
  double runtime_ms = 0.0;
  // params echo
  double gamma = 2.0;
  double lambda = 2.0;
  double xi_min = 0.25;
  double delta = 0.0;
  int max_iterations = 100;
  double rel_tol = 1e-8;
  double trans_tol = 0.0;
  std::uint64_t seed = 0;
};

std::string report_json(const RegistrationReport& report);
void write_report(const RegistrationReport& report, const std::filesystem::path& path);
/// Inverse of report_json; re-validates the rotation block.
RegistrationReport parse_report(const std::string& json_text);

/// 16 whitespace-separated reals, row-major 4x4, last row 0 0 0 1. The
/// rotation block must satisfy the rigid-transform invariants.
RigidTransform load_transform(const std::filesystem::path& path);
std::string transform_json(const RigidTransform& transform);
void write_transform(const RigidTransform& transform, const std::filesystem::path& path);

/// Campaign serialization. The CSV carries one row per (trial, algorithm)
/// with only deterministic fields, so identical seeds produce identical
/// bytes; wall-clock runtimes live in the JSON.
std::string campaign_csv_header();
void append_campaign_csv(const CampaignReport& report, std::string& out);
std::string campaign_csv(const CampaignReport& report);
std::string campaign_json(const CampaignReport& report);

}  // namespace hsaicp
