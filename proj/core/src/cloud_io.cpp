#include "hsaicp/cloud_io.hpp"

#include "json.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string_view>
#include <vector>

namespace hsaicp {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw ParseError(path.string() + ": " + what);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Whitespace tokenizer that remembers the current line for diagnostics.
struct Tokenizer {
  std::string_view text;
  std::size_t pos = 0;
  std::size_t line = 1;

  std::optional<std::string_view> next() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) {
      if (text[pos] == '\n') ++line;
      ++pos;
    }
    if (pos >= text.size()) return std::nullopt;
    const std::size_t start = pos;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos]))) {
      ++pos;
    }
    return text.substr(start, pos - start);
  }
};

double parse_double(std::string_view token, const std::filesystem::path& path,
                    std::size_t line) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    fail(path, "line " + std::to_string(line) + ": invalid number '" +
                   std::string(token) + "'");
  }
  if (!std::isfinite(value)) {
    fail(path, "line " + std::to_string(line) + ": non-finite coordinate '" +
                   std::string(token) + "'");
  }
  return value;
}

// --- PLY -----------------------------------------------------------------

struct PlyProperty {
  std::string type;
  std::string name;
  bool is_list = false;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

std::size_t scalar_size(const PlyProperty& property,
                        const std::filesystem::path& path) {
  const std::string& type = property.type;
  if (type == "char" || type == "int8" || type == "uchar" || type == "uint8") return 1;
  if (type == "short" || type == "int16" || type == "ushort" || type == "uint16") return 2;
  if (type == "int" || type == "int32" || type == "uint" || type == "uint32" ||
      type == "float" || type == "float32") {
    return 4;
  }
  if (type == "double" || type == "float64") return 8;
  fail(path, "property '" + property.name + "' has unknown type '" + type + "'");
}

struct PlyHeader {
  bool binary = false;
  std::vector<PlyElement> elements;
  std::size_t body_offset = 0;  // first byte after end_header newline
  std::size_t body_line = 1;    // first line after the header (ascii)
};

PlyHeader parse_ply_header(const std::string& content, const std::filesystem::path& path) {
  PlyHeader header;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool saw_format = false;
  bool saw_end = false;

  auto next_line = [&]() -> std::optional<std::string> {
    if (pos >= content.size()) return std::nullopt;
    const std::size_t eol = content.find('\n', pos);
    std::string line = content.substr(pos, eol == std::string::npos ? std::string::npos
                                                                    : eol - pos);
    pos = eol == std::string::npos ? content.size() : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };

  auto first = next_line();
  if (!first || *first != "ply") fail(path, "line 1: not a PLY file (missing 'ply' magic)");

  while (auto maybe_line = next_line()) {
    std::istringstream tokens(*maybe_line);
    std::string keyword;
    tokens >> keyword;
    if (keyword.empty() || keyword == "comment" || keyword == "obj_info") continue;
    if (keyword == "format") {
      std::string kind, version;
      tokens >> kind >> version;
      if (kind == "ascii") {
        header.binary = false;
      } else if (kind == "binary_little_endian") {
        header.binary = true;
      } else if (kind == "binary_big_endian") {
        fail(path, "line " + std::to_string(line_no) + ": big-endian PLY is not supported");
      } else {
        fail(path, "line " + std::to_string(line_no) + ": unknown format '" + kind + "'");
      }
      if (version != "1.0") {
        fail(path, "line " + std::to_string(line_no) + ": unsupported PLY version");
      }
      saw_format = true;
    } else if (keyword == "element") {
      PlyElement element;
      long long count = -1;
      tokens >> element.name >> count;
      if (element.name.empty() || count < 0 || tokens.fail()) {
        fail(path, "line " + std::to_string(line_no) + ": malformed element declaration");
      }
      element.count = static_cast<std::size_t>(count);
      header.elements.push_back(std::move(element));
    } else if (keyword == "property") {
      if (header.elements.empty()) {
        fail(path, "line " + std::to_string(line_no) + ": property before any element");
      }
      PlyProperty property;
      std::string first_token;
      tokens >> first_token;
      if (first_token == "list") {
        property.is_list = true;
        std::string count_type;
        tokens >> count_type >> property.type >> property.name;
      } else {
        property.type = first_token;
        tokens >> property.name;
      }
      if (property.type.empty() || property.name.empty() || tokens.fail()) {
        fail(path, "line " + std::to_string(line_no) + ": malformed property declaration");
      }
      header.elements.back().properties.push_back(std::move(property));
    } else if (keyword == "end_header") {
      saw_end = true;
      break;
    } else {
      fail(path, "line " + std::to_string(line_no) + ": unknown header keyword '" +
                     keyword + "'");
    }
  }

  if (!saw_end) fail(path, "line " + std::to_string(line_no) + ": missing end_header");
  if (!saw_format) fail(path, "line " + std::to_string(line_no) + ": missing format line");
  header.body_offset = pos;
  header.body_line = line_no + 1;
  return header;
}

PointCloud parse_ply(const std::string& content, const std::filesystem::path& path) {
  const PlyHeader header = parse_ply_header(content, path);

  std::size_t vertex_element = header.elements.size();
  for (std::size_t e = 0; e < header.elements.size(); ++e) {
    if (header.elements[e].name == "vertex") {
      vertex_element = e;
      break;
    }
  }
  if (vertex_element == header.elements.size()) {
    fail(path, "header declares no vertex element");
  }
  const PlyElement& vertex = header.elements[vertex_element];
  if (vertex.count == 0) fail(path, "vertex element is empty");

  int ix = -1, iy = -1, iz = -1;
  for (std::size_t p = 0; p < vertex.properties.size(); ++p) {
    const PlyProperty& property = vertex.properties[p];
    if (property.is_list) {
      fail(path, "list property '" + property.name + "' in vertex element is not supported");
    }
    if (property.name == "x") ix = static_cast<int>(p);
    if (property.name == "y") iy = static_cast<int>(p);
    if (property.name == "z") iz = static_cast<int>(p);
  }
  if (ix < 0 || iy < 0 || iz < 0) fail(path, "vertex element lacks x/y/z properties");
  for (int idx : {ix, iy, iz}) {
    const std::string& t = vertex.properties[static_cast<std::size_t>(idx)].type;
    if (t != "float" && t != "float32" && t != "double" && t != "float64") {
      fail(path, "coordinate property must be float or double, got '" + t + "'");
    }
  }

  std::vector<Point3> points;
  points.reserve(vertex.count);

  if (!header.binary) {
    Tokenizer tok{std::string_view(content).substr(header.body_offset), 0,
                  header.body_line};
    // Elements may precede the vertices; their rows are fixed-width since
    // list properties were rejected above only for vertex — reject them for
    // preceding elements too, we cannot size their rows otherwise.
    for (std::size_t e = 0; e < vertex_element; ++e) {
      for (const PlyProperty& property : header.elements[e].properties) {
        if (property.is_list) {
          fail(path, "list property before vertex element is not supported");
        }
      }
      const std::size_t skip = header.elements[e].count *
                               header.elements[e].properties.size();
      for (std::size_t k = 0; k < skip; ++k) {
        if (!tok.next()) fail(path, "unexpected end of file in element '" +
                                        header.elements[e].name + "'");
      }
    }
    for (std::size_t v = 0; v < vertex.count; ++v) {
      double xyz[3] = {0, 0, 0};
      for (std::size_t p = 0; p < vertex.properties.size(); ++p) {
        const auto token = tok.next();
        if (!token) {
          fail(path, "line " + std::to_string(tok.line) + ": vertex " +
                         std::to_string(v) + " of " + std::to_string(vertex.count) +
                         " missing (count mismatch?)");
        }
        if (p == static_cast<std::size_t>(ix) || p == static_cast<std::size_t>(iy) ||
            p == static_cast<std::size_t>(iz)) {
          const double value = parse_double(*token, path, tok.line);
          if (p == static_cast<std::size_t>(ix)) xyz[0] = value;
          if (p == static_cast<std::size_t>(iy)) xyz[1] = value;
          if (p == static_cast<std::size_t>(iz)) xyz[2] = value;
        }
      }
      points.emplace_back(xyz[0], xyz[1], xyz[2]);
    }
  } else {
    std::size_t offset = header.body_offset;
    for (std::size_t e = 0; e < vertex_element; ++e) {
      std::size_t stride = 0;
      for (const PlyProperty& property : header.elements[e].properties) {
        if (property.is_list) {
          fail(path, "list property before vertex element is not supported");
        }
        stride += scalar_size(property, path);
      }
      offset += stride * header.elements[e].count;
    }

    std::size_t stride = 0;
    std::size_t off_x = 0, off_y = 0, off_z = 0;
    for (std::size_t p = 0; p < vertex.properties.size(); ++p) {
      if (p == static_cast<std::size_t>(ix)) off_x = stride;
      if (p == static_cast<std::size_t>(iy)) off_y = stride;
      if (p == static_cast<std::size_t>(iz)) off_z = stride;
      stride += scalar_size(vertex.properties[p], path);
    }

    auto read_coord = [&](std::size_t base, std::size_t off, const std::string& type) {
      if (type == "float" || type == "float32") {
        float f = 0;
        std::memcpy(&f, content.data() + base + off, sizeof(f));
        return static_cast<double>(f);
      }
      double d = 0;
      std::memcpy(&d, content.data() + base + off, sizeof(d));
      return d;
    };

    for (std::size_t v = 0; v < vertex.count; ++v) {
      const std::size_t base = offset + v * stride;
      if (base + stride > content.size()) {
        fail(path, "unexpected end of file at byte offset " +
                       std::to_string(content.size()) + " (vertex " + std::to_string(v) +
                       " of " + std::to_string(vertex.count) + ")");
      }
      const double x = read_coord(base, off_x, vertex.properties[static_cast<std::size_t>(ix)].type);
      const double y = read_coord(base, off_y, vertex.properties[static_cast<std::size_t>(iy)].type);
      const double z = read_coord(base, off_z, vertex.properties[static_cast<std::size_t>(iz)].type);
      if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
        fail(path, "non-finite coordinate at byte offset " + std::to_string(base) +
                       " (vertex " + std::to_string(v) + ")");
      }
      points.emplace_back(x, y, z);
    }
  }

  return PointCloud(std::move(points));
}

// --- XYZ -----------------------------------------------------------------

PointCloud parse_xyz(const std::string& content, const std::filesystem::path& path) {
  std::vector<Point3> points;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < content.size()) {
    const std::size_t eol = content.find('\n', pos);
    std::string_view line(content.data() + pos,
                          (eol == std::string::npos ? content.size() : eol) - pos);
    pos = eol == std::string::npos ? content.size() : eol + 1;
    ++line_no;

    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    Tokenizer tok{line, 0, line_no};
    const auto t0 = tok.next();
    if (!t0) continue;  // blank or comment-only line
    const auto t1 = tok.next();
    const auto t2 = tok.next();
    if (!t1 || !t2) {
      fail(path, "line " + std::to_string(line_no) + ": expected 3 coordinates");
    }
    points.emplace_back(parse_double(*t0, path, line_no),
                        parse_double(*t1, path, line_no),
                        parse_double(*t2, path, line_no));
    // Trailing columns (intensity etc.) are ignored.
  }
  if (points.empty()) fail(path, "no points found");
  return PointCloud(std::move(points));
}

}  // namespace

PointCloud load_cloud(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  if (path.extension() == ".ply") return parse_ply(content, path);
  return parse_xyz(content, path);
}

void write_cloud(const PointCloud& cloud, const std::filesystem::path& path,
                 CloudFormat format) {
  static_assert(std::endian::native == std::endian::little,
                "binary PLY writer assumes a little-endian host");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");

  if (format == CloudFormat::Xyz) {
    for (const Point3& p : cloud) {
      out << fmt17(p.x()) << ' ' << fmt17(p.y()) << ' ' << fmt17(p.z()) << '\n';
    }
  } else {
    out << "ply\n";
    out << (format == CloudFormat::PlyAscii ? "format ascii 1.0\n"
                                            : "format binary_little_endian 1.0\n");
    out << "element vertex " << cloud.size() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    out << "end_header\n";
    if (format == CloudFormat::PlyAscii) {
      for (const Point3& p : cloud) {
        out << fmt17(p.x()) << ' ' << fmt17(p.y()) << ' ' << fmt17(p.z()) << '\n';
      }
    } else {
      for (const Point3& p : cloud) {
        const double xyz[3] = {p.x(), p.y(), p.z()};
        out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
      }
    }
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

namespace {

json transform_to_json(const RigidTransform& transform) {
  json j;
  json rotation = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rotation.push_back(transform.rotation(r, c));
  }
  j["rotation"] = std::move(rotation);
  j["translation"] = {transform.translation.x(), transform.translation.y(),
                      transform.translation.z()};
  return j;
}

RigidTransform transform_from_json(const json& j) {
  RigidTransform transform;
  const auto& rotation = j.at("rotation");
  const auto& translation = j.at("translation");
  if (rotation.size() != 9 || translation.size() != 3) {
    throw ParseError("transform: rotation must have 9 entries and translation 3");
  }
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      transform.rotation(r, c) = rotation.at(static_cast<std::size_t>(3 * r + c)).get<double>();
    }
  }
  for (int k = 0; k < 3; ++k) {
    transform.translation(k) = translation.at(static_cast<std::size_t>(k)).get<double>();
  }
  if (!transform.is_valid()) {
    throw ParseError("transform: rotation block violates the rigid-transform invariants");
  }
  return transform;
}

}  // namespace

std::string report_json(const RegistrationReport& report) {
  json j;
  j["algorithm"] = report.algorithm;
  j["iterations"] = report.iterations;
  j["converged"] = report.converged;
  j["xi"] = report.xi;
  const json transform = transform_to_json(report.transform);
  j["rotation"] = transform.at("rotation");
  j["translation"] = transform.at("translation");
  if (report.eps_r) j["eps_r"] = *report.eps_r;
  if (report.eps_t_raw) j["eps_t_raw"] = *report.eps_t_raw;
  if (report.eps_t_norm) j["eps_t_norm"] = *report.eps_t_norm;
  j["runtime_ms"] = report.runtime_ms;
  j["params"] = {{"gamma", report.gamma},
                 {"lambda", report.lambda},
                 {"xi_min", report.xi_min},
                 {"delta", report.delta},
                 {"max_iterations", report.max_iterations},
                 {"rel_tol", report.rel_tol},
                 {"trans_tol", report.trans_tol}};
  j["seed"] = report.seed;
  return j.dump(2) + "\n";
}

void write_report(const RegistrationReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << report_json(report);
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

RegistrationReport parse_report(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
  try {
    RegistrationReport report;
    report.algorithm = j.at("algorithm").get<std::string>();
    report.iterations = j.at("iterations").get<int>();
    report.converged = j.at("converged").get<bool>();
    report.xi = j.at("xi").get<double>();
    json transform;
    transform["rotation"] = j.at("rotation");
    transform["translation"] = j.at("translation");
    report.transform = transform_from_json(transform);
    if (j.contains("eps_r")) report.eps_r = j.at("eps_r").get<double>();
    if (j.contains("eps_t_raw")) report.eps_t_raw = j.at("eps_t_raw").get<double>();
    if (j.contains("eps_t_norm")) report.eps_t_norm = j.at("eps_t_norm").get<double>();
    report.runtime_ms = j.at("runtime_ms").get<double>();
    const json& params = j.at("params");
    report.gamma = params.at("gamma").get<double>();
    report.lambda = params.at("lambda").get<double>();
    report.xi_min = params.at("xi_min").get<double>();
    report.delta = params.at("delta").get<double>();
    report.max_iterations = params.at("max_iterations").get<int>();
    report.rel_tol = params.at("rel_tol").get<double>();
    report.trans_tol = params.at("trans_tol").get<double>();
    report.seed = j.at("seed").get<std::uint64_t>();
    return report;
  } catch (const json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
}

RigidTransform load_transform(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  Tokenizer tok{content, 0, 1};
  double m[16];
  for (int k = 0; k < 16; ++k) {
    const auto token = tok.next();
    if (!token) {
      fail(path, "line " + std::to_string(tok.line) +
                     ": expected 16 numbers (row-major 4x4), got " + std::to_string(k));
    }
    m[k] = parse_double(*token, path, tok.line);
  }
  if (tok.next()) fail(path, "trailing data after 16 numbers");
  for (int k = 0; k < 4; ++k) {
    const double expected = k == 3 ? 1.0 : 0.0;
    if (std::abs(m[12 + k] - expected) > 1e-12) {
      fail(path, "last row must be 0 0 0 1");
    }
  }
  RigidTransform transform;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) transform.rotation(r, c) = m[4 * r + c];
    transform.translation(r) = m[4 * r + 3];
  }
  if (!transform.is_valid()) {
    fail(path, "rotation block violates the rigid-transform invariants");
  }
  return transform;
}

std::string transform_json(const RigidTransform& transform) {
  return transform_to_json(transform).dump(2) + "\n";
}

void write_transform(const RigidTransform& transform, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << transform_json(transform);
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::string campaign_csv_header() {
  return "xi_true,n_cut,trial,algorithm,eps_r,eps_t_raw,eps_t_norm,success,"
         "converged,iterations,xi_estimated\n";
}

void append_campaign_csv(const CampaignReport& report, std::string& out) {
  for (const TrialReport& tr : report.trial_reports) {
    out += fmt17(report.xi_true);
    out += ',';
    out += std::to_string(report.config.n_cut);
    out += ',';
    out += std::to_string(tr.trial);
    out += ',';
    out += tr.algorithm;
    out += ',';
    out += fmt17(tr.eps_r);
    out += ',';
    out += fmt17(tr.eps_t_raw);
    out += ',';
    out += fmt17(tr.eps_t_norm);
    out += ',';
    out += tr.success ? '1' : '0';
    out += ',';
    out += tr.converged ? '1' : '0';
    out += ',';
    out += std::to_string(tr.iterations);
    out += ',';
    out += fmt17(tr.xi_estimated);
    out += '\n';
  }
}

std::string campaign_csv(const CampaignReport& report) {
  std::string out = campaign_csv_header();
  append_campaign_csv(report, out);
  return out;
}

std::string campaign_json(const CampaignReport& report) {
  json j;
  j["n_cut"] = report.config.n_cut;
  j["noise_sigma"] = report.config.noise_sigma;
  j["angle_range_deg"] = report.config.angle_range_deg;
  j["trans_range_d"] = report.config.trans_range_d;
  j["seed"] = report.seed;
  j["trials"] = report.trials;
  j["xi_true"] = report.xi_true;

  json summaries = json::array();
  for (const AlgorithmSummary& s : report.summaries) {
    summaries.push_back({{"algorithm", s.algorithm},
                         {"success_rate", s.success_rate},
                         {"mean_eps_r", s.mean_eps_r},
                         {"median_eps_r", s.median_eps_r},
                         {"mean_eps_t_raw", s.mean_eps_t_raw},
                         {"median_eps_t_raw", s.median_eps_t_raw},
                         {"mean_eps_t_norm", s.mean_eps_t_norm},
                         {"mean_runtime_seconds", s.mean_runtime_seconds},
                         {"mean_iterations", s.mean_iterations}});
  }
  j["summaries"] = std::move(summaries);

  json trials = json::array();
  for (const TrialReport& tr : report.trial_reports) {
    trials.push_back({{"trial", tr.trial},
                      {"algorithm", tr.algorithm},
                      {"eps_r", tr.eps_r},
                      {"eps_t_raw", tr.eps_t_raw},
                      {"eps_t_norm", tr.eps_t_norm},
                      {"success", tr.success},
                      {"converged", tr.converged},
                      {"iterations", tr.iterations},
                      {"xi_estimated", tr.xi_estimated},
                      {"runtime_seconds", tr.runtime_seconds}});
  }
  j["trial_reports"] = std::move(trials);
  return j.dump(2) + "\n";
}

}  // namespace hsaicp
