#include "io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lsgrad::io {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little,
              "binary column format assumes a little-endian host");

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = {}) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::out | std::ios::trunc | mode);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

double parse_double(std::string_view s, const fs::path& path, std::size_t line) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  // strtod handles inf/nan spellings that from_chars may reject.
  std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size()) {
    throw std::invalid_argument(path.string() + ":" + std::to_string(line) +
                                ": cannot parse value '" + tmp + "'");
  }
  return v;
}

}  // namespace

void write_csv(const fs::path& path, const std::vector<double>& values) {
  std::ofstream out = open_out(path);
  out << "index,value\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << i << ',' << format_double(values[i]) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<double> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      // Single-column files are accepted as plain value lists.
      if (lineno == 1 && line.find_first_of("0123456789") == std::string::npos) continue;
      values.push_back(parse_double(line, path, lineno));
      continue;
    }
    const std::string_view idx(line.data(), comma);
    if (lineno == 1 && idx.find_first_of("0123456789") == std::string_view::npos) continue;
    std::size_t index = 0;
    const auto [p, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), index);
    if (ec != std::errc() || index != values.size()) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) +
                                  ": expected index " + std::to_string(values.size()));
    }
    values.push_back(parse_double(std::string_view(line).substr(comma + 1), path, lineno));
  }
  return values;
}

void write_binary(const fs::path& path, const std::vector<double>& values) {
  std::ofstream out = open_out(path, std::ios::binary);
  const std::uint32_t version = kBinaryVersion;
  const std::uint64_t count = values.size();
  out.write(kBinaryMagic, 4);
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<double> read_binary(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t count = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  if (!in || std::memcmp(magic, kBinaryMagic, 4) != 0) {
    throw std::invalid_argument(path.string() + ": not an LGD1 column file");
  }
  if (version != kBinaryVersion) {
    throw std::invalid_argument(path.string() + ": unsupported version " +
                                std::to_string(version));
  }
  const auto bytes = fs::file_size(path);
  if (bytes != 16 + count * sizeof(double)) {
    throw std::invalid_argument(path.string() + ": size does not match header count");
  }
  std::vector<double> values(count);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw std::invalid_argument(path.string() + ": truncated payload");
  return values;
}

std::vector<double> read_field(const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".bin" || ext == ".lgd") return read_binary(path);
  return read_csv(path);
}

void write_field(const fs::path& path, const std::vector<double>& values) {
  const auto ext = path.extension().string();
  if (ext == ".bin" || ext == ".lgd") {
    write_binary(path, values);
  } else {
    write_csv(path, values);
  }
}

nlohmann::json grid_to_json(const Grid& grid) {
  using nlohmann::json;
  json j;
  j["format"] = "lsgrad-grid";
  j["version"] = 1;
  j["kind"] = to_string(grid.kind());
  j["n"] = grid.resolution();
  j["size"] = grid.size();
  json nodes = json::array();
  for (const Cell& c : grid.cells()) {
    nodes.push_back({{"x", c.center.x}, {"y", c.center.y}, {"area", c.area},
                     {"ix", c.ix}, {"iy", c.iy}});
  }
  json edges = json::array();
  for (const Face& f : grid.faces()) {
    edges.push_back({{"lo", f.lo}, {"hi", f.hi}, {"axis", f.axis},
                     {"length", f.length}, {"dist", f.dist}});
  }
  json bdry = json::array();
  for (const BoundaryFace& b : grid.boundary()) {
    bdry.push_back({{"cell", b.cell}, {"length", b.length},
                    {"nx", b.normal.x}, {"ny", b.normal.y},
                    {"mx", b.midpoint.x}, {"my", b.midpoint.y}});
  }
  j["nodes"] = std::move(nodes);
  j["edges"] = std::move(edges);
  j["boundary"] = std::move(bdry);
  j["area"] = grid.area();
  j["perimeter"] = grid.perimeter();
  return j;
}

Grid grid_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "lsgrad-grid") {
      throw std::invalid_argument("not an lsgrad grid document");
    }
    std::vector<Cell> cells;
    for (const auto& c : j.at("nodes")) {
      cells.push_back(Cell{{c.at("x").get<double>(), c.at("y").get<double>()},
                           c.at("area").get<double>(), c.value("ix", 0), c.value("iy", 0)});
    }
    std::vector<Face> faces;
    for (const auto& f : j.at("edges")) {
      faces.push_back(Face{f.at("lo").get<int>(), f.at("hi").get<int>(),
                           f.at("axis").get<int>(), f.at("length").get<double>(),
                           f.at("dist").get<double>(), 0});
    }
    std::vector<BoundaryFace> bdry;
    for (const auto& b : j.at("boundary")) {
      bdry.push_back(BoundaryFace{b.at("cell").get<int>(), b.at("length").get<double>(),
                                  {b.at("nx").get<double>(), b.at("ny").get<double>()},
                                  {b.at("mx").get<double>(), b.at("my").get<double>()}});
    }
    return Grid(grid_kind_from_string(j.value("kind", "custom")), j.value("n", 0),
                j.value("size", 0.0), std::move(cells), std::move(faces), std::move(bdry));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed grid JSON: ") + e.what());
  }
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void save_grid(const fs::path& path, const Grid& grid) {
  write_json(path, grid_to_json(grid));
}

Grid load_grid(const fs::path& path) { return grid_from_json(read_json(path)); }

Grid resolve_grid(const std::string& spec) {
  if (fs::exists(spec)) return load_grid(spec);
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() < 2 || parts.size() > 3) {
    throw std::invalid_argument("grid '" + spec +
                                "' is neither a file nor kind:N[:size]");
  }
  int n = 0;
  double size = 1.0;
  try {
    n = std::stoi(parts[1]);
    if (parts.size() == 3) size = std::stod(parts[2]);
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse grid spec '" + spec + "'");
  }
  if (parts[0] == "square") return build_square_grid(n, size);
  if (parts[0] == "disk") return build_disk_grid(n, size);
  throw std::invalid_argument("unknown grid kind '" + parts[0] + "'");
}

void write_table(const fs::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) {
    throw std::invalid_argument("table header and column count differ");
  }
  std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != rows) throw std::invalid_argument("table columns differ in length");
  }
  std::ofstream out = open_out(path);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out << (c ? "," : "") << format_double(columns[c][r]);
    }
    out << '\n';
  }
}

}  // namespace lsgrad::io
