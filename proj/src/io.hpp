#pragma once

// Field persistence and the grid JSON layout.
//
// CSV: header line "index,value", then one "i,v" row per entry, values
// printed with 17 significant digits so that reading back is value-exact.
//
// Binary column: 16-byte header followed by `count` little-endian IEEE-754
// doubles.
//   bytes 0..3   magic "LGD1"
//   bytes 4..7   version (u32, currently 1)
//   bytes 8..15  count (u64)
//
// Grid JSON:
//   { "format": "lsgrad-grid", "version": 1, "kind": "square"|"disk"|"custom",
//     "n": int, "size": real,
//     "nodes":    [ {"x","y","area","ix","iy"} ... ],
//     "edges":    [ {"lo","hi","axis","length","dist"} ... ],
//     "boundary": [ {"cell","length","nx","ny","mx","my"} ... ],
//     "area": real, "perimeter": real }

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "grid.hpp"

namespace lsgrad::io {

// Raised when a file cannot be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr char kBinaryMagic[4] = {'L', 'G', 'D', '1'};
inline constexpr std::uint32_t kBinaryVersion = 1;

void write_csv(const std::filesystem::path& path, const std::vector<double>& values);
std::vector<double> read_csv(const std::filesystem::path& path);

void write_binary(const std::filesystem::path& path, const std::vector<double>& values);
std::vector<double> read_binary(const std::filesystem::path& path);

// Dispatches on the extension: ".bin" / ".lgd" binary, anything else CSV.
std::vector<double> read_field(const std::filesystem::path& path);
void write_field(const std::filesystem::path& path, const std::vector<double>& values);

nlohmann::json grid_to_json(const Grid& grid);
Grid grid_from_json(const nlohmann::json& j);
void save_grid(const std::filesystem::path& path, const Grid& grid);
Grid load_grid(const std::filesystem::path& path);

// Accepts a grid JSON path or a spec string "square:N[:side]" /
// "disk:N[:radius]".
Grid resolve_grid(const std::string& spec);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

// Multi-column CSV with a header row.
void write_table(const std::filesystem::path& path,
                 const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& columns);

std::string format_double(double v);

}  // namespace lsgrad::io
