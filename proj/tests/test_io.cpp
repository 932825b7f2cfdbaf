#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "io.hpp"

using namespace lsgrad;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lsgrad_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<double> awkward_values() {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> U(-1e3, 1e3);
  std::vector<double> v{0.0, -0.0, 1.0 / 3.0, 1e-310, std::numeric_limits<double>::max(),
                        -std::numeric_limits<double>::min(), 0.1};
  for (int i = 0; i < 200; ++i) v.push_back(U(rng) * std::pow(10.0, i % 17 - 8));
  return v;
}

}  // namespace

TEST(Io, CsvRoundTripIsValueExact) {
  const fs::path d = scratch_dir("csv");
  const auto v = awkward_values();
  io::write_csv(d / "f.csv", v);
  const auto back = io::read_csv(d / "f.csv");
  ASSERT_EQ(back.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(back[i], v[i]) << i;
}

TEST(Io, BinaryRoundTripIsBitExact) {
  const fs::path d = scratch_dir("bin");
  auto v = awkward_values();
  v.push_back(std::numeric_limits<double>::quiet_NaN());
  io::write_binary(d / "f.bin", v);
  const auto back = io::read_binary(d / "f.bin");
  ASSERT_EQ(back.size(), v.size());
  EXPECT_EQ(std::memcmp(back.data(), v.data(), v.size() * sizeof(double)), 0);
  EXPECT_EQ(fs::file_size(d / "f.bin"), 16 + v.size() * 8);
}

TEST(Io, FieldDispatchesOnExtension) {
  const fs::path d = scratch_dir("dispatch");
  const std::vector<double> v{1.5, -2.25};
  io::write_field(d / "a.lgd", v);
  io::write_field(d / "a.csv", v);
  EXPECT_EQ(io::read_field(d / "a.lgd"), v);
  EXPECT_EQ(io::read_field(d / "a.csv"), v);
  std::ifstream in(d / "a.lgd", std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  EXPECT_EQ(std::string(magic, 4), "LGD1");
}

TEST(Io, MalformedInputsAreRejected) {
  const fs::path d = scratch_dir("bad");
  {
    std::ofstream(d / "gap.csv") << "index,value\n0,1\n2,3\n";
    std::ofstream(d / "word.csv") << "index,value\n0,abc\n";
    std::ofstream(d / "short.bin") << "LGD1";
    std::ofstream(d / "magic.bin") << "XXXX0000000000000000";
  }
  EXPECT_THROW(io::read_csv(d / "gap.csv"), std::invalid_argument);
  EXPECT_THROW(io::read_csv(d / "word.csv"), std::invalid_argument);
  EXPECT_THROW(io::read_binary(d / "short.bin"), std::invalid_argument);
  EXPECT_THROW(io::read_binary(d / "magic.bin"), std::invalid_argument);
  EXPECT_THROW(io::read_csv(d / "missing.csv"), io::IoError);
}

TEST(Io, PlainValueListsAreAccepted) {
  const fs::path d = scratch_dir("plain");
  std::ofstream(d / "p.csv") << "value\n1\n2.5\n-3\n";
  EXPECT_EQ(io::read_csv(d / "p.csv"), (std::vector<double>{1, 2.5, -3}));
}

TEST(Io, GridJsonRoundTrip) {
  const fs::path d = scratch_dir("grid");
  const Grid g = build_disk_grid(12, 1.5);
  io::save_grid(d / "g.json", g);
  const Grid back = io::load_grid(d / "g.json");
  EXPECT_EQ(back.num_cells(), g.num_cells());
  EXPECT_EQ(back.num_faces(), g.num_faces());
  EXPECT_EQ(back.num_boundary(), g.num_boundary());
  EXPECT_EQ(back.kind(), GridKind::kDisk);
  EXPECT_DOUBLE_EQ(back.perimeter(), g.perimeter());
  EXPECT_DOUBLE_EQ(back.area(), g.area());
  for (std::size_t i = 0; i < g.num_faces(); ++i) {
    EXPECT_EQ(back.faces()[i].lo, g.faces()[i].lo);
    EXPECT_EQ(back.faces()[i].group, g.faces()[i].group);
  }
  EXPECT_EQ(io::resolve_grid((d / "g.json").string()).num_cells(), g.num_cells());
}

TEST(Io, ResolveGridSpecs) {
  EXPECT_EQ(io::resolve_grid("square:5").num_cells(), 25u);
  EXPECT_DOUBLE_EQ(io::resolve_grid("square:4:3").area(), 9.0);
  EXPECT_EQ(io::resolve_grid("disk:16").kind(), GridKind::kDisk);
  EXPECT_THROW(io::resolve_grid("hexagon:4"), std::invalid_argument);
  EXPECT_THROW(io::resolve_grid("square:x"), std::invalid_argument);
  EXPECT_THROW(io::resolve_grid("square"), std::invalid_argument);
}

TEST(Io, TablesCheckShapes) {
  const fs::path d = scratch_dir("table");
  io::write_table(d / "t.csv", {"a", "b"}, {{1, 2}, {3, 4}});
  std::ifstream in(d / "t.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "a,b");
  EXPECT_THROW(io::write_table(d / "u.csv", {"a"}, {{1}, {2}}), std::invalid_argument);
  EXPECT_THROW(io::write_table(d / "u.csv", {"a", "b"}, {{1}, {2, 3}}), std::invalid_argument);
}
