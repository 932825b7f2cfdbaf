#include "grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lsgrad {

namespace {

bool finite(double x) { return std::isfinite(x); }

}  // namespace

Grid::Grid(GridKind kind, int n, double size, std::vector<Cell> cells,
           std::vector<Face> faces, std::vector<BoundaryFace> boundary)
    : kind_(kind),
      n_(n),
      size_(size),
      cells_(std::move(cells)),
      faces_(std::move(faces)),
      boundary_(std::move(boundary)) {
  const int nc = static_cast<int>(cells_.size());
  if (nc == 0) throw std::invalid_argument("grid has no cells");
  if (boundary_.empty()) throw std::invalid_argument("grid has no boundary");

  for (const Cell& c : cells_) {
    if (!(c.area > 0.0) || !finite(c.area)) {
      throw std::invalid_argument("cell area must be positive");
    }
    area_ += c.area;
  }

  // One group per cell owning at least one face as `lo`.
  std::vector<int> group_of_cell(nc, -1);
  for (std::size_t e = 0; e < faces_.size(); ++e) {
    Face& f = faces_[e];
    if (f.lo < 0 || f.lo >= nc || f.hi < 0 || f.hi >= nc || f.lo == f.hi) {
      throw std::invalid_argument("face references invalid cells");
    }
    if (f.axis != 0 && f.axis != 1) {
      throw std::invalid_argument("face axis must be 0 or 1");
    }
    if (!(f.length > 0.0) || !(f.dist > 0.0)) {
      throw std::invalid_argument("face length and distance must be positive");
    }
    int& g = group_of_cell[f.lo];
    if (g < 0) {
      g = static_cast<int>(groups_.size());
      groups_.push_back(FaceGroup{});
      groups_.back().weight = f.length * f.dist;
    }
    FaceGroup& grp = groups_[g];
    if (grp.faces[f.axis] >= 0) {
      throw std::invalid_argument("cell owns two faces along one axis");
    }
    const double w = f.length * f.dist;
    if (std::abs(w - grp.weight) > 1e-12 * std::max(w, grp.weight)) {
      throw std::invalid_argument("faces of one group must share their weight");
    }
    grp.faces[f.axis] = static_cast<int>(e);
    f.group = g;
  }

  for (const BoundaryFace& b : boundary_) {
    if (b.cell < 0 || b.cell >= nc) {
      throw std::invalid_argument("boundary face references invalid cell");
    }
    if (!(b.length > 0.0)) {
      throw std::invalid_argument("boundary face length must be positive");
    }
    const double nn = std::hypot(b.normal.x, b.normal.y);
    if (std::abs(nn - 1.0) > 1e-12) {
      throw std::invalid_argument("boundary normal must be a unit vector");
    }
    perimeter_ += b.length;
  }

  // CSR adjacency.
  face_offsets_.assign(nc + 1, 0);
  for (const Face& f : faces_) {
    ++face_offsets_[f.lo + 1];
    ++face_offsets_[f.hi + 1];
  }
  for (int i = 0; i < nc; ++i) face_offsets_[i + 1] += face_offsets_[i];
  face_index_.resize(face_offsets_.back());
  {
    std::vector<std::size_t> fill(face_offsets_.begin(), face_offsets_.end() - 1);
    for (std::size_t e = 0; e < faces_.size(); ++e) {
      face_index_[fill[faces_[e].lo]++] = static_cast<int>(e);
      face_index_[fill[faces_[e].hi]++] = static_cast<int>(e);
    }
  }
  bdry_offsets_.assign(nc + 1, 0);
  for (const BoundaryFace& b : boundary_) ++bdry_offsets_[b.cell + 1];
  for (int i = 0; i < nc; ++i) bdry_offsets_[i + 1] += bdry_offsets_[i];
  bdry_index_.resize(bdry_offsets_.back());
  {
    std::vector<std::size_t> fill(bdry_offsets_.begin(), bdry_offsets_.end() - 1);
    for (std::size_t k = 0; k < boundary_.size(); ++k) {
      bdry_index_[fill[boundary_[k].cell]++] = static_cast<int>(k);
    }
  }

  for (const Face& f : faces_) hmax_ = std::max(hmax_, f.length);
  for (const BoundaryFace& b : boundary_) hmax_ = std::max(hmax_, b.length);
}

std::span<const int> Grid::cell_faces(std::size_t cell) const {
  return {face_index_.data() + face_offsets_[cell],
          face_offsets_[cell + 1] - face_offsets_[cell]};
}

std::span<const int> Grid::cell_boundary(std::size_t cell) const {
  return {bdry_index_.data() + bdry_offsets_[cell],
          bdry_offsets_[cell + 1] - bdry_offsets_[cell]};
}

namespace {

// Shared builder for masked uniform partitions of [x0, x0 + n*h]^2.
template <typename Inside>
Grid build_masked(GridKind kind, int n, double size, double x0, double h,
                  Inside&& inside) {
  std::vector<int> id(static_cast<std::size_t>(n) * n, -1);
  std::vector<Cell> cells;
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const Vec2 c{x0 + (ix + 0.5) * h, x0 + (iy + 0.5) * h};
      if (!inside(c)) continue;
      id[static_cast<std::size_t>(iy) * n + ix] = static_cast<int>(cells.size());
      cells.push_back(Cell{c, h * h, ix, iy});
    }
  }
  auto at = [&](int ix, int iy) {
    if (ix < 0 || iy < 0 || ix >= n || iy >= n) return -1;
    return id[static_cast<std::size_t>(iy) * n + ix];
  };
  std::vector<Face> faces;
  std::vector<BoundaryFace> boundary;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    const int me = static_cast<int>(i);
    const int east = at(c.ix + 1, c.iy);
    const int north = at(c.ix, c.iy + 1);
    if (east >= 0) faces.push_back(Face{me, east, 0, h, h, 0});
    if (north >= 0) faces.push_back(Face{me, north, 1, h, h, 0});
    const double hh = 0.5 * h;
    if (at(c.ix - 1, c.iy) < 0) {
      boundary.push_back({me, h, {-1.0, 0.0}, {c.center.x - hh, c.center.y}});
    }
    if (east < 0) {
      boundary.push_back({me, h, {1.0, 0.0}, {c.center.x + hh, c.center.y}});
    }
    if (at(c.ix, c.iy - 1) < 0) {
      boundary.push_back({me, h, {0.0, -1.0}, {c.center.x, c.center.y - hh}});
    }
    if (north < 0) {
      boundary.push_back({me, h, {0.0, 1.0}, {c.center.x, c.center.y + hh}});
    }
  }
  return Grid(kind, n, size, std::move(cells), std::move(faces),
              std::move(boundary));
}

}  // namespace

Grid build_square_grid(int n, double side) {
  if (n < 2) throw std::invalid_argument("square grid needs n >= 2");
  if (!(side > 0.0) || !finite(side)) {
    throw std::invalid_argument("square side must be positive");
  }
  return build_masked(GridKind::kSquare, n, side, 0.0, side / n,
                      [](Vec2) { return true; });
}

Grid build_disk_grid(int n, double radius) {
  if (n < 8) throw std::invalid_argument("disk grid needs n >= 8");
  if (!(radius > 0.0) || !finite(radius)) {
    throw std::invalid_argument("disk radius must be positive");
  }
  const double r2 = radius * radius;
  return build_masked(GridKind::kDisk, n, radius, -radius, 2.0 * radius / n,
                      [r2](Vec2 c) { return c.x * c.x + c.y * c.y < r2; });
}

std::string to_string(GridKind kind) {
  switch (kind) {
    case GridKind::kSquare: return "square";
    case GridKind::kDisk: return "disk";
    case GridKind::kCustom: return "custom";
  }
  return "custom";
}

GridKind grid_kind_from_string(const std::string& name) {
  if (name == "square") return GridKind::kSquare;
  if (name == "disk") return GridKind::kDisk;
  if (name == "custom") return GridKind::kCustom;
  throw std::invalid_argument("unknown grid kind '" + name + "'");
}

BulkField make_bulk(const Grid& grid, double value) {
  return BulkField{std::vector<double>(grid.num_cells(), value)};
}

DualField make_dual(const Grid& grid) {
  return DualField{std::vector<double>(grid.num_faces(), 0.0),
                   std::vector<double>(grid.num_boundary(), 0.0)};
}

BoundaryData make_boundary(const Grid& grid, double value) {
  return BoundaryData{std::vector<double>(grid.num_boundary(), value)};
}

void check_shape(const Grid& grid, const BulkField& u) {
  if (u.values.size() != grid.num_cells()) {
    throw std::invalid_argument("bulk field length " +
                                std::to_string(u.values.size()) +
                                " does not match cell count " +
                                std::to_string(grid.num_cells()));
  }
}

void check_shape(const Grid& grid, const DualField& z) {
  if (z.interior.size() != grid.num_faces() ||
      z.boundary.size() != grid.num_boundary()) {
    throw std::invalid_argument("dual field does not match face counts");
  }
}

void check_shape(const Grid& grid, const BoundaryData& b) {
  if (b.values.size() != grid.num_boundary()) {
    throw std::invalid_argument("boundary data length " +
                                std::to_string(b.values.size()) +
                                " does not match boundary face count " +
                                std::to_string(grid.num_boundary()));
  }
}

DualField gradient(const Grid& grid, const BulkField& u) {
  check_shape(grid, u);
  DualField z = make_dual(grid);
  const auto& faces = grid.faces();
  for (std::size_t e = 0; e < faces.size(); ++e) {
    z.interior[e] = (u.values[faces[e].hi] - u.values[faces[e].lo]) / faces[e].dist;
  }
  return z;
}

BulkField divergence(const Grid& grid, const DualField& z) {
  check_shape(grid, z);
  BulkField d = make_bulk(grid);
  const auto& faces = grid.faces();
  for (std::size_t e = 0; e < faces.size(); ++e) {
    const double flux = faces[e].length * z.interior[e];
    d.values[faces[e].lo] += flux;
    d.values[faces[e].hi] -= flux;
  }
  const auto& bdry = grid.boundary();
  for (std::size_t k = 0; k < bdry.size(); ++k) {
    d.values[bdry[k].cell] += bdry[k].length * z.boundary[k];
  }
  for (std::size_t i = 0; i < grid.num_cells(); ++i) {
    d.values[i] /= grid.cells()[i].area;
  }
  return d;
}

BoundaryData trace(const Grid& grid, const BulkField& u) {
  check_shape(grid, u);
  BoundaryData t = make_boundary(grid);
  for (std::size_t k = 0; k < grid.num_boundary(); ++k) {
    t.values[k] = u.values[grid.boundary()[k].cell];
  }
  return t;
}

BoundaryData conormal(const Grid& grid, const DualField& z) {
  check_shape(grid, z);
  return BoundaryData{z.boundary};
}

double inner_cells(const Grid& grid, const BulkField& a, const BulkField& b) {
  check_shape(grid, a);
  check_shape(grid, b);
  double s = 0.0;
  for (std::size_t i = 0; i < grid.num_cells(); ++i) {
    s += grid.cells()[i].area * a.values[i] * b.values[i];
  }
  return s;
}

double inner_faces(const Grid& grid, const DualField& p, const DualField& q) {
  check_shape(grid, p);
  check_shape(grid, q);
  double s = 0.0;
  for (std::size_t e = 0; e < grid.num_faces(); ++e) {
    const Face& f = grid.faces()[e];
    s += f.length * f.dist * p.interior[e] * q.interior[e];
  }
  return s;
}

double inner_boundary(const Grid& grid, const BoundaryData& a,
                      const BoundaryData& b) {
  check_shape(grid, a);
  check_shape(grid, b);
  double s = 0.0;
  for (std::size_t k = 0; k < grid.num_boundary(); ++k) {
    s += grid.boundary()[k].length * a.values[k] * b.values[k];
  }
  return s;
}

double tv(const Grid& grid, const BulkField& u) {
  check_shape(grid, u);
  const auto& faces = grid.faces();
  double s = 0.0;
  for (const FaceGroup& g : grid.groups()) {
    double sq = 0.0;
    for (int e : g.faces) {
      if (e < 0) continue;
      const double d = (u.values[faces[e].hi] - u.values[faces[e].lo]) / faces[e].dist;
      sq += d * d;
    }
    s += g.weight * std::sqrt(sq);
  }
  return s;
}

double tv_anisotropic(const Grid& grid, const BulkField& u) {
  check_shape(grid, u);
  double s = 0.0;
  for (const Face& f : grid.faces()) {
    s += f.length * std::abs(u.values[f.hi] - u.values[f.lo]);
  }
  return s;
}

double boundary_integral(const Grid& grid, const BoundaryData& b) {
  check_shape(grid, b);
  double s = 0.0;
  for (std::size_t k = 0; k < grid.num_boundary(); ++k) {
    s += grid.boundary()[k].length * b.values[k];
  }
  return s;
}

double boundary_mean(const Grid& grid, const BoundaryData& b) {
  return boundary_integral(grid, b) / grid.perimeter();
}

double boundary_norm(const Grid& grid, const BoundaryData& b, double q) {
  check_shape(grid, b);
  if (std::isinf(q)) return sup_norm(b.values);
  double s = 0.0;
  for (std::size_t k = 0; k < grid.num_boundary(); ++k) {
    s += grid.boundary()[k].length * std::pow(std::abs(b.values[k]), q);
  }
  return std::pow(s, 1.0 / q);
}

double sup_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double dual_sup_norm(const Grid& grid, const DualField& z) {
  check_shape(grid, z);
  double m = sup_norm(z.boundary);
  for (const FaceGroup& g : grid.groups()) {
    double sq = 0.0;
    for (int e : g.faces) {
      if (e >= 0) sq += z.interior[e] * z.interior[e];
    }
    m = std::max(m, std::sqrt(sq));
  }
  return m;
}

}  // namespace lsgrad
