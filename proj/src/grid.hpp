#pragma once

// Cell-centered finite-volume discretization of planar domains.
//
// Values of a BulkField live at cell centers. A DualField stores the normal
// component of a vector field on every face: interior faces carry the flux
// from their `lo` cell to their `hi` cell, boundary faces carry the outward
// flux. Interior faces are grouped per cell (its +x and +y faces) so that the
// isotropic total variation and the pointwise bound |z| <= 1 are measured on
// the 2-vector of a group.
//
// With the inner products
//   <u, v>_cells = sum_i area_i u_i v_i
//   <p, q>_faces = sum_e len_e dist_e p_e q_e
//   <a, b>_bdry  = sum_b s_b a_b b_b
// the operators below satisfy, for every u and z,
//   <u, div z>_cells + <grad u, z>_faces = <trace u, conormal z>_bdry
// exactly up to floating point rounding.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lsgrad {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Cell {
  Vec2 center;
  double area = 0.0;
  int ix = 0;
  int iy = 0;
};

struct Face {
  int lo = 0;       // flux is positive from lo to hi
  int hi = 0;
  int axis = 0;     // 0: normal along +x, 1: normal along +y
  double length = 0.0;
  double dist = 0.0;
  int group = 0;    // index into Grid::groups()
};

struct BoundaryFace {
  int cell = 0;
  double length = 0.0;  // arc-length weight s_b
  Vec2 normal;          // outward unit normal
  Vec2 midpoint;
};

// Faces whose gradient components form one isotropic 2-vector.
struct FaceGroup {
  std::array<int, 2> faces{-1, -1};
  double weight = 0.0;  // len * dist of its faces (dual cell area)
  int size() const { return (faces[0] >= 0) + (faces[1] >= 0); }
};

enum class GridKind { kSquare, kDisk, kCustom };

class Grid {
 public:
  // Validates the layout and derives groups/adjacency. Faces must be listed
  // with their group indices unset; groups are derived from `lo` and axis.
  Grid(GridKind kind, int n, double size, std::vector<Cell> cells,
       std::vector<Face> faces, std::vector<BoundaryFace> boundary);

  GridKind kind() const { return kind_; }
  int resolution() const { return n_; }
  double size() const { return size_; }

  std::size_t num_cells() const { return cells_.size(); }
  std::size_t num_faces() const { return faces_.size(); }
  std::size_t num_boundary() const { return boundary_.size(); }

  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<BoundaryFace>& boundary() const { return boundary_; }
  const std::vector<FaceGroup>& groups() const { return groups_; }

  // Faces and boundary faces incident to a cell.
  std::span<const int> cell_faces(std::size_t cell) const;
  std::span<const int> cell_boundary(std::size_t cell) const;

  double area() const { return area_; }
  double perimeter() const { return perimeter_; }
  double max_cell_width() const { return hmax_; }

 private:
  GridKind kind_;
  int n_;
  double size_;
  std::vector<Cell> cells_;
  std::vector<Face> faces_;
  std::vector<BoundaryFace> boundary_;
  std::vector<FaceGroup> groups_;
  std::vector<std::size_t> face_offsets_;
  std::vector<int> face_index_;
  std::vector<std::size_t> bdry_offsets_;
  std::vector<int> bdry_index_;
  double area_ = 0.0;
  double perimeter_ = 0.0;
  double hmax_ = 0.0;
};

// Uniform n x n cells over (0, side)^2.
Grid build_square_grid(int n, double side);

// Staircase disk centered at the origin: cells of the n x n partition of
// [-radius, radius]^2 whose centers lie strictly inside the circle.
Grid build_disk_grid(int n, double radius);

std::string to_string(GridKind kind);
GridKind grid_kind_from_string(const std::string& name);

struct BulkField {
  std::vector<double> values;
};

struct DualField {
  std::vector<double> interior;  // per Face
  std::vector<double> boundary;  // per BoundaryFace, outward
};

struct BoundaryData {
  std::vector<double> values;
};

BulkField make_bulk(const Grid& grid, double value = 0.0);
DualField make_dual(const Grid& grid);
BoundaryData make_boundary(const Grid& grid, double value = 0.0);

// Shape checks; throw std::invalid_argument.
void check_shape(const Grid& grid, const BulkField& u);
void check_shape(const Grid& grid, const DualField& z);
void check_shape(const Grid& grid, const BoundaryData& b);

// Samples the normal components of a vector field at face midpoints.
template <typename F>
DualField sample_dual(const Grid& grid, F&& field);

DualField gradient(const Grid& grid, const BulkField& u);  // boundary part zero
BulkField divergence(const Grid& grid, const DualField& z);
BoundaryData trace(const Grid& grid, const BulkField& u);
BoundaryData conormal(const Grid& grid, const DualField& z);

double inner_cells(const Grid& grid, const BulkField& a, const BulkField& b);
double inner_faces(const Grid& grid, const DualField& p, const DualField& q);
double inner_boundary(const Grid& grid, const BoundaryData& a,
                      const BoundaryData& b);

// Isotropic discrete total variation: sum over groups of
// weight * |(grad u)_group|.
double tv(const Grid& grid, const BulkField& u);
// Anisotropic variant with the l1 norm inside each group.
double tv_anisotropic(const Grid& grid, const BulkField& u);

double boundary_integral(const Grid& grid, const BoundaryData& b);
double boundary_mean(const Grid& grid, const BoundaryData& b);
double boundary_norm(const Grid& grid, const BoundaryData& b, double q);
double sup_norm(const std::vector<double>& v);

// Largest Euclidean norm over groups and largest |z| over boundary faces.
double dual_sup_norm(const Grid& grid, const DualField& z);

// Boundary data sampled from a function of the boundary face midpoint.
template <typename F>
BoundaryData sample_boundary(const Grid& grid, F&& fn) {
  BoundaryData b = make_boundary(grid);
  for (std::size_t k = 0; k < grid.num_boundary(); ++k) {
    b.values[k] = fn(grid.boundary()[k].midpoint);
  }
  return b;
}

template <typename F>
BulkField sample_bulk(const Grid& grid, F&& fn) {
  BulkField u = make_bulk(grid);
  for (std::size_t i = 0; i < grid.num_cells(); ++i) {
    u.values[i] = fn(grid.cells()[i].center);
  }
  return u;
}

template <typename F>
DualField sample_dual(const Grid& grid, F&& field) {
  DualField z = make_dual(grid);
  for (std::size_t e = 0; e < grid.num_faces(); ++e) {
    const Face& f = grid.faces()[e];
    const Vec2 a = grid.cells()[f.lo].center;
    const Vec2 b = grid.cells()[f.hi].center;
    const Vec2 v = field(Vec2{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
    z.interior[e] = f.axis == 0 ? v.x : v.y;
  }
  for (std::size_t k = 0; k < grid.num_boundary(); ++k) {
    const BoundaryFace& bf = grid.boundary()[k];
    const Vec2 v = field(bf.midpoint);
    z.boundary[k] = v.x * bf.normal.x + v.y * bf.normal.y;
  }
  return z;
}

}  // namespace lsgrad
