#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

namespace stvf {

using Index = std::int32_t;

struct Edge {
  Index a = -1;            // endpoint vertices, a < b
  Index b = -1;
  Index left = -1;         // adjacent triangles; right = -1 on the boundary
  Index right = -1;
  bool boundary = false;
};

/// Criss-cross triangulation of the unit square: 2^level x 2^level congruent
/// squares, each cut into four right triangles by its diagonals.
///
/// The layout is a pure function of `level` and is part of the contract:
///   - vertices: grid nodes in row-major order (x fastest), then the square
///     centers in the same order;
///   - triangles: per square, in the order south, east, north, west, with
///     counterclockwise vertex ordering (corner, corner, center);
///   - edges: discovered by scanning triangles in order, local edge k
///     opposite local vertex k.
class Mesh {
 public:
  static std::shared_ptr<const Mesh> build_crisscross(int level);

  int level() const { return level_; }
  double h() const { return h_; }

  Index vertex_count() const { return static_cast<Index>(vertices_.cols()); }
  Index triangle_count() const { return static_cast<Index>(triangles_.cols()); }
  Index edge_count() const { return static_cast<Index>(edges_.size()); }

  const Eigen::Matrix2Xd& vertices() const { return vertices_; }
  const Eigen::Matrix<Index, 3, Eigen::Dynamic>& triangles() const {
    return triangles_;
  }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Edge index opposite each local vertex of a triangle.
  const Eigen::Matrix<Index, 3, Eigen::Dynamic>& triangle_edges() const {
    return triangle_edges_;
  }

  double triangle_area(Index) const { return area_; }  // h^2/4, uniform
  Eigen::Vector2d vertex(Index v) const { return vertices_.col(v); }
  Eigen::Vector2d edge_barycenter(Index e) const;
  bool vertex_on_boundary(Index v) const { return vertex_boundary_[v] != 0; }

  /// Triangle containing x; x is clamped to the closed unit square. Points on
  /// interior interfaces resolve deterministically in south, east, north,
  /// west order.
  Index locate(const Eigen::Vector2d& x) const;

  /// Plain-text OFF dump (vertex list, then triangle list) for debugging.
  void write_off(std::ostream& os) const;

 private:
  Mesh() = default;

  int level_ = 0;
  double h_ = 0.0;
  double area_ = 0.0;
  Eigen::Matrix2Xd vertices_;
  Eigen::Matrix<Index, 3, Eigen::Dynamic> triangles_;
  Eigen::Matrix<Index, 3, Eigen::Dynamic> triangle_edges_;
  std::vector<Edge> edges_;
  std::vector<std::uint8_t> vertex_boundary_;
};

}  // namespace stvf
