#include "stvf/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

namespace stvf {

std::shared_ptr<const Mesh> Mesh::build_crisscross(int level) {
  if (level < 1) {
    throw std::invalid_argument("mesh level must be >= 1");
  }
  // With 32-bit indices the edge count 6*4^level + 2^(level+1) must stay
  // below 2^31; level 14 is the last safe refinement.
  if (level > 14) {
    throw std::invalid_argument("mesh level too large for 32-bit indexing");
  }

  auto mesh = std::shared_ptr<Mesh>(new Mesh());
  mesh->level_ = level;
  const Index n = Index(1) << level;
  const double h = 1.0 / static_cast<double>(n);
  mesh->h_ = h;
  mesh->area_ = 0.25 * h * h;

  const Index n_grid = (n + 1) * (n + 1);
  const Index n_centers = n * n;
  mesh->vertices_.resize(2, n_grid + n_centers);
  for (Index j = 0; j <= n; ++j) {
    for (Index i = 0; i <= n; ++i) {
      mesh->vertices_.col(j * (n + 1) + i) << i * h, j * h;
    }
  }
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      mesh->vertices_.col(n_grid + j * n + i) << (i + 0.5) * h, (j + 0.5) * h;
    }
  }

  mesh->vertex_boundary_.assign(n_grid + n_centers, 0);
  for (Index j = 0; j <= n; ++j) {
    for (Index i = 0; i <= n; ++i) {
      if (i == 0 || i == n || j == 0 || j == n) {
        mesh->vertex_boundary_[j * (n + 1) + i] = 1;
      }
    }
  }

  mesh->triangles_.resize(3, 4 * n_centers);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      const Index sw = j * (n + 1) + i;
      const Index se = sw + 1;
      const Index nw = sw + (n + 1);
      const Index ne = nw + 1;
      const Index c = n_grid + j * n + i;
      const Index t = 4 * (j * n + i);
      mesh->triangles_.col(t + 0) << sw, se, c;  // south
      mesh->triangles_.col(t + 1) << se, ne, c;  // east
      mesh->triangles_.col(t + 2) << ne, nw, c;  // north
      mesh->triangles_.col(t + 3) << nw, sw, c;  // west
    }
  }

  // Edge discovery in triangle scan order keeps edge indices deterministic.
  const Index n_tri = mesh->triangle_count();
  mesh->triangle_edges_.resize(3, n_tri);
  std::unordered_map<std::uint64_t, Index> edge_of;
  edge_of.reserve(static_cast<std::size_t>(3) * n_tri / 2);
  for (Index t = 0; t < n_tri; ++t) {
    for (int k = 0; k < 3; ++k) {
      Index va = mesh->triangles_((k + 1) % 3, t);
      Index vb = mesh->triangles_((k + 2) % 3, t);
      if (va > vb) std::swap(va, vb);
      const std::uint64_t key =
          (static_cast<std::uint64_t>(va) << 32) | static_cast<std::uint32_t>(vb);
      auto it = edge_of.find(key);
      Index e;
      if (it == edge_of.end()) {
        e = static_cast<Index>(mesh->edges_.size());
        edge_of.emplace(key, e);
        Edge edge;
        edge.a = va;
        edge.b = vb;
        edge.left = t;
        mesh->edges_.push_back(edge);
      } else {
        e = it->second;
        mesh->edges_[e].right = t;
      }
      mesh->triangle_edges_(k, t) = e;
    }
  }
  for (Edge& e : mesh->edges_) {
    e.boundary = (e.right < 0);
  }
  return mesh;
}

Eigen::Vector2d Mesh::edge_barycenter(Index e) const {
  const Edge& edge = edges_[static_cast<std::size_t>(e)];
  return 0.5 * (vertices_.col(edge.a) + vertices_.col(edge.b));
}

Index Mesh::locate(const Eigen::Vector2d& x) const {
  const Index n = Index(1) << level_;
  const double px = std::clamp(x.x(), 0.0, 1.0);
  const double py = std::clamp(x.y(), 0.0, 1.0);
  const Index i = std::min(static_cast<Index>(px / h_), n - 1);
  const Index j = std::min(static_cast<Index>(py / h_), n - 1);
  const double dx = px - (i + 0.5) * h_;
  const double dy = py - (j + 0.5) * h_;
  const Index s = 4 * (j * n + i);
  if (dy <= -std::abs(dx)) return s;      // south
  if (dx >= std::abs(dy)) return s + 1;   // east
  if (dy >= std::abs(dx)) return s + 2;   // north
  return s + 3;                           // west
}

void Mesh::write_off(std::ostream& os) const {
  os << "OFF\n" << vertex_count() << ' ' << triangle_count() << ' ' << edge_count() << '\n';
  for (Index v = 0; v < vertex_count(); ++v) {
    os << vertices_(0, v) << ' ' << vertices_(1, v) << " 0\n";
  }
  for (Index t = 0; t < triangle_count(); ++t) {
    os << "3 " << triangles_(0, t) << ' ' << triangles_(1, t) << ' ' << triangles_(2, t) << '\n';
  }
}

}  // namespace stvf
