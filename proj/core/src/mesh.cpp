#include "ddinv/mesh.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace ddinv {

namespace {

// Grid index of coordinate `value` on a line of `cells` cells over [0, length];
// throws when the coordinate is not a grid line.
int grid_line(double value, double length, int cells, const char* axis) {
  const double scaled = value / length * cells;
  const double rounded = std::round(scaled);
  if (std::abs(scaled - rounded) > 1e-9 || rounded < 0 || rounded > cells) {
    throw std::invalid_argument(std::string("subdomain edge ") + axis + "=" +
                                std::to_string(value) + " is not a grid line of a mesh with " +
                                std::to_string(cells) + " cells");
  }
  return static_cast<int>(rounded);
}

}  // namespace

TriMesh build_mesh(int nx, int ny, double width, double height) {
  if (nx < 1 || ny < 1) {
    throw std::invalid_argument("build_mesh: nx and ny must be positive");
  }
  if (!(width > 0.0) || !(height > 0.0)) {
    throw std::invalid_argument("build_mesh: extents must be positive");
  }
  TriMesh mesh;
  mesh.nx_ = nx;
  mesh.ny_ = ny;
  mesh.width_ = width;
  mesh.height_ = height;

  const int count = (nx + 1) * (ny + 1);
  mesh.nodes_.reserve(count);
  mesh.boundary_.reserve(count);
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      mesh.nodes_.push_back({width * i / nx, height * j / ny});
      std::uint8_t flags = kInterior;
      if (i == 0) flags |= kLeft;
      if (i == nx) flags |= kRight;
      if (j == 0) flags |= kBottom;
      if (j == ny) flags |= kTop;
      mesh.boundary_.push_back(flags);
    }
  }

  mesh.elements_.reserve(2 * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const NodeId n00 = mesh.node_id(i, j);
      const NodeId n10 = mesh.node_id(i + 1, j);
      const NodeId n01 = mesh.node_id(i, j + 1);
      const NodeId n11 = mesh.node_id(i + 1, j + 1);
      mesh.elements_.push_back({n00, n10, n11});
      mesh.elements_.push_back({n00, n11, n01});
    }
  }
  return mesh;
}

std::vector<std::array<NodeId, 2>> TriMesh::boundary_edges(std::uint8_t sides) const {
  std::vector<std::array<NodeId, 2>> edges;
  if (sides & kLeft) {
    for (int j = 0; j < ny_; ++j) edges.push_back({node_id(0, j), node_id(0, j + 1)});
  }
  if (sides & kRight) {
    for (int j = 0; j < ny_; ++j) edges.push_back({node_id(nx_, j), node_id(nx_, j + 1)});
  }
  if (sides & kBottom) {
    for (int i = 0; i < nx_; ++i) edges.push_back({node_id(i, 0), node_id(i + 1, 0)});
  }
  if (sides & kTop) {
    for (int i = 0; i < nx_; ++i) edges.push_back({node_id(i, ny_), node_id(i + 1, ny_)});
  }
  return edges;
}

std::vector<NodeId> TriMesh::boundary_nodes(std::uint8_t sides) const {
  std::vector<char> touched(nodes_.size(), 0);
  for (const auto& e : boundary_edges(sides)) {
    touched[e[0]] = 1;
    touched[e[1]] = 1;
  }
  std::vector<NodeId> out;
  for (NodeId n = 0; n < node_count(); ++n) {
    if (touched[n]) out.push_back(n);
  }
  return out;
}

double TriMesh::signed_area(int element) const {
  const auto& t = elements_[element];
  const Point& a = nodes_[t[0]];
  const Point& b = nodes_[t[1]];
  const Point& c = nodes_[t[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

std::vector<Box> standard_boxes() {
  return {
      {0.0, 4.0 / 7.0, 6.0 / 7.0, 2.0},
      {3.0 / 7.0, 1.0, 6.0 / 7.0, 2.0},
      {0.0, 4.0 / 7.0, 0.0, 8.0 / 7.0},
      {3.0 / 7.0, 1.0, 0.0, 8.0 / 7.0},
  };
}

SubdomainDecomposition build_subdomains(const TriMesh& mesh, const std::vector<Box>& boxes,
                                        OuterBoundary outer) {
  if (boxes.empty()) {
    throw std::invalid_argument("build_subdomains: no subdomains given");
  }
  const int count = mesh.node_count();
  SubdomainDecomposition d;
  d.boxes = boxes;
  d.outer = outer;
  const bool natural = outer == OuterBoundary::kNatural;
  d.closure.assign(boxes.size(), std::vector<char>(count, 0));
  d.open.assign(boxes.size(), std::vector<char>(count, 0));
  d.interfaces.resize(boxes.size());
  d.multiplicity.assign(count, 0);
  d.chi.assign(boxes.size(), std::vector<double>(count, 0.0));

  for (std::size_t s = 0; s < boxes.size(); ++s) {
    const Box& b = boxes[s];
    if (!(b.x0 < b.x1) || !(b.y0 < b.y1)) {
      throw std::invalid_argument("build_subdomains: degenerate box");
    }
    const int i0 = grid_line(b.x0, mesh.width(), mesh.nx(), "x");
    const int i1 = grid_line(b.x1, mesh.width(), mesh.nx(), "x");
    const int j0 = grid_line(b.y0, mesh.height(), mesh.ny(), "y");
    const int j1 = grid_line(b.y1, mesh.height(), mesh.ny(), "y");
    // a box side on the outer boundary does not cut the rectangle
    auto inside = [natural](int k, int lo, int hi, int last) {
      return (lo < k || (natural && lo == 0)) && (k < hi || (natural && hi == last));
    };
    for (NodeId n = 0; n < count; ++n) {
      const int i = mesh.grid_i(n);
      const int j = mesh.grid_j(n);
      const bool in_closure = i0 <= i && i <= i1 && j0 <= j && j <= j1;
      const bool in_open = in_closure && inside(i, i0, i1, mesh.nx()) && inside(j, j0, j1, mesh.ny());
      d.closure[s][n] = in_closure;
      d.open[s][n] = in_open;
      if (in_open) ++d.multiplicity[n];
      if (in_closure && !in_open && (natural || !mesh.on_boundary(n))) d.interfaces[s].push_back(n);
    }
  }

  for (std::size_t s = 0; s < boxes.size(); ++s) {
    for (NodeId n = 0; n < count; ++n) {
      if (d.open[s][n]) d.chi[s][n] = 1.0 / d.multiplicity[n];
    }
  }
  for (NodeId n = 0; n < count; ++n) {
    if ((natural || !mesh.on_boundary(n)) && d.multiplicity[n] == 0) {
      throw std::invalid_argument("build_subdomains: subdomains do not cover the interior");
    }
  }
  return d;
}

SubdomainDecomposition build_subdomains(const TriMesh& mesh, OuterBoundary outer) {
  if (mesh.nx() % 7 != 0 || mesh.ny() % 7 != 0) {
    throw std::invalid_argument("build_subdomains: nx and ny must be multiples of 7 (got " +
                                std::to_string(mesh.nx()) + ", " + std::to_string(mesh.ny()) +
                                ")");
  }
  return build_subdomains(mesh, standard_boxes(), outer);
}

std::vector<int> SubdomainDecomposition::containing(NodeId n) const {
  std::vector<int> out;
  for (int s = 0; s < size(); ++s) {
    if (open[s][n]) out.push_back(s);
  }
  return out;
}

std::vector<std::vector<NodeId>> flux_support(const TriMesh& mesh,
                                              const SubdomainDecomposition& decomp) {
  std::vector<std::vector<NodeId>> out(decomp.size());
  const auto right = mesh.boundary_nodes(kRight);
  for (int s = 0; s < decomp.size(); ++s) {
    for (NodeId n : right) {
      if (decomp.closure[s][n]) out[s].push_back(n);
    }
  }
  return out;
}

void write_mesh(std::ostream& out, const TriMesh& mesh) {
  out << "# nodes " << mesh.node_count() << '\n';
  out.precision(17);
  for (NodeId n = 0; n < mesh.node_count(); ++n) {
    out << n << ' ' << mesh.node(n).x << ' ' << mesh.node(n).y << '\n';
  }
  out << "# elements " << mesh.element_count() << '\n';
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto& t = mesh.elements()[e];
    out << e << ' ' << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
}

}  // namespace ddinv
