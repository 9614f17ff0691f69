#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace ddinv {

using NodeId = int;

/// Bit flags naming the sides of the rectangle a node lies on. Corner nodes
/// carry two bits.
enum BoundarySide : std::uint8_t {
  kInterior = 0,
  kLeft = 1 << 0,
  kRight = 1 << 1,
  kBottom = 1 << 2,
  kTop = 1 << 3,
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Structured P1 triangulation of (0, width) x (0, height).
///
/// Node (i, j) has id j*(nx+1)+i and sits at (i*width/nx, j*height/ny). Every
/// grid cell is split along its lower-left to upper-right diagonal into two
/// counter-clockwise triangles.
class TriMesh {
 public:
  TriMesh() = default;

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double width() const { return width_; }
  double height() const { return height_; }

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int element_count() const { return static_cast<int>(elements_.size()); }

  const std::vector<Point>& nodes() const { return nodes_; }
  const std::vector<std::array<NodeId, 3>>& elements() const { return elements_; }
  const Point& node(NodeId n) const { return nodes_[n]; }

  NodeId node_id(int i, int j) const { return j * (nx_ + 1) + i; }
  int grid_i(NodeId n) const { return n % (nx_ + 1); }
  int grid_j(NodeId n) const { return n / (nx_ + 1); }

  /// Sides the node lies on (0 for interior nodes).
  std::uint8_t boundary_flags(NodeId n) const { return boundary_[n]; }
  bool on_boundary(NodeId n) const { return boundary_[n] != kInterior; }

  /// Boundary edges lying on any side in `sides`, ordered side by side
  /// (left, right, bottom, top) and along each side by increasing coordinate.
  std::vector<std::array<NodeId, 2>> boundary_edges(std::uint8_t sides) const;

  /// Nodes touched by boundary_edges(sides), in increasing id order.
  std::vector<NodeId> boundary_nodes(std::uint8_t sides) const;

  double signed_area(int element) const;

  friend TriMesh build_mesh(int nx, int ny, double width, double height);

 private:
  int nx_ = 0;
  int ny_ = 0;
  double width_ = 0.0;
  double height_ = 0.0;
  std::vector<Point> nodes_;
  std::vector<std::array<NodeId, 3>> elements_;
  std::vector<std::uint8_t> boundary_;
};

/// Uniform triangulation of (0, width) x (0, height); the default rectangle is
/// (0,1) x (0,2). Throws std::invalid_argument for nx < 1 or ny < 1.
TriMesh build_mesh(int nx, int ny, double width = 1.0, double height = 2.0);

/// Axis-aligned open box (x0, x1) x (y0, y1).
struct Box {
  double x0, x1, y0, y1;
};

/// The four overlapping boxes used throughout the experiments, numbered so
/// that boxes 0 and 1 are the upper row and 2, 3 the lower row.
std::vector<Box> standard_boxes();

/// How local problems treat the part of a subdomain boundary that lies on the
/// outer boundary of the rectangle.
enum class OuterBoundary {
  /// Values prescribed there (zero for the forward maps): only nodes strictly
  /// inside a box are solved for.
  kDirichlet,
  /// Natural (Neumann) conditions there: nodes on the outer boundary are solved
  /// for unless they lie on a box side inside the rectangle.
  kNatural,
};

/// Overlapping decomposition of the mesh into subdomains given as boxes.
///
/// Masks are node-wise: `closure[i][n]` when node n lies in the closed box,
/// `open[i][n]` when a local solve on box i determines the value at n. With
/// Dirichlet outer data these are the nodes strictly inside the box; with
/// natural outer data the box sides on the outer boundary count as inside.
/// The interface of subdomain i is closure minus open, without the outer
/// boundary nodes in the Dirichlet case.
struct SubdomainDecomposition {
  std::vector<Box> boxes;
  OuterBoundary outer = OuterBoundary::kDirichlet;
  std::vector<std::vector<char>> closure;
  std::vector<std::vector<char>> open;
  std::vector<std::vector<NodeId>> interfaces;
  /// Number of open subdomains containing each node (0 on the outer boundary
  /// in the Dirichlet case).
  std::vector<int> multiplicity;
  /// Partition of unity: 1/multiplicity on open subdomain nodes, 0 elsewhere.
  std::vector<std::vector<double>> chi;

  int size() const { return static_cast<int>(boxes.size()); }

  /// Open subdomains containing node n, in increasing order.
  std::vector<int> containing(NodeId n) const;
};

/// Builds the decomposition for arbitrary boxes. Every box edge must coincide
/// with a grid line and the open sets must cover every node that is solved
/// for; otherwise std::invalid_argument is thrown.
SubdomainDecomposition build_subdomains(const TriMesh& mesh, const std::vector<Box>& boxes,
                                        OuterBoundary outer = OuterBoundary::kDirichlet);

/// Decomposition with standard_boxes(); needs nx and ny divisible by 7.
SubdomainDecomposition build_subdomains(const TriMesh& mesh,
                                        OuterBoundary outer = OuterBoundary::kDirichlet);

/// Per subdomain, the nodes of the right side x = width lying in the closed
/// box (empty for boxes that do not reach the right side).
std::vector<std::vector<NodeId>> flux_support(const TriMesh& mesh,
                                              const SubdomainDecomposition& decomp);

/// Plain-text dump: "# nodes <count>" followed by "id x y" lines, then
/// "# elements <count>" followed by "id n0 n1 n2" lines.
void write_mesh(std::ostream& out, const TriMesh& mesh);

}  // namespace ddinv
