#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <map>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace porflow {

/// Nodal coefficients of a piecewise-(multi)linear field, indexed in Mesh node order.
using FieldCoefficients = Eigen::VectorXd;

/// Values at the quadrature points of every cell, cell-major
/// (index = cell * points_per_cell + q).
using QuadratureField = std::vector<double>;

struct Point
{
    double x = 0.0;
    double y = 0.0;
};

enum class BoundaryTag { gamma1, gamma2 };  ///< gamma1: Dirichlet, gamma2: Neumann

enum class Side { left, right, bottom, top };

std::string_view to_string(Side side);
std::string_view to_string(BoundaryTag tag);

struct MeshSpec
{
    int dim = 1;
    std::array<double, 2> extents{1.0, 1.0};
    std::array<int, 2> cells{8, 1};
    /// One tag per side of the domain: left/right in 1D, all four in 2D.
    std::map<Side, BoundaryTag> tags;

    /// Every side tagged gamma2.
    static MeshSpec closed(int dim, std::array<double, 2> extents, std::array<int, 2> cells);

    bool operator==(const MeshSpec&) const = default;
};

/// Reference data shared by all cells of a uniform mesh.
struct CellQuadrature
{
    static constexpr int max_nodes = 4;
    struct Entry
    {
        double weight;                                  ///< physical weight (includes |J|)
        Point local;                                    ///< offset from the cell origin
        std::array<double, max_nodes> shape;            ///< N_a at the point
        std::array<std::array<double, 2>, max_nodes> grad;  ///< physical gradient of N_a
    };
    std::vector<Entry> points;
};

/// A boundary face: a point in 1D, an edge in 2D.
struct BoundaryFace
{
    Side side;
    BoundaryTag tag;
    std::array<int, 2> nodes{-1, -1};
    int node_count = 0;
    double measure = 0.0;

    struct Entry
    {
        double weight;
        Point position;
        std::array<double, 2> shape;  ///< values of the face-node basis functions
    };
    std::vector<Entry> points;
};

/**
 * Uniform structured mesh of an interval or rectangle with conforming
 * (multi)linear nodal elements. Nodes are numbered with x fastest, then y.
 * Immutable after construction.
 */
class Mesh
{
public:
    explicit Mesh(const MeshSpec& spec);

    const MeshSpec& spec() const { return spec_; }
    int dim() const { return spec_.dim; }
    int nodes_x() const { return spec_.cells[0] + 1; }
    int nodes_y() const { return dim() == 2 ? spec_.cells[1] + 1 : 1; }
    int node_count() const { return static_cast<int>(nodes_.size()); }
    int cell_count() const { return cell_count_; }
    int nodes_per_cell() const { return dim() == 2 ? 4 : 2; }
    int points_per_cell() const { return static_cast<int>(quadrature_.points.size()); }
    std::array<double, 2> cell_size() const { return h_; }
    double measure() const;

    const Point& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
    const std::vector<Point>& nodes() const { return nodes_; }
    std::array<int, 4> cell_nodes(int cell) const;
    Point cell_origin(int cell) const;
    Point quadrature_point(int cell, int q) const;
    const CellQuadrature& quadrature() const { return quadrature_; }

    const std::vector<BoundaryFace>& boundary_faces() const { return faces_; }
    bool has_dirichlet() const { return has_dirichlet_; }
    bool is_dirichlet(int node) const { return dirichlet_[static_cast<std::size_t>(node)] != 0; }

    /// Nodal field -> values at all quadrature points.
    QuadratureField at_quadrature(const FieldCoefficients& field) const;

    bool operator==(const Mesh& other) const;

private:
    MeshSpec spec_;
    std::array<double, 2> h_{1.0, 1.0};
    int cell_count_ = 0;
    std::vector<Point> nodes_;
    std::vector<char> dirichlet_;
    bool has_dirichlet_ = false;
    CellQuadrature quadrature_;
    std::vector<BoundaryFace> faces_;
};

/// Validates \p spec and builds the mesh; throws ValidationError.
Mesh build_mesh(const MeshSpec& spec);

FieldCoefficients interpolate(const std::function<double(const Point&)>& f, const Mesh& mesh);

/// Gauss quadrature of the product of two piecewise-(multi)linear fields.
double integrate(const FieldCoefficients& field, const FieldCoefficients& weight, const Mesh& mesh);
double integrate(const FieldCoefficients& field, const Mesh& mesh);

/// node,x[,y] CSV with a header row.
void write_node_csv(std::ostream& os, const Mesh& mesh);

} // namespace porflow
