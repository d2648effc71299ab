#include "porflow/mesh.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include "porflow/errors.hpp"

namespace porflow {

namespace {

// Two-point Gauss rule on [0, 1].
const std::array<double, 2> kGaussPoints{0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
constexpr double kGaussWeight = 0.5;

std::vector<Side> sides_for(int dim)
{
    if (dim == 1)
        return {Side::left, Side::right};
    return {Side::left, Side::right, Side::bottom, Side::top};
}

} // namespace

std::string_view to_string(Side side)
{
    switch (side) {
    case Side::left: return "left";
    case Side::right: return "right";
    case Side::bottom: return "bottom";
    case Side::top: return "top";
    }
    return "?";
}

std::string_view to_string(BoundaryTag tag)
{
    return tag == BoundaryTag::gamma1 ? "gamma1" : "gamma2";
}

MeshSpec MeshSpec::closed(int dim, std::array<double, 2> extents, std::array<int, 2> cells)
{
    MeshSpec spec;
    spec.dim = dim;
    spec.extents = extents;
    spec.cells = cells;
    if (dim == 1)
        spec.cells[1] = 1;
    for (Side s : sides_for(dim))
        spec.tags[s] = BoundaryTag::gamma2;
    return spec;
}

Mesh::Mesh(const MeshSpec& spec) : spec_(spec)
{
    if (spec_.dim != 1 && spec_.dim != 2)
        throw ValidationError("mesh dim must be 1 or 2");
    for (int a = 0; a < spec_.dim; ++a) {
        if (!(spec_.extents[a] > 0.0) || !std::isfinite(spec_.extents[a]))
            throw ValidationError("mesh extents must be positive");
        if (spec_.cells[a] < 1)
            throw ValidationError("mesh cell counts must be positive");
    }
    if (spec_.dim == 1) {
        spec_.cells[1] = 1;
        spec_.extents[1] = 1.0;
    }
    const auto sides = sides_for(spec_.dim);
    if (spec_.tags.empty())
        throw ValidationError("boundary tag specification is empty");
    for (Side s : sides)
        if (spec_.tags.find(s) == spec_.tags.end())
            throw ValidationError("boundary side '" + std::string(to_string(s)) + "' has no tag");
    for (const auto& [side, tag] : spec_.tags) {
        (void)tag;
        if (spec_.dim == 1 && (side == Side::bottom || side == Side::top))
            throw ValidationError("1D mesh cannot tag bottom/top sides");
    }

    const int nx = spec_.cells[0];
    const int ny = spec_.cells[1];
    h_ = {spec_.extents[0] / nx, spec_.dim == 2 ? spec_.extents[1] / ny : 1.0};
    cell_count_ = spec_.dim == 2 ? nx * ny : nx;

    const int npx = nx + 1;
    const int npy = spec_.dim == 2 ? ny + 1 : 1;
    nodes_.reserve(static_cast<std::size_t>(npx * npy));
    for (int j = 0; j < npy; ++j)
        for (int i = 0; i < npx; ++i)
            nodes_.push_back({i * h_[0], spec_.dim == 2 ? j * h_[1] : 0.0});

    // Reference quadrature, identical for every cell.
    if (spec_.dim == 1) {
        for (double xi : kGaussPoints) {
            CellQuadrature::Entry e{};
            e.weight = kGaussWeight * h_[0];
            e.local = {xi * h_[0], 0.0};
            e.shape = {1.0 - xi, xi, 0.0, 0.0};
            e.grad[0] = {-1.0 / h_[0], 0.0};
            e.grad[1] = {1.0 / h_[0], 0.0};
            quadrature_.points.push_back(e);
        }
    }
    else {
        for (double eta : kGaussPoints) {
            for (double xi : kGaussPoints) {
                CellQuadrature::Entry e{};
                e.weight = kGaussWeight * kGaussWeight * h_[0] * h_[1];
                e.local = {xi * h_[0], eta * h_[1]};
                const std::array<double, 2> nx1{1.0 - xi, xi};
                const std::array<double, 2> ny1{1.0 - eta, eta};
                const std::array<double, 2> dx1{-1.0 / h_[0], 1.0 / h_[0]};
                const std::array<double, 2> dy1{-1.0 / h_[1], 1.0 / h_[1]};
                for (int b = 0; b < 2; ++b) {
                    for (int a = 0; a < 2; ++a) {
                        const int k = a + 2 * b;
                        e.shape[k] = nx1[a] * ny1[b];
                        e.grad[k] = {dx1[a] * ny1[b], nx1[a] * dy1[b]};
                    }
                }
                quadrature_.points.push_back(e);
            }
        }
    }

    // Boundary faces, in side order then along the side.
    dirichlet_.assign(nodes_.size(), 0);
    for (Side side : sides) {
        const BoundaryTag tag = spec_.tags.at(side);
        if (spec_.dim == 1) {
            BoundaryFace f;
            f.side = side;
            f.tag = tag;
            f.nodes = {side == Side::left ? 0 : nx, -1};
            f.node_count = 1;
            f.measure = 1.0;
            f.points.push_back({1.0, nodes_[static_cast<std::size_t>(f.nodes[0])], {1.0, 0.0}});
            faces_.push_back(f);
            continue;
        }
        const bool horizontal = side == Side::bottom || side == Side::top;
        const int count = horizontal ? nx : ny;
        for (int k = 0; k < count; ++k) {
            BoundaryFace f;
            f.side = side;
            f.tag = tag;
            int a = 0;
            int b = 0;
            switch (side) {
            case Side::left: a = k * npx; b = (k + 1) * npx; break;
            case Side::right: a = k * npx + nx; b = (k + 1) * npx + nx; break;
            case Side::bottom: a = k; b = k + 1; break;
            case Side::top: a = ny * npx + k; b = ny * npx + k + 1; break;
            }
            f.nodes = {a, b};
            f.node_count = 2;
            f.measure = horizontal ? h_[0] : h_[1];
            const Point pa = nodes_[static_cast<std::size_t>(a)];
            const Point pb = nodes_[static_cast<std::size_t>(b)];
            for (double t : kGaussPoints) {
                f.points.push_back({kGaussWeight * f.measure,
                                    {pa.x + t * (pb.x - pa.x), pa.y + t * (pb.y - pa.y)},
                                    {1.0 - t, t}});
            }
            faces_.push_back(f);
        }
    }
    for (const auto& f : faces_) {
        if (f.tag != BoundaryTag::gamma1)
            continue;
        has_dirichlet_ = true;
        for (int k = 0; k < f.node_count; ++k)
            dirichlet_[static_cast<std::size_t>(f.nodes[k])] = 1;
    }
}

double Mesh::measure() const
{
    return dim() == 2 ? spec_.extents[0] * spec_.extents[1] : spec_.extents[0];
}

std::array<int, 4> Mesh::cell_nodes(int cell) const
{
    if (dim() == 1)
        return {cell, cell + 1, -1, -1};
    const int nx = spec_.cells[0];
    const int i = cell % nx;
    const int j = cell / nx;
    const int n0 = i + j * (nx + 1);
    return {n0, n0 + 1, n0 + nx + 1, n0 + nx + 2};
}

Point Mesh::cell_origin(int cell) const
{
    return nodes_[static_cast<std::size_t>(cell_nodes(cell)[0])];
}

Point Mesh::quadrature_point(int cell, int q) const
{
    const Point o = cell_origin(cell);
    const Point l = quadrature_.points[static_cast<std::size_t>(q)].local;
    return {o.x + l.x, o.y + l.y};
}

QuadratureField Mesh::at_quadrature(const FieldCoefficients& field) const
{
    if (field.size() != node_count())
        throw ValidationError("at_quadrature: field length does not match node count");
    const int nq = points_per_cell();
    const int nn = nodes_per_cell();
    QuadratureField out(static_cast<std::size_t>(cell_count_ * nq));
    for (int c = 0; c < cell_count_; ++c) {
        const auto cn = cell_nodes(c);
        for (int q = 0; q < nq; ++q) {
            const auto& e = quadrature_.points[static_cast<std::size_t>(q)];
            double v = 0.0;
            for (int a = 0; a < nn; ++a)
                v += e.shape[a] * field[cn[a]];
            out[static_cast<std::size_t>(c * nq + q)] = v;
        }
    }
    return out;
}

bool Mesh::operator==(const Mesh& other) const
{
    if (dim() != other.dim() || node_count() != other.node_count() ||
        spec_.cells != other.spec_.cells || spec_.extents != other.spec_.extents ||
        spec_.tags != other.spec_.tags)
        return false;
    for (int i = 0; i < node_count(); ++i)
        if (node(i).x != other.node(i).x || node(i).y != other.node(i).y)
            return false;
    return true;
}

Mesh build_mesh(const MeshSpec& spec)
{
    return Mesh(spec);
}

FieldCoefficients interpolate(const std::function<double(const Point&)>& f, const Mesh& mesh)
{
    FieldCoefficients out(mesh.node_count());
    for (int i = 0; i < mesh.node_count(); ++i)
        out[i] = f(mesh.node(i));
    return out;
}

double integrate(const FieldCoefficients& field, const FieldCoefficients& weight, const Mesh& mesh)
{
    if (field.size() != mesh.node_count() || weight.size() != mesh.node_count())
        throw ValidationError("integrate: length mismatch with mesh node count");
    const auto fq = mesh.at_quadrature(field);
    const auto wq = mesh.at_quadrature(weight);
    const int nq = mesh.points_per_cell();
    double total = 0.0;
    for (int c = 0; c < mesh.cell_count(); ++c)
        for (int q = 0; q < nq; ++q) {
            const auto k = static_cast<std::size_t>(c * nq + q);
            total += mesh.quadrature().points[static_cast<std::size_t>(q)].weight * fq[k] * wq[k];
        }
    return total;
}

double integrate(const FieldCoefficients& field, const Mesh& mesh)
{
    return integrate(field, FieldCoefficients::Ones(mesh.node_count()), mesh);
}

void write_node_csv(std::ostream& os, const Mesh& mesh)
{
    os << (mesh.dim() == 2 ? "node,x,y\n" : "node,x\n");
    os << std::setprecision(17);
    for (int i = 0; i < mesh.node_count(); ++i) {
        os << i << ',' << mesh.node(i).x;
        if (mesh.dim() == 2)
            os << ',' << mesh.node(i).y;
        os << '\n';
    }
}

} // namespace porflow
