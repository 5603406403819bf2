#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qwg {

class MeshError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Strip (-L, L) x (-1/2, 1/2), optionally with the stub (-ell/2, ell/2) x [1/2, H).
struct GeometryTee {
    double ell = 1.6;
    double H = 2.5;
    double L = 2.0;
    bool with_stub = true;

    void validate() const;
    double area() const;
    static GeometryTee strip(double L);
};

enum class BoundaryTag : std::uint8_t { wall, face_left, face_right, symmetry_plane, lid };

const char* tag_name(BoundaryTag t);
BoundaryTag tag_from_name(const std::string& s);

struct BoundaryEdge {
    std::array<int, 2> nodes{};  // counter-clockwise with respect to the owning triangle
    int mid = -1;                // midside node for order 2
    BoundaryTag tag = BoundaryTag::wall;
    int triangle = -1;
    int local_edge = -1;         // edge i joins corners i and (i+1)%3
};

struct Mesh {
    int order = 1;
    std::vector<Eigen::Vector2d> nodes;
    std::vector<std::array<int, 3>> triangles;
    std::vector<std::array<int, 3>> midside; // order 2: node on local edge i
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<std::pair<int, int>> periodic_pairs; // (left, right), ascending y

    std::size_t num_nodes() const { return nodes.size(); }
    std::size_t num_triangles() const { return triangles.size(); }
    double signed_area(std::size_t t) const;
    double area() const;
    double min_angle_deg() const;
    std::vector<int> nodes_with_tag(BoundaryTag t) const; // includes midside nodes
    bool has_tag(BoundaryTag t) const;

    void write(std::ostream& os) const;
    static Mesh read(std::istream& is);
};

// Fixed segment counts for selected parts of the tee; 0 means derive from h.
struct MeshLayout {
    int stub_rows = 0;
    // When in (1/2, H): stub rows end at this height and one row spans up to the lid.
    double lid_row_base = 0.0;
};

Mesh build_tee_mesh(const GeometryTee& g, double h, int order, const MeshLayout& layout = {});
Mesh build_half_mesh(const GeometryTee& g, double h, int order, const MeshLayout& layout = {});
// Periodicity cell in scaled coordinates: the tee truncated at |x| = 1/(2 eps).
Mesh build_cell_mesh(const GeometryTee& g, double eps, double h, int order);
// Axis-aligned rectangle with every side tagged wall.
Mesh build_rectangle_mesh(double x0, double x1, double y0, double y1, double h, int order);

} // namespace qwg
