#pragma once

#include "resmin/basis.hpp"

#include <array>
#include <set>
#include <string>
#include <vector>

namespace resmin {

/// Polygonal domain: either a named preset or a single counter-clockwise
/// (or clockwise, it is normalised) vertex loop.
struct DomainSpec {
    enum class Preset { Custom, UnitSquare, LShape };

    Preset preset = Preset::Custom;
    std::vector<std::vector<Vec2>> loops;

    static DomainSpec unit_square();
    /// (-1,1)^2 minus (-1,0)^2; re-entrant corner at the origin.
    static DomainSpec lshape();
    static DomainSpec polygon(std::vector<Vec2> loop);

    double area() const;
};

/// Triangle with counter-clockwise vertices. Local edge i is opposite local
/// vertex i; local edge 0 (v[1]-v[2]) is the refinement edge and v[0] the
/// newest vertex.
struct Triangle {
    std::array<int, 3> v{};
    int generation = 0;
    int parent = -1;
};

/// Edge with vertices sorted (v[0] < v[1]). Its global normal is the
/// clockwise rotation of v[1]-v[0]. For interior edges tri[0] is K+ (the
/// element whose counter-clockwise traversal runs v[0]->v[1], so the normal
/// points from K+ into K-) and tri[1] is K-. Boundary edges use tri[0] only.
struct Edge {
    std::array<int, 2> v{};
    std::array<int, 2> tri{-1, -1};
    std::array<int, 2> local{-1, -1};
    bool boundary = true;
};

struct JumpPair {
    int plus = -1;
    int minus = -1;
    int local_plus = -1;
    int local_minus = -1;
};

/// Immutable conforming triangulation with edge adjacency.
class TriMesh {
public:
    TriMesh() = default;
    /// Builds the edge table; throws std::invalid_argument on zero-area or
    /// non-conforming input. Clockwise triangles are reordered.
    TriMesh(std::vector<Vec2> vertices, std::vector<Triangle> triangles, std::string layout = {});

    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_triangles() const { return static_cast<int>(triangles_.size()); }
    int num_edges() const { return static_cast<int>(edges_.size()); }

    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::string& layout() const { return layout_; }

    const Triangle& triangle(int k) const { return triangles_.at(k); }
    const Edge& edge(int e) const { return edges_.at(e); }
    /// Global edge id of local edge i of triangle k.
    int tri_edge(int k, int i) const { return tri_edges_[k][i]; }
    /// +1 if local edge i of k runs along the global edge direction.
    int tri_edge_sign(int k, int i) const { return tri_signs_[k][i]; }

    AffineMap map(int k) const;
    double area(int k) const;
    /// Diameter (longest edge).
    double h(int k) const;
    double edge_length(int e) const;
    Vec2 edge_normal(int e) const;
    Vec2 outward_normal(int k, int i) const;
    Vec2 centroid(int k) const;
    /// Reference-triangle endpoints of local edge i, in counter-clockwise order.
    static std::array<Vec2, 2> reference_edge(int i);

    double total_area() const;
    double min_angle() const;

private:
    std::vector<Vec2> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<Edge> edges_;
    std::vector<std::array<int, 3>> tri_edges_;
    std::vector<std::array<int, 3>> tri_signs_;
    std::string layout_;
};

/// Initial triangulation. Presets use structured grids (unit square:
/// 2 n^2 elements; L-shape: 6 n^2 elements) with n chosen so the element
/// count is closest to target_count. Custom polygons are ear-clipped and
/// uniformly refined towards the target. Throws std::invalid_argument for
/// non-simple polygons.
TriMesh build_initial_mesh(const DomainSpec& domain, int target_count);

/// Newest-vertex bisection of the marked triangles plus conformity closure.
TriMesh refine(const TriMesh& mesh, const std::set<int>& marked);
TriMesh refine_uniform(const TriMesh& mesh);

/// (K+, K-) for an interior edge so that [[w]] = w+ - w-. Throws
/// std::domain_error for boundary edges.
JumpPair jump_trace_pairs(const TriMesh& mesh, int edge);

/// Writes <base>.nodes, <base>.elems and <base>.json.
void write_mesh(const TriMesh& mesh, const std::string& base);

} // namespace resmin
