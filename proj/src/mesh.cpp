#include "resmin/mesh.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

namespace resmin {

namespace {

std::uint64_t edge_key(int a, int b)
{
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double signed_area(const std::vector<Vec2>& loop)
{
    double s = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i) s += cross(loop[i], loop[(i + 1) % loop.size()]);
    return 0.5 * s;
}

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2)
{
    auto orient = [](const Vec2& a, const Vec2& b, const Vec2& c) { return cross(b - a, c - a); };
    const double d1 = orient(q1, q2, p1), d2 = orient(q1, q2, p2);
    const double d3 = orient(p1, p2, q1), d4 = orient(p1, p2, q2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
    auto on_seg = [](const Vec2& a, const Vec2& b, const Vec2& c) {
        return c.x() >= std::min(a.x(), b.x()) && c.x() <= std::max(a.x(), b.x()) &&
               c.y() >= std::min(a.y(), b.y()) && c.y() <= std::max(a.y(), b.y());
    };
    if (d1 == 0 && on_seg(q1, q2, p1)) return true;
    if (d2 == 0 && on_seg(q1, q2, p2)) return true;
    if (d3 == 0 && on_seg(p1, p2, q1)) return true;
    if (d4 == 0 && on_seg(p1, p2, q2)) return true;
    return false;
}

void check_simple(const std::vector<Vec2>& loop)
{
    const std::size_t n = loop.size();
    if (n < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
    if (std::abs(signed_area(loop)) <= 0.0) throw std::invalid_argument("polygon has zero area");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            if (adjacent) {
                if ((loop[i] - loop[j]).norm() == 0.0) throw std::invalid_argument("polygon has repeated vertices");
                continue;
            }
            if (segments_intersect(loop[i], loop[(i + 1) % n], loop[j], loop[(j + 1) % n]))
                throw std::invalid_argument("polygon is not simple: edges " + std::to_string(i) + " and " +
                                            std::to_string(j) + " intersect");
        }
}

// Rotates the vertex order so the longest edge becomes local edge 0.
Triangle with_longest_refinement_edge(const std::vector<Vec2>& x, std::array<int, 3> v)
{
    int best = 0;
    double len = -1.0;
    for (int i = 0; i < 3; ++i) {
        const double l = (x[v[(i + 1) % 3]] - x[v[(i + 2) % 3]]).norm();
        if (l > len + 1e-14 * l) { len = l; best = i; }
    }
    Triangle t;
    t.v = {v[best], v[(best + 1) % 3], v[(best + 2) % 3]};
    return t;
}

TriMesh structured_cells(const std::vector<std::array<double, 2>>& cell_origins, double cell, int n,
                         const std::string& layout)
{
    std::vector<Vec2> x;
    std::map<std::pair<long, long>, int> index;
    const double step = cell / n;
    auto vertex = [&](double px, double py) {
        const auto key = std::make_pair(std::lround(px / step * 4), std::lround(py / step * 4));
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        x.emplace_back(px, py);
        index.emplace(key, static_cast<int>(x.size()) - 1);
        return static_cast<int>(x.size()) - 1;
    };
    std::vector<std::array<int, 3>> raw;
    for (const auto& o : cell_origins)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const double x0 = o[0] + i * step, y0 = o[1] + j * step;
                const int a = vertex(x0, y0), b = vertex(x0 + step, y0);
                const int c = vertex(x0 + step, y0 + step), d = vertex(x0, y0 + step);
                raw.push_back({a, b, c});
                raw.push_back({a, c, d});
            }
    std::vector<Triangle> tris;
    for (const auto& t : raw) tris.push_back(with_longest_refinement_edge(x, t));
    return TriMesh(std::move(x), std::move(tris), layout);
}

std::vector<std::array<int, 3>> ear_clip(const std::vector<Vec2>& loop)
{
    std::vector<int> idx(loop.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    std::vector<std::array<int, 3>> out;
    auto inside = [&](const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
        return cross(b - a, p - a) >= 0 && cross(c - b, p - b) >= 0 && cross(a - c, p - c) >= 0;
    };
    while (idx.size() > 3) {
        bool clipped = false;
        const std::size_t n = idx.size();
        for (std::size_t i = 0; i < n && !clipped; ++i) {
            const int ia = idx[(i + n - 1) % n], ib = idx[i], ic = idx[(i + 1) % n];
            const Vec2 &a = loop[ia], &b = loop[ib], &c = loop[ic];
            if (cross(b - a, c - b) <= 0) continue;
            bool empty = true;
            for (int j : idx) {
                if (j == ia || j == ib || j == ic) continue;
                if (inside(loop[j], a, b, c)) { empty = false; break; }
            }
            if (!empty) continue;
            out.push_back({ia, ib, ic});
            idx.erase(idx.begin() + static_cast<long>(i));
            clipped = true;
        }
        if (!clipped) throw std::invalid_argument("ear clipping failed: polygon is degenerate");
    }
    out.push_back({idx[0], idx[1], idx[2]});
    return out;
}

} // namespace

DomainSpec DomainSpec::unit_square()
{
    DomainSpec d;
    d.preset = Preset::UnitSquare;
    d.loops = {{Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)}};
    return d;
}

DomainSpec DomainSpec::lshape()
{
    DomainSpec d;
    d.preset = Preset::LShape;
    d.loops = {{Vec2(-1, 0), Vec2(0, 0), Vec2(0, -1), Vec2(1, -1), Vec2(1, 1), Vec2(-1, 1)}};
    return d;
}

DomainSpec DomainSpec::polygon(std::vector<Vec2> loop)
{
    DomainSpec d;
    d.loops = {std::move(loop)};
    return d;
}

double DomainSpec::area() const
{
    double a = 0.0;
    for (const auto& l : loops) a += std::abs(signed_area(l));
    return a;
}

TriMesh::TriMesh(std::vector<Vec2> vertices, std::vector<Triangle> triangles, std::string layout)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)), layout_(std::move(layout))
{
    const int nv = num_vertices();
    for (auto& t : triangles_) {
        for (int i : t.v)
            if (i < 0 || i >= nv) throw std::invalid_argument("TriMesh: vertex index out of range");
        const double a = cross(vertices_[t.v[1]] - vertices_[t.v[0]], vertices_[t.v[2]] - vertices_[t.v[0]]);
        if (a == 0.0) throw std::invalid_argument("TriMesh: zero-area triangle");
        // Swapping v[1] and v[2] keeps local edge 0 as the refinement edge.
        if (a < 0.0) std::swap(t.v[1], t.v[2]);
    }

    std::vector<std::uint64_t> keys;
    keys.reserve(3 * triangles_.size());
    for (const auto& t : triangles_)
        for (int i = 0; i < 3; ++i) keys.push_back(edge_key(t.v[(i + 1) % 3], t.v[(i + 2) % 3]));
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    std::unordered_map<std::uint64_t, int> id;
    id.reserve(keys.size());
    edges_.resize(keys.size());
    for (std::size_t e = 0; e < keys.size(); ++e) {
        id.emplace(keys[e], static_cast<int>(e));
        edges_[e].v = {static_cast<int>(keys[e] >> 32), static_cast<int>(keys[e] & 0xffffffffu)};
    }

    tri_edges_.resize(triangles_.size());
    tri_signs_.resize(triangles_.size());
    std::vector<std::array<int, 2>> minus(edges_.size(), {-1, -1});
    for (int k = 0; k < num_triangles(); ++k) {
        const auto& t = triangles_[k];
        for (int i = 0; i < 3; ++i) {
            const int a = t.v[(i + 1) % 3], b = t.v[(i + 2) % 3];
            const int e = id.at(edge_key(a, b));
            const int sign = a < b ? 1 : -1;
            tri_edges_[k][i] = e;
            tri_signs_[k][i] = sign;
            auto& E = edges_[e];
            if (sign > 0) {
                if (E.tri[0] != -1) throw std::invalid_argument("TriMesh: non-conforming or overlapping triangles");
                E.tri[0] = k;
                E.local[0] = i;
            } else {
                if (minus[e][0] != -1) throw std::invalid_argument("TriMesh: non-conforming or overlapping triangles");
                minus[e] = {k, i};
            }
        }
    }
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        auto& E = edges_[e];
        if (E.tri[0] != -1 && minus[e][0] != -1) {
            E.tri[1] = minus[e][0];
            E.local[1] = minus[e][1];
            E.boundary = false;
        } else if (E.tri[0] == -1) {
            E.tri[0] = minus[e][0];
            E.local[0] = minus[e][1];
            E.boundary = true;
        } else {
            E.boundary = true;
        }
    }
}

AffineMap TriMesh::map(int k) const
{
    const auto& t = triangles_.at(k);
    return AffineMap(vertices_[t.v[0]], vertices_[t.v[1]], vertices_[t.v[2]]);
}

double TriMesh::area(int k) const { return map(k).area(); }

double TriMesh::h(int k) const
{
    const auto& t = triangles_.at(k);
    double d = 0.0;
    for (int i = 0; i < 3; ++i) d = std::max(d, (vertices_[t.v[(i + 1) % 3]] - vertices_[t.v[(i + 2) % 3]]).norm());
    return d;
}

double TriMesh::edge_length(int e) const
{
    const auto& E = edges_.at(e);
    return (vertices_[E.v[1]] - vertices_[E.v[0]]).norm();
}

Vec2 TriMesh::edge_normal(int e) const
{
    const auto& E = edges_.at(e);
    const Vec2 t = vertices_[E.v[1]] - vertices_[E.v[0]];
    return Vec2(t.y(), -t.x()).normalized();
}

Vec2 TriMesh::outward_normal(int k, int i) const { return tri_signs_.at(k)[i] * edge_normal(tri_edges_[k][i]); }

Vec2 TriMesh::centroid(int k) const
{
    const auto& t = triangles_.at(k);
    return (vertices_[t.v[0]] + vertices_[t.v[1]] + vertices_[t.v[2]]) / 3.0;
}

std::array<Vec2, 2> TriMesh::reference_edge(int i)
{
    static const std::array<Vec2, 3> ref{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
    return {ref[(i + 1) % 3], ref[(i + 2) % 3]};
}

double TriMesh::total_area() const
{
    double a = 0.0;
    for (int k = 0; k < num_triangles(); ++k) a += area(k);
    return a;
}

double TriMesh::min_angle() const
{
    double m = std::numbers::pi;
    for (const auto& t : triangles_)
        for (int i = 0; i < 3; ++i) {
            const Vec2 a = vertices_[t.v[(i + 1) % 3]] - vertices_[t.v[i]];
            const Vec2 b = vertices_[t.v[(i + 2) % 3]] - vertices_[t.v[i]];
            m = std::min(m, std::acos(std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0)));
        }
    return m;
}

TriMesh build_initial_mesh(const DomainSpec& domain, int target_count)
{
    if (target_count < 1) throw std::invalid_argument("build_initial_mesh: target_count must be positive");
    if (domain.loops.size() != 1) throw std::invalid_argument("build_initial_mesh: exactly one boundary loop supported");
    check_simple(domain.loops[0]);

    auto closest_n = [&](int per_cell) {
        return std::max(1, static_cast<int>(std::lround(std::sqrt(double(target_count) / per_cell))));
    };
    switch (domain.preset) {
    case DomainSpec::Preset::UnitSquare: {
        const int n = closest_n(2);
        return structured_cells({{0.0, 0.0}}, 1.0, n,
                                "unit square, " + std::to_string(n) + "x" + std::to_string(n) +
                                    " cells split along the (0,0)-(1,1) diagonal direction");
    }
    case DomainSpec::Preset::LShape: {
        const int m = closest_n(6);
        return structured_cells({{0.0, -1.0}, {0.0, 0.0}, {-1.0, 0.0}}, 1.0, m,
                                "L-shape, three unit squares of " + std::to_string(m) + "x" + std::to_string(m) +
                                    " cells split along the (0,0)-(1,1) diagonal direction");
    }
    case DomainSpec::Preset::Custom: break;
    }

    std::vector<Vec2> loop = domain.loops[0];
    if (signed_area(loop) < 0) std::reverse(loop.begin(), loop.end());
    std::vector<Triangle> tris;
    for (const auto& t : ear_clip(loop)) tris.push_back(with_longest_refinement_edge(loop, t));
    TriMesh mesh(loop, std::move(tris), "ear-clipped polygon, uniformly bisected");
    while (mesh.num_triangles() < target_count) {
        TriMesh next = refine_uniform(mesh);
        if (std::abs(next.num_triangles() - target_count) > std::abs(mesh.num_triangles() - target_count)) break;
        mesh = std::move(next);
    }
    return mesh;
}

TriMesh refine(const TriMesh& mesh, const std::set<int>& marked)
{
    if (marked.empty()) return mesh;
    std::vector<char> edge_marked(mesh.num_edges(), 0);
    for (int k : marked) {
        if (k < 0 || k >= mesh.num_triangles()) throw std::out_of_range("refine: triangle id out of range");
        edge_marked[mesh.tri_edge(k, 0)] = 1;
    }
    // Closure: any triangle with a marked edge must also bisect its refinement edge.
    for (bool changed = true; changed;) {
        changed = false;
        for (int k = 0; k < mesh.num_triangles(); ++k) {
            if (edge_marked[mesh.tri_edge(k, 0)]) continue;
            if (edge_marked[mesh.tri_edge(k, 1)] || edge_marked[mesh.tri_edge(k, 2)]) {
                edge_marked[mesh.tri_edge(k, 0)] = 1;
                changed = true;
            }
        }
    }

    std::vector<Vec2> x = mesh.vertices();
    std::unordered_map<std::uint64_t, int> midpoint;
    for (int e = 0; e < mesh.num_edges(); ++e) {
        if (!edge_marked[e]) continue;
        const auto& E = mesh.edge(e);
        x.push_back(0.5 * (x[E.v[0]] + x[E.v[1]]));
        midpoint.emplace(edge_key(E.v[0], E.v[1]), static_cast<int>(x.size()) - 1);
    }

    std::vector<Triangle> out;
    out.reserve(mesh.num_triangles() + 3 * midpoint.size());
    auto bisect = [&](auto&& self, const Triangle& t, int parent) -> void {
        auto it = midpoint.find(edge_key(t.v[1], t.v[2]));
        if (it == midpoint.end()) {
            out.push_back(t);
            return;
        }
        const int m = it->second;
        Triangle c1{{m, t.v[0], t.v[1]}, t.generation + 1, parent};
        Triangle c2{{m, t.v[2], t.v[0]}, t.generation + 1, parent};
        self(self, c1, parent);
        self(self, c2, parent);
    };
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const auto& t = mesh.triangle(k);
        if (!edge_marked[mesh.tri_edge(k, 0)]) {
            Triangle same = t;
            same.parent = k;
            out.push_back(same);
            continue;
        }
        bisect(bisect, t, k);
    }
    return TriMesh(std::move(x), std::move(out), mesh.layout());
}

TriMesh refine_uniform(const TriMesh& mesh)
{
    std::set<int> all;
    for (int k = 0; k < mesh.num_triangles(); ++k) all.insert(k);
    return refine(mesh, all);
}

JumpPair jump_trace_pairs(const TriMesh& mesh, int edge)
{
    const auto& E = mesh.edge(edge);
    if (E.boundary) throw std::domain_error("jump_trace_pairs: edge " + std::to_string(edge) + " lies on the boundary");
    return {E.tri[0], E.tri[1], E.local[0], E.local[1]};
}

void write_mesh(const TriMesh& mesh, const std::string& base)
{
    std::ofstream nodes(base + ".nodes");
    nodes.precision(17);
    for (const auto& v : mesh.vertices()) nodes << v.x() << ' ' << v.y() << '\n';
    std::ofstream elems(base + ".elems");
    for (const auto& t : mesh.triangles()) elems << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << '\n';

    nlohmann::json meta;
    meta["num_vertices"] = mesh.num_vertices();
    meta["num_triangles"] = mesh.num_triangles();
    meta["layout"] = mesh.layout();
    auto& bnd = meta["boundary_edges"] = nlohmann::json::array();
    for (const auto& e : mesh.edges())
        if (e.boundary) bnd.push_back({e.v[0], e.v[1]});
    auto& gen = meta["generation"] = nlohmann::json::array();
    for (const auto& t : mesh.triangles()) gen.push_back(t.generation);
    std::ofstream js(base + ".json");
    js << meta.dump(1) << '\n';
    if (!nodes || !elems || !js) throw std::runtime_error("write_mesh: failed writing " + base);
}

} // namespace resmin
