#include "doctest.h"

#include "resmin/bdm.hpp"

#include <cmath>
#include <random>

using namespace resmin;

namespace {

// Random vector field with polynomial components of total degree d.
struct PolyField {
    int d;
    std::vector<double> cx, cy;
    Vec2 operator()(const Vec2& x) const
    {
        Vec2 v = Vec2::Zero();
        int i = 0;
        for (int a = 0; a <= d; ++a)
            for (int j = 0; j <= a; ++j, ++i) {
                const double m = std::pow(x.x(), a - j) * std::pow(x.y(), j);
                v += Vec2(cx[i], cy[i]) * m;
            }
        return v;
    }
    double div(const Vec2& x) const
    {
        double s = 0.0;
        int i = 0;
        for (int a = 0; a <= d; ++a)
            for (int j = 0; j <= a; ++j, ++i) {
                const int ex = a - j, ey = j;
                if (ex > 0) s += cx[i] * ex * std::pow(x.x(), ex - 1) * std::pow(x.y(), ey);
                if (ey > 0) s += cy[i] * ey * std::pow(x.x(), ex) * std::pow(x.y(), ey - 1);
            }
        return s;
    }
};

PolyField random_field(int d, std::mt19937& gen)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PolyField f{d, {}, {}};
    for (int i = 0; i < scalar_dim(d); ++i) {
        f.cx.push_back(u(gen));
        f.cy.push_back(u(gen));
    }
    return f;
}

TriMesh test_mesh()
{
    // Perturbed, locally refined square: non-uniform shapes and both edge orientations.
    TriMesh m = build_initial_mesh(DomainSpec::unit_square(), 8);
    m = refine(m, {0, 3});
    std::vector<Vec2> x = m.vertices();
    for (auto& v : x)
        if (v.x() > 0 && v.x() < 1 && v.y() > 0 && v.y() < 1) v += Vec2(0.03 * std::sin(7 * v.y()), 0.02 * std::cos(5 * v.x()));
    return TriMesh(x, m.triangles());
}

} // namespace

TEST_CASE("local dimensions")
{
    CHECK(BdmReference(1).dim() == 6);
    CHECK(BdmReference(2).dim() == 12);
    CHECK(BdmReference(3).dim() == 20);
    CHECK_THROWS_AS(BdmReference(0), std::invalid_argument);
}

TEST_CASE("reference shape functions are dual to the degrees of freedom")
{
    for (int p = 1; p <= 4; ++p) {
        const BdmReference ref(p);
        for (int i = 0; i < ref.dim(); ++i) {
            const Eigen::VectorXd d = ref.dofs([&](const Vec2& x) -> Vec2 { return ref.values(x).row(i).transpose(); });
            Eigen::VectorXd e = Eigen::VectorXd::Zero(ref.dim());
            e(i) = 1.0;
            CHECK((d - e).cwiseAbs().maxCoeff() <= 1e-11);
        }
    }
}

TEST_CASE("interpolation reproduces full vector polynomials of degree p")
{
    const TriMesh mesh = test_mesh();
    std::mt19937 gen(42);
    for (int p = 1; p <= 3; ++p) {
        const BdmSpace space(mesh, p);
        SUBCASE("constant field")
        {
            const Eigen::VectorXd c = space.interpolate([](const Vec2&) { return Vec2(1.0, 0.0); });
            for (int k = 0; k < mesh.num_triangles(); ++k)
                for (const auto& v : space.eval_flux(c, k, {Vec2(0.2, 0.3), Vec2(0.6, 0.1), Vec2(0, 1)}))
                    CHECK((v - Vec2(1.0, 0.0)).norm() <= 1e-12);
        }
        SUBCASE("zero coefficients")
        {
            const Eigen::VectorXd c = Eigen::VectorXd::Zero(space.num_dofs());
            for (const auto& v : space.eval_flux(c, 0, {Vec2(0.2, 0.3)})) CHECK(v.norm() == 0.0);
        }
        SUBCASE("random degree-p field")
        {
            const PolyField q = random_field(p, gen);
            const Eigen::VectorXd c = space.interpolate(q);
            const QuadRule r = quad_rule(6, QuadRule::Variant::Triangle);
            double err = 0.0;
            for (int k = 0; k < mesh.num_triangles(); ++k) {
                const auto vals = space.eval_flux(c, k, r.points);
                for (std::size_t i = 0; i < vals.size(); ++i)
                    err = std::max(err, (vals[i] - q(mesh.map(k).to_physical(r.points[i]))).norm());
            }
            CHECK(err <= 1e-10);
        }
    }
}

TEST_CASE("normal traces are single valued across interior edges")
{
    const TriMesh mesh = test_mesh();
    std::mt19937 gen(9);
    std::normal_distribution<double> n01;
    for (int p = 1; p <= 3; ++p) {
        const BdmSpace space(mesh, p);
        Eigen::VectorXd c(space.num_dofs());
        for (int i = 0; i < c.size(); ++i) c(i) = n01(gen);
        const QuadRule er = quad_rule(2 * p + 2, QuadRule::Variant::Edge);
        double worst = 0.0;
        for (int e = 0; e < mesh.num_edges(); ++e) {
            if (mesh.edge(e).boundary) continue;
            const JumpPair jp = jump_trace_pairs(mesh, e);
            const Vec2 n = mesh.edge_normal(e);
            const Vec2 a = mesh.vertices()[mesh.edge(e).v[0]], b = mesh.vertices()[mesh.edge(e).v[1]];
            for (const auto& s : er.points) {
                const Vec2 x = a + s.x() * (b - a);
                const Vec2 vp = space.eval_flux(c, jp.plus, {mesh.map(jp.plus).to_reference(x)})[0];
                const Vec2 vm = space.eval_flux(c, jp.minus, {mesh.map(jp.minus).to_reference(x)})[0];
                worst = std::max(worst, std::abs((vp - vm).dot(n)));
            }
        }
        CHECK(worst <= 1e-11);
    }
}

TEST_CASE("divergence of shape functions has degree p-1")
{
    for (int p = 1; p <= 3; ++p) {
        const BdmReference ref(p);
        const QuadRule r = quad_rule(2 * p + 4, QuadRule::Variant::Triangle);
        const ScalarBasis low(p - 1, false);
        // Project onto degree p-1 and check nothing is left.
        Eigen::MatrixXd proj = Eigen::MatrixXd::Zero(low.size(), ref.dim());
        for (std::size_t q = 0; q < r.size(); ++q)
            proj += r.weights[q] * low.values(r.points[q]) * ref.divergence(r.points[q]).transpose();
        for (std::size_t q = 0; q < r.size(); ++q) {
            const Eigen::VectorXd rec = proj.transpose() * low.values(r.points[q]);
            CHECK((rec - ref.divergence(r.points[q])).cwiseAbs().maxCoeff() <= 1e-10);
        }
    }
}

TEST_CASE("divergence matrix")
{
    const TriMesh mesh = test_mesh();
    CHECK_THROWS_AS(divergence_matrix(BdmSpace(mesh, 2), DgSpace(mesh, 2)), std::invalid_argument);

    SUBCASE("divergence-free fields map to zero")
    {
        for (int p = 1; p <= 3; ++p) {
            const BdmSpace space(mesh, p);
            const SparseMatrix B = divergence_matrix(space, DgSpace(mesh, p - 1));
            const Eigen::VectorXd c = space.interpolate([](const Vec2& x) { return Vec2(x.y() * x.y(), 2.0 - x.x()); });
            CHECK((B * c).cwiseAbs().maxCoeff() <= 1e-12);
            // Columns of divergence-free basis functions vanish identically.
            const Eigen::MatrixXd Bd = Eigen::MatrixXd(B);
            for (int j = 0; j < Bd.cols(); ++j)
                if (Bd.col(j).norm() < 1e-12) CHECK(Bd.col(j).norm() == doctest::Approx(0.0));
        }
    }
    SUBCASE("p=1 on the reference element: row sums are net normal fluxes")
    {
        const TriMesh one({Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}, {Triangle{{0, 1, 2}}});
        const BdmSpace space(one, 1);
        const Eigen::MatrixXd B = Eigen::MatrixXd(divergence_matrix(space, DgSpace(one, 0)));
        const QuadRule er = quad_rule(4, QuadRule::Variant::Edge);
        const double psi0 = ScalarBasis(0, false).values(Vec2(0, 0))(0);
        for (int j = 0; j < space.num_dofs(); ++j) {
            double flux = 0.0;
            for (int i = 0; i < 3; ++i) {
                const auto [a, b] = TriMesh::reference_edge(i);
                for (std::size_t q = 0; q < er.size(); ++q) {
                    const Vec2 x = a + er.points[q].x() * (b - a);
                    flux += er.weights[q] * (b - a).norm() * space.element_values(0, x).row(j).dot(one.outward_normal(0, i));
                }
            }
            // (div phi_j, 1) = (div phi_j, psi0) / psi0
            CHECK(B(0, space.local_dofs(0)[j]) / psi0 == doctest::Approx(flux).epsilon(1e-12));
        }
    }
    SUBCASE("total divergence equals boundary flux for random coefficients")
    {
        std::mt19937 gen(1);
        std::normal_distribution<double> n01;
        for (int p = 1; p <= 3; ++p) {
            const BdmSpace space(mesh, p);
            const DgSpace dg(mesh, p - 1);
            const SparseMatrix B = divergence_matrix(space, dg);
            Eigen::VectorXd c(space.num_dofs());
            for (int i = 0; i < c.size(); ++i) c(i) = n01(gen);
            const Eigen::VectorXd Bc = B * c;
            const double psi0 = ScalarBasis(0, false).values(Vec2(0, 0))(0);
            double total = 0.0;
            for (int k = 0; k < mesh.num_triangles(); ++k) total += Bc(dg.offset(k)) / psi0;
            // Edge-quadrature flux oracle over the boundary.
            const QuadRule er = quad_rule(2 * p, QuadRule::Variant::Edge);
            double flux = 0.0;
            for (int e = 0; e < mesh.num_edges(); ++e) {
                const auto& E = mesh.edge(e);
                if (!E.boundary) continue;
                const int k = E.tri[0];
                const Vec2 a = mesh.vertices()[E.v[0]], b = mesh.vertices()[E.v[1]];
                const Vec2 n = mesh.outward_normal(k, E.local[0]);
                for (std::size_t q = 0; q < er.size(); ++q) {
                    const Vec2 x = a + er.points[q].x() * (b - a);
                    flux += er.weights[q] * (b - a).norm() * space.eval_flux(c, k, {mesh.map(k).to_reference(x)})[0].dot(n);
                }
            }
            CHECK(std::abs(total - flux) <= 1e-11 * std::max(1.0, std::abs(flux)));
        }
    }
}

TEST_CASE("boundary load vector")
{
    const TriMesh two = build_initial_mesh(DomainSpec::unit_square(), 2);
    const BdmSpace space(two, 1);
    CHECK(interpolate_boundary_term(space, [](const Vec2&) { return 0.0; }, 10).norm() == 0.0);
    const Eigen::VectorXd g = interpolate_boundary_term(space, [](const Vec2&) { return 1.0; }, 10);
    // Per-edge moment oracle: the k=0 edge DOF is the net flux through its edge.
    for (int e = 0; e < two.num_edges(); ++e) {
        const auto& E = two.edge(e);
        for (int k = 0; k < 2; ++k) {
            double expected = 0.0;
            if (E.boundary && k == 0) expected = -static_cast<double>(two.tri_edge_sign(E.tri[0], E.local[0]));
            CHECK(g(2 * e + k) == doctest::Approx(expected).epsilon(1e-13));
        }
    }
}

TEST_CASE("commuting diagram: div of the interpolant is the projected divergence")
{
    const TriMesh mesh = test_mesh();
    std::mt19937 gen(77);
    for (int p = 1; p <= 3; ++p) {
        const BdmSpace space(mesh, p);
        const PolyField q = random_field(p + 2, gen);
        const Eigen::VectorXd c = space.interpolate(q);
        const QuadRule r = quad_rule(2 * p + 6, QuadRule::Variant::Triangle);
        double err = 0.0;
        for (int k = 0; k < mesh.num_triangles(); ++k) {
            const AffineMap F = mesh.map(k);
            const Eigen::VectorXd proj = project_L2([&](const Vec2& x) { return q.div(x); }, F, p - 1, r);
            const Eigen::VectorXd loc = space.local_coefficients(c, k);
            for (const auto& x : r.points)
                err = std::max(err, std::abs(space.element_divergence(k, x).dot(loc) - eval_scalar(proj, x)));
        }
        CHECK(err <= 1e-10);
    }
}

TEST_CASE("flipping an edge orientation only flips signs of its DOFs")
{
    const TriMesh mesh = test_mesh();
    for (int p = 1; p <= 3; ++p) {
        std::vector<char> flipped(mesh.num_edges(), 0);
        int target = -1;
        for (int e = 0; e < mesh.num_edges() && target < 0; ++e)
            if (!mesh.edge(e).boundary) target = e;
        flipped[target] = 1;
        const BdmSpace a(mesh, p), b(mesh, p, flipped);
        Eigen::VectorXd s = Eigen::VectorXd::Ones(a.num_dofs());
        for (int k = 0; k <= p; ++k) s(target * (p + 1) + k) = (k % 2 == 0) ? -1.0 : 1.0;
        const Eigen::MatrixXd Ma(bdm_mass_matrix(a)), Mb(bdm_mass_matrix(b));
        CHECK((s.asDiagonal() * Ma * s.asDiagonal() - Mb).cwiseAbs().maxCoeff() <= 1e-13);
        const DgSpace dg(mesh, p - 1);
        const Eigen::MatrixXd Ba(divergence_matrix(a, dg)), Bb(divergence_matrix(b, dg));
        CHECK((Ba * s.asDiagonal() - Bb).cwiseAbs().maxCoeff() <= 1e-13);
    }
}
