#include "resmin/bdm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace resmin {

namespace {

// Vector polynomial basis built from the orthonormal scalar basis:
// row 2j is (psi_j, 0), row 2j+1 is (0, psi_j).
Eigen::MatrixXd vector_monomials(const Vec2& x, int p)
{
    const Eigen::VectorXd psi = ScalarBasis(p, false).values(x);
    const int n = static_cast<int>(psi.size());
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(2 * n, 2);
    for (int j = 0; j < n; ++j) {
        v(2 * j, 0) = psi(j);
        v(2 * j + 1, 1) = psi(j);
    }
    return v;
}

Eigen::VectorXd vector_monomial_divergence(const Vec2& x, int p)
{
    const Eigen::MatrixXd g = ScalarBasis(p, false).gradients(x);
    const int n = static_cast<int>(g.rows());
    Eigen::VectorXd d(2 * n);
    for (int j = 0; j < n; ++j) {
        d(2 * j) = g(j, 0);
        d(2 * j + 1) = g(j, 1);
    }
    return d;
}

// curl(b m) = (d_y(b m), -d_x(b m)) with b = (1-s-t) s t.
Vec2 curl_bubble_monomial(const Vec2& x, int a, int c)
{
    const double s = x.x(), t = x.y();
    const double b = (1.0 - s - t) * s * t;
    const double bs = t * (1.0 - 2.0 * s - t);
    const double bt = s * (1.0 - s - 2.0 * t);
    const double m = std::pow(s, a) * std::pow(t, c);
    const double ms = a == 0 ? 0.0 : a * std::pow(s, a - 1) * std::pow(t, c);
    const double mt = c == 0 ? 0.0 : c * std::pow(s, a) * std::pow(t, c - 1);
    return Vec2(bt * m + b * mt, -(bs * m + b * ms));
}

} // namespace

double shifted_legendre(int k, double s)
{
    const double x = 2.0 * s - 1.0;
    double p0 = 1.0, p1 = x;
    if (k == 0) return p0;
    for (int n = 1; n < k; ++n) {
        const double p2 = ((2.0 * n + 1.0) * x * p1 - n * p0) / (n + 1.0);
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

BdmReference::BdmReference(int p) : p_(p)
{
    if (p < 1 || 2 * p + 10 > kMaxQuadratureDegree || p > kMaxBasisDegree - 1)
        throw std::invalid_argument("BdmReference: unsupported degree " + std::to_string(p));
    const int n = dim();
    Eigen::MatrixXd D(n, n);
    for (int j = 0; j < n; ++j) {
        D.col(j) = dofs([&](const Vec2& x) -> Vec2 { return vector_monomials(x, p_).row(j).transpose(); });
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(D);
    if (!lu.isInvertible()) throw std::logic_error("BdmReference: degrees of freedom are not unisolvent");
    coeffs_ = lu.inverse().transpose();
}

Eigen::MatrixXd BdmReference::values(const Vec2& ref) const { return coeffs_ * vector_monomials(ref, p_); }

Eigen::VectorXd BdmReference::divergence(const Vec2& ref) const
{
    return coeffs_ * vector_monomial_divergence(ref, p_);
}

Eigen::VectorXd BdmReference::dofs(const std::function<Vec2(const Vec2&)>& field) const
{
    static thread_local std::vector<QuadRule> edge_rules, tri_rules;
    const int ex = 2 * p_ + 10;
    if (static_cast<int>(edge_rules.size()) <= ex) {
        edge_rules.resize(ex + 1);
        tri_rules.resize(ex + 1);
    }
    if (edge_rules[ex].size() == 0) {
        edge_rules[ex] = quad_rule(ex, QuadRule::Variant::Edge);
        tri_rules[ex] = quad_rule(ex, QuadRule::Variant::Triangle);
    }
    const QuadRule& er = edge_rules[ex];
    const QuadRule& tr = tri_rules[ex];

    Eigen::VectorXd d = Eigen::VectorXd::Zero(dim());
    int row = 0;
    for (int i = 0; i < 3; ++i) {
        const auto [a, b] = TriMesh::reference_edge(i);
        const Vec2 t = b - a;
        const Vec2 nu(t.y(), -t.x());
        for (int k = 0; k <= p_; ++k, ++row) {
            for (std::size_t q = 0; q < er.size(); ++q) {
                const double s = er.points[q].x();
                d(row) += er.weights[q] * field(a + s * t).dot(nu) * shifted_legendre(k, s);
            }
        }
    }
    if (p_ >= 2) {
        const ScalarBasis grad_basis(p_ - 1, true);
        const auto& e = basis_monomial_exponents();
        const int ncurl = scalar_dim(p_ - 2);
        for (std::size_t q = 0; q < tr.size(); ++q) {
            const Vec2 x = tr.points[q];
            const Vec2 f = field(x);
            const Eigen::MatrixXd g = grad_basis.gradients(x);
            for (int j = 0; j < grad_basis.size(); ++j) d(row + j) += tr.weights[q] * f.dot(g.row(j).transpose());
            for (int j = 0; j < ncurl; ++j)
                d(row + grad_basis.size() + j) += tr.weights[q] * f.dot(curl_bubble_monomial(x, e[j][0], e[j][1]));
        }
    }
    return d;
}

BdmSpace::BdmSpace(const TriMesh& mesh, int p, std::vector<char> flipped) : mesh_(&mesh), ref_(p)
{
    if (!flipped.empty() && static_cast<int>(flipped.size()) != mesh.num_edges())
        throw std::invalid_argument("BdmSpace: flipped-edge mask has wrong size");
    const int ne = ref_.edge_dofs(), ni = ref_.interior_dofs();
    num_dofs_ = mesh.num_edges() * ne + mesh.num_triangles() * ni;
    dofs_.resize(mesh.num_triangles());
    signs_.resize(mesh.num_triangles());
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        auto& d = dofs_[k];
        auto& s = signs_[k];
        d.reserve(ref_.dim());
        s.reserve(ref_.dim());
        for (int i = 0; i < 3; ++i) {
            const int e = mesh.tri_edge(k, i);
            int sigma = mesh.tri_edge_sign(k, i);
            if (!flipped.empty() && flipped[e]) sigma = -sigma;
            for (int m = 0; m < ne; ++m) {
                d.push_back(e * ne + m);
                // Reversing the edge flips the normal and maps L_m(s) to (-1)^m L_m(s).
                s.push_back((sigma > 0 || m % 2 == 1) ? 1.0 : -1.0);
            }
        }
        for (int j = 0; j < ni; ++j) {
            d.push_back(mesh.num_edges() * ne + k * ni + j);
            s.push_back(1.0);
        }
    }
}

Eigen::MatrixXd BdmSpace::element_values(int k, const Vec2& ref) const
{
    if (k < 0 || k >= mesh_->num_triangles()) throw std::out_of_range("BdmSpace: element id out of range");
    const AffineMap F = mesh_->map(k);
    Eigen::MatrixXd v = ref_.values(ref) * F.jac.transpose() / F.det;
    for (int i = 0; i < local_dim(); ++i) v.row(i) *= signs_[k][i];
    return v;
}

Eigen::VectorXd BdmSpace::element_divergence(int k, const Vec2& ref) const
{
    if (k < 0 || k >= mesh_->num_triangles()) throw std::out_of_range("BdmSpace: element id out of range");
    const AffineMap F = mesh_->map(k);
    Eigen::VectorXd d = ref_.divergence(ref) / F.det;
    for (int i = 0; i < local_dim(); ++i) d(i) *= signs_[k][i];
    return d;
}

Eigen::VectorXd BdmSpace::local_coefficients(const Eigen::VectorXd& coeffs, int k) const
{
    if (coeffs.size() != num_dofs_) throw std::invalid_argument("BdmSpace: coefficient vector has wrong size");
    Eigen::VectorXd c(local_dim());
    for (int i = 0; i < local_dim(); ++i) c(i) = coeffs(dofs_.at(k)[i]);
    return c;
}

std::vector<Vec2> BdmSpace::eval_flux(const Eigen::VectorXd& coeffs, int k, const std::vector<Vec2>& ref_points) const
{
    const Eigen::VectorXd c = local_coefficients(coeffs, k);
    std::vector<Vec2> out;
    out.reserve(ref_points.size());
    for (const auto& x : ref_points) out.push_back(element_values(k, x).transpose() * c);
    return out;
}

Eigen::VectorXd BdmSpace::interpolate(const VectorField& q) const
{
    Eigen::VectorXd out = Eigen::VectorXd::Zero(num_dofs_);
    for (int k = 0; k < mesh_->num_triangles(); ++k) {
        const AffineMap F = mesh_->map(k);
        const Eigen::Matrix2d Jinv = F.jac.inverse();
        // Contravariant pull-back: q_ref = det J J^{-1} q o F.
        const Eigen::VectorXd local =
            ref_.dofs([&](const Vec2& x) -> Vec2 { return F.det * (Jinv * q(F.to_physical(x))); });
        for (int i = 0; i < local_dim(); ++i) out(dofs_[k][i]) = signs_[k][i] * local(i);
    }
    return out;
}

SparseMatrix DgSpace::mass_matrix() const
{
    std::vector<Eigen::Triplet<double>> t;
    const int n = local_dim();
    for (int k = 0; k < mesh_->num_triangles(); ++k)
        for (int i = 0; i < n; ++i) t.emplace_back(offset(k) + i, offset(k) + i, 2.0 * mesh_->area(k));
    SparseMatrix m(num_dofs(), num_dofs());
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

SparseMatrix divergence_matrix(const BdmSpace& space, const DgSpace& target)
{
    const int p = space.degree();
    if (target.degree() != p - 1)
        throw std::invalid_argument("divergence_matrix: target degree " + std::to_string(target.degree()) +
                                    " must equal p-1 = " + std::to_string(p - 1));
    const QuadRule rule = quad_rule(2 * p, QuadRule::Variant::Triangle);
    const ScalarBasis test(p - 1, false);
    // Geometry-independent local block: det J cancels between div and dx.
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(test.size(), space.local_dim());
    for (std::size_t q = 0; q < rule.size(); ++q)
        local += rule.weights[q] * test.values(rule.points[q]) *
                 space.reference().divergence(rule.points[q]).transpose();

    const TriMesh& mesh = space.mesh();
    std::vector<Eigen::Triplet<double>> t;
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const auto& dofs = space.local_dofs(k);
        const auto& signs = space.local_signs(k);
        for (int j = 0; j < space.local_dim(); ++j)
            for (int i = 0; i < test.size(); ++i)
                if (local(i, j) != 0.0) t.emplace_back(target.offset(k) + i, dofs[j], signs[j] * local(i, j));
    }
    SparseMatrix B(target.num_dofs(), space.num_dofs());
    B.setFromTriplets(t.begin(), t.end());
    return B;
}

SparseMatrix bdm_mass_matrix(const BdmSpace& space)
{
    const int p = space.degree();
    const QuadRule rule = quad_rule(2 * (p + 2), QuadRule::Variant::Triangle);
    std::vector<Eigen::MatrixXd> tab;
    for (const auto& x : rule.points) tab.push_back(space.reference().values(x));

    const TriMesh& mesh = space.mesh();
    const int n = space.local_dim();
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(mesh.num_triangles()) * n * n);
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const AffineMap F = mesh.map(k);
        const Eigen::Matrix2d G = F.jac.transpose() * F.jac / F.det; // |det| / det^2 = 1/det
        Eigen::MatrixXd local = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t q = 0; q < rule.size(); ++q) local += rule.weights[q] * tab[q] * G * tab[q].transpose();
        const auto& dofs = space.local_dofs(k);
        const auto& signs = space.local_signs(k);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) t.emplace_back(dofs[i], dofs[j], signs[i] * signs[j] * local(i, j));
    }
    SparseMatrix M(space.num_dofs(), space.num_dofs());
    M.setFromTriplets(t.begin(), t.end());
    return M;
}

Eigen::VectorXd interpolate_boundary_term(const BdmSpace& space, const ScalarField& u_D, int edge_exactness)
{
    const QuadRule rule = quad_rule(edge_exactness, QuadRule::Variant::Edge);
    const TriMesh& mesh = space.mesh();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(space.num_dofs());
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const auto& E = mesh.edge(e);
        if (!E.boundary) continue;
        const int k = E.tri[0], i = E.local[0];
        const AffineMap F = mesh.map(k);
        const auto [a, b] = TriMesh::reference_edge(i);
        const Vec2 t = b - a;
        const Vec2 nu(t.y(), -t.x());
        const auto& dofs = space.local_dofs(k);
        const auto& signs = space.local_signs(k);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Vec2 x = a + rule.points[q].x() * t;
            const double ud = u_D(F.to_physical(x));
            // (phi . n) ds maps to (phi_ref . nu_ref) ds_ref under Piola.
            const Eigen::VectorXd flux = space.reference().values(x) * nu;
            for (int j = 0; j < space.local_dim(); ++j) g(dofs[j]) -= rule.weights[q] * ud * signs[j] * flux(j);
        }
    }
    return g;
}

} // namespace resmin
