#pragma once

#include "resmin/mesh.hpp"

#include <Eigen/Sparse>

#include <vector>

namespace resmin {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Reference BDM_p element on the unit triangle.
///
/// Degrees of freedom:
///  - edge i, k = 0..p: int_0^1 q(x(s)) . nu_i L_k(s) ds, where x(s) runs
///    along local edge i counter-clockwise, nu_i is the outward normal scaled
///    by the edge length and L_k the shifted Legendre polynomial;
///  - interior: int q . grad g for zero-mean g of degree p-1, and
///    int q . curl(b m) for the cubic bubble b and monomials m of degree p-2.
class BdmReference {
public:
    explicit BdmReference(int p);

    int degree() const { return p_; }
    int dim() const { return (p_ + 1) * (p_ + 2); }
    int edge_dofs() const { return p_ + 1; }
    int interior_dofs() const { return dim() - 3 * (p_ + 1); }

    /// dim() x 2 reference shape-function values.
    Eigen::MatrixXd values(const Vec2& ref) const;
    /// Reference divergences.
    Eigen::VectorXd divergence(const Vec2& ref) const;
    /// Degrees of freedom of a reference vector field.
    Eigen::VectorXd dofs(const std::function<Vec2(const Vec2&)>& field) const;

private:
    int p_;
    Eigen::MatrixXd coeffs_; // row i: shape function i in the vector monomial basis
};

/// Shifted Legendre polynomial P_k(2s-1).
double shifted_legendre(int k, double s);

/// Global H(div)-conforming BDM_p space on a mesh.
///
/// Edge DOFs are numbered edge * (p+1) + k and oriented along the global edge
/// direction (lower to higher vertex index, unless the edge is listed in
/// `flipped`). Interior DOFs follow all edge DOFs, element by element.
class BdmSpace {
public:
    BdmSpace(const TriMesh& mesh, int p, std::vector<char> flipped = {});

    const TriMesh& mesh() const { return *mesh_; }
    const BdmReference& reference() const { return ref_; }
    int degree() const { return ref_.degree(); }
    int local_dim() const { return ref_.dim(); }
    int num_dofs() const { return num_dofs_; }

    /// Global DOF ids and orientation signs of the local shape functions of k.
    const std::vector<int>& local_dofs(int k) const { return dofs_[k]; }
    const std::vector<double>& local_signs(int k) const { return signs_[k]; }

    /// Physical values (local_dim x 2) of the global basis functions
    /// restricted to element k, at a reference point (signs applied).
    Eigen::MatrixXd element_values(int k, const Vec2& ref) const;
    Eigen::VectorXd element_divergence(int k, const Vec2& ref) const;

    /// Field value of a global coefficient vector at reference points of k.
    std::vector<Vec2> eval_flux(const Eigen::VectorXd& coeffs, int k, const std::vector<Vec2>& ref_points) const;
    Eigen::VectorXd local_coefficients(const Eigen::VectorXd& coeffs, int k) const;

    /// Canonical BDM interpolant of a physical vector field.
    Eigen::VectorXd interpolate(const VectorField& q) const;

private:
    const TriMesh* mesh_;
    BdmReference ref_;
    int num_dofs_ = 0;
    std::vector<std::vector<int>> dofs_;
    std::vector<std::vector<double>> signs_;
};

/// Piecewise polynomials of degree k, no inter-element coupling.
class DgSpace {
public:
    DgSpace(const TriMesh& mesh, int k) : mesh_(&mesh), degree_(k) {}

    int degree() const { return degree_; }
    int local_dim() const { return scalar_dim(degree_); }
    int num_dofs() const { return local_dim() * mesh_->num_triangles(); }
    int offset(int element) const { return element * local_dim(); }
    const TriMesh& mesh() const { return *mesh_; }

    SparseMatrix mass_matrix() const;

private:
    const TriMesh* mesh_;
    int degree_;
};

/// B[i,j] = (div phi_j, psi_i); throws if target degree != p-1.
SparseMatrix divergence_matrix(const BdmSpace& space, const DgSpace& target);
SparseMatrix bdm_mass_matrix(const BdmSpace& space);
/// entry j = -int_{boundary} u_D (phi_j . n).
Eigen::VectorXd interpolate_boundary_term(const BdmSpace& space, const ScalarField& u_D, int edge_exactness);

} // namespace resmin
