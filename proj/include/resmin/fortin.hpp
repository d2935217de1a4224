#pragma once

#include "resmin/bdm.hpp"

#include <array>
#include <functional>
#include <random>

namespace resmin {

/// Reference triangle faces used by the boundary construction:
///   face 0: (s, 0)      from (0,0) to (1,0)
///   face 1: (1-s, s)    from (1,0) to (0,1)
///   face 2: (0, s)      from (0,0) to (0,1)
/// with s in [0,1]. Physical faces are the images under the affine map.
Vec2 reference_face_point(int face, double s);
double reference_face_length(int face);

/// Barycentric coordinates of the start and end vertex of a face, evaluated
/// at a reference point.
std::array<double, 2> face_endpoint_barycentrics(int face, const Vec2& ref);

/// Cubic generators on one face: l_a l_b, l_a^2 l_b, l_a l_b^2 where l_a, l_b
/// are the barycentrics of the face endpoints. They vanish on the other faces.
std::array<double, 3> face_cubics(int face, const Vec2& ref);

/// Biorthogonal edge system for lowest-order BDM normal traces.
///
/// The normal-trace functions on a face are the edge-moment duals
/// (2a+1) L_a(s) / |face|, a = 0, 1, so that on the reference element
/// int_face phi_a L_b = delta_ab. On a physical element the trace function of
/// face k is multiplied by xi_K |ref face k| / |face k|, which keeps the span
/// and makes the pairing equal xi_K delta_ij for every shape.
struct BiorthogonalSet {
    /// A with rows (int_F phi_1 g_j, int_F phi_2 g_j, int_K g_j); identical on
    /// every face after the normalisation above.
    Eigen::Matrix3d A;
    double det_A = 0.0;
    Eigen::Vector3d beta;
    Eigen::Vector3d gamma;
    /// 10 x 6: column j is psi_j in the full orthonormal cubic basis.
    Eigen::MatrixXd psi_coeffs;
    /// Reference biorthogonality matrix int_{dK} phi_i psi_j (6 x 6).
    Eigen::MatrixXd reference_pairing;
    /// Largest |int_K psi_j| on the reference element.
    double max_mean = 0.0;
    /// Largest |psi_j| on faces other than its own.
    double max_off_face = 0.0;
};

/// Assembles A by quadrature, solves for beta and gamma, and replicates by
/// symmetry. Throws std::runtime_error if A is singular or the invariants fail
/// (tolerance 1e-12). Only degree 1 is supported.
BiorthogonalSet build_biorthogonal(int p = 1);

/// Local index i = 2 * face + a.
double reference_trace_function(int i, double s);
/// Physical trace function phi_i^K at parameter s of face(i); includes the
/// per-face normalisation.
double trace_function(int i, double s, const AffineMap& map);

double boundary_length(const AffineMap& map);
/// xi_K = |dK| / |dK_ref|.
double xi_scale(const AffineMap& map);
double face_length(const AffineMap& map, int face);

/// Function on the boundary: (face, parameter s) -> value.
using BoundaryField = std::function<double(int face, double s)>;

/// int_{dK} phi_i^K v, i = 0..5.
Eigen::Matrix<double, 6, 1> trace_moments(const BoundaryField& v, const AffineMap& map, int exactness);

/// Pi v = sum_j alpha_j psi_j with alpha_j = int phi_j v / xi_K.
struct FortinTrace {
    Eigen::Matrix<double, 6, 1> alpha;
    Eigen::VectorXd coeffs; // full cubic basis coefficients of Pi v on K
};

FortinTrace fortin_apply(const BoundaryField& v, const BiorthogonalSet& set, const AffineMap& map,
                         int exactness = 12);

/// int_{dK} f g for two boundary fields.
double boundary_inner(const BoundaryField& f, const BoundaryField& g, const AffineMap& map, int exactness);
/// Boundary field of a scalar given by full-basis coefficients on K.
BoundaryField polynomial_trace(const Eigen::VectorXd& coeffs);

/// Physical pairing int_{dK} phi_i psi_j (6 x 6).
Eigen::MatrixXd physical_pairing(const BiorthogonalSet& set, const AffineMap& map);
/// Exact operator norm of Pi on L2(dK) for this element.
double fortin_operator_norm(const BiorthogonalSet& set, const AffineMap& map);
/// max_i ||psi_i||_{dK} / sqrt(xi_K).
double psi_norm_ratio(const BiorthogonalSet& set, const AffineMap& map);

/// Random triangle with vertices in the unit box and minimum angle at least
/// `min_angle_deg`.
AffineMap random_shape_regular_triangle(std::mt19937_64& rng, double min_angle_deg = 15.0);

/// max over the complement of the trace kernel (energy-orthogonal) in the
/// zero-mean space of degree p+2 of h_K^{1/2} ||grad v||_K / ||v||_{dK}.
struct TraceConstant {
    double constant = 0.0;
    int kernel_dim = 0;
    int complement_dim = 0;
};

/// Outward unit normal of reference-labelled face `face` on the mapped element.
Vec2 face_outward_normal(const AffineMap& map, int face);

/// For element k of a degree-1 BDM space and v = (q - q_h).n, returns
/// max_i |(p_i.n, v - Pi v)_{dK}| / (||p_i.n||_{dK} ||v||_{dK}) over the six
/// local shape functions p_i. Returns 0 when v vanishes.
double fortin_bdm1_orthogonality(const BdmSpace& space, const Eigen::VectorXd& q_h, const VectorField& q,
                                 const BiorthogonalSet& set, int k);

TraceConstant scaled_trace_constant(int p, const AffineMap& map);
double diameter(const AffineMap& map);
/// Boundary mass matrix of the zero-mean basis of the given degree.
Eigen::MatrixXd boundary_mass_zero_mean(int degree, const AffineMap& map);

} // namespace resmin
