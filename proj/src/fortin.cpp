#include "resmin/fortin.hpp"

#include "resmin/bdm.hpp"
#include "resmin/postprocess.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace resmin {

namespace {

const AffineMap& reference_map() {
    static const AffineMap map(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1));
    return map;
}

const QuadRule& edge_rule_cached(int exactness) {
    static thread_local std::vector<QuadRule> cache(kMaxQuadratureDegree + 1);
    QuadRule& r = cache.at(exactness);
    if (r.size() == 0) r = quad_rule(exactness, QuadRule::Variant::Edge);
    return r;
}

Vec2 face_start(int face) { return face == 1 ? Vec2(1, 0) : Vec2(0, 0); }
Vec2 face_end(int face) { return face == 0 ? Vec2(1, 0) : Vec2(0, 1); }

double psi_value(const BiorthogonalSet& set, int j, const Vec2& ref) {
    return eval_scalar(set.psi_coeffs.col(j), ref);
}

} // namespace

Vec2 reference_face_point(int face, double s) {
    return (1.0 - s) * face_start(face) + s * face_end(face);
}

double reference_face_length(int face) { return face == 1 ? std::numbers::sqrt2 : 1.0; }

std::array<double, 2> face_endpoint_barycentrics(int face, const Vec2& ref) {
    const double l0 = 1.0 - ref.x() - ref.y();
    switch (face) {
    case 0: return {l0, ref.x()};
    case 1: return {ref.x(), ref.y()};
    case 2: return {l0, ref.y()};
    default: throw std::out_of_range("face index must be 0, 1 or 2");
    }
}

std::array<double, 3> face_cubics(int face, const Vec2& ref) {
    const auto [la, lb] = face_endpoint_barycentrics(face, ref);
    return {la * lb, la * la * lb, la * lb * lb};
}

double reference_trace_function(int i, double s) {
    const int face = i / 2, a = i % 2;
    return (2 * a + 1) * shifted_legendre(a, s) / reference_face_length(face);
}

double face_length(const AffineMap& map, int face) {
    return (map.jac * (face_end(face) - face_start(face))).norm();
}

double boundary_length(const AffineMap& map) {
    return face_length(map, 0) + face_length(map, 1) + face_length(map, 2);
}

double xi_scale(const AffineMap& map) {
    return boundary_length(map) / (2.0 + std::numbers::sqrt2);
}

double trace_function(int i, double s, const AffineMap& map) {
    const int face = i / 2, a = i % 2;
    return xi_scale(map) * (2 * a + 1) * shifted_legendre(a, s) / face_length(map, face);
}

BiorthogonalSet build_biorthogonal(int p) {
    if (p != 1) throw std::invalid_argument("biorthogonal construction is only available for degree 1");
    BiorthogonalSet set;
    const QuadRule& er = edge_rule_cached(8);
    const QuadRule tr = quad_rule(8, QuadRule::Variant::Triangle);

    // Face 0 of the reference element; the normalised trace functions make
    // the same matrix valid for every face.
    set.A.setZero();
    for (std::size_t q = 0; q < er.size(); ++q) {
        const double s = er.points[q].x();
        const auto g = face_cubics(0, reference_face_point(0, s));
        for (int a = 0; a < 2; ++a)
            for (int j = 0; j < 3; ++j)
                set.A(a, j) += er.weights[q] * reference_face_length(0) * reference_trace_function(a, s) * g[j];
    }
    for (std::size_t q = 0; q < tr.size(); ++q) {
        const auto g = face_cubics(0, tr.points[q]);
        for (int j = 0; j < 3; ++j) set.A(2, j) += tr.weights[q] * g[j];
    }
    set.det_A = set.A.determinant();
    const double scale = set.A.cwiseAbs().maxCoeff();
    if (!(std::abs(set.det_A) > 1e-12 * scale * scale * scale))
        throw std::runtime_error("biorthogonal construction: matrix A is singular");
    const Eigen::PartialPivLU<Eigen::Matrix3d> lu(set.A);
    set.beta = lu.solve(Eigen::Vector3d::UnitX());
    set.gamma = lu.solve(Eigen::Vector3d::UnitY());

    // psi_{2f} = sum beta_j g_j^f, psi_{2f+1} = sum gamma_j g_j^f.
    set.psi_coeffs.resize(scalar_dim(3), 6);
    const QuadRule proj_rule = quad_rule(8, QuadRule::Variant::Triangle);
    for (int face = 0; face < 3; ++face) {
        for (int a = 0; a < 2; ++a) {
            const Eigen::Vector3d c = a == 0 ? set.beta : set.gamma;
            const ScalarField psi = [face, c](const Vec2& x) {
                const auto g = face_cubics(face, x);
                return c[0] * g[0] + c[1] * g[1] + c[2] * g[2];
            };
            set.psi_coeffs.col(2 * face + a) = project_L2(psi, reference_map(), 3, proj_rule);
        }
    }

    set.reference_pairing = physical_pairing(set, reference_map());
    const double tol = 1e-12;
    if ((set.reference_pairing - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() > tol)
        throw std::runtime_error("biorthogonal construction: pairing is not the identity");

    for (int j = 0; j < 6; ++j) {
        // The constant basis function is sqrt(2) on an element of area 1/2.
        set.max_mean = std::max(set.max_mean, std::abs(set.psi_coeffs(0, j)) * std::numbers::sqrt2 * 0.5);
        for (int face = 0; face < 3; ++face) {
            if (face == j / 2) continue;
            for (int k = 0; k <= 10; ++k)
                set.max_off_face = std::max(set.max_off_face,
                                            std::abs(psi_value(set, j, reference_face_point(face, k / 10.0))));
        }
    }
    if (set.max_mean > tol || set.max_off_face > tol)
        throw std::runtime_error("biorthogonal construction: zero-mean or face support invariant violated");
    return set;
}

Eigen::Matrix<double, 6, 1> trace_moments(const BoundaryField& v, const AffineMap& map, int exactness) {
    const QuadRule& er = edge_rule_cached(exactness);
    Eigen::Matrix<double, 6, 1> m = Eigen::Matrix<double, 6, 1>::Zero();
    for (int face = 0; face < 3; ++face) {
        const double len = face_length(map, face);
        for (std::size_t q = 0; q < er.size(); ++q) {
            const double s = er.points[q].x();
            const double w = er.weights[q] * len * v(face, s);
            for (int a = 0; a < 2; ++a) m[2 * face + a] += w * trace_function(2 * face + a, s, map);
        }
    }
    return m;
}

FortinTrace fortin_apply(const BoundaryField& v, const BiorthogonalSet& set, const AffineMap& map, int exactness) {
    FortinTrace out;
    out.alpha = trace_moments(v, map, exactness) / xi_scale(map);
    out.coeffs = set.psi_coeffs * out.alpha;
    return out;
}

double boundary_inner(const BoundaryField& f, const BoundaryField& g, const AffineMap& map, int exactness) {
    const QuadRule& er = edge_rule_cached(exactness);
    double sum = 0.0;
    for (int face = 0; face < 3; ++face) {
        const double len = face_length(map, face);
        for (std::size_t q = 0; q < er.size(); ++q) {
            const double s = er.points[q].x();
            sum += er.weights[q] * len * f(face, s) * g(face, s);
        }
    }
    return sum;
}

BoundaryField polynomial_trace(const Eigen::VectorXd& coeffs) {
    return [coeffs](int face, double s) { return eval_scalar(coeffs, reference_face_point(face, s)); };
}

Eigen::MatrixXd physical_pairing(const BiorthogonalSet& set, const AffineMap& map) {
    Eigen::MatrixXd P(6, 6);
    for (int j = 0; j < 6; ++j) {
        const auto m = trace_moments(polynomial_trace(set.psi_coeffs.col(j)), map, 8);
        P.col(j) = m;
    }
    return P;
}

double fortin_operator_norm(const BiorthogonalSet& set, const AffineMap& map) {
    // Pi only sees the projection of v onto span{phi}, so the supremum is
    // attained there: max c^T G H G c / (xi^2 c^T G c).
    Eigen::Matrix<double, 6, 6> G, H;
    for (int i = 0; i < 6; ++i)
        for (int k = 0; k < 6; ++k) {
            G(i, k) = boundary_inner([&](int f, double s) { return f == i / 2 ? trace_function(i, s, map) : 0.0; },
                                     [&](int f, double s) { return f == k / 2 ? trace_function(k, s, map) : 0.0; },
                                     map, 4);
            H(i, k) = boundary_inner(polynomial_trace(set.psi_coeffs.col(i)),
                                     polynomial_trace(set.psi_coeffs.col(k)), map, 8);
        }
    const double xi = xi_scale(map);
    const Eigen::Matrix<double, 6, 6> num = G * H * G / (xi * xi);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> es(num, G);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double psi_norm_ratio(const BiorthogonalSet& set, const AffineMap& map) {
    double best = 0.0;
    for (int j = 0; j < 6; ++j) {
        const auto t = polynomial_trace(set.psi_coeffs.col(j));
        best = std::max(best, std::sqrt(boundary_inner(t, t, map, 8)));
    }
    return best / std::sqrt(xi_scale(map));
}

AffineMap random_shape_regular_triangle(std::mt19937_64& rng, double min_angle_deg) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double min_angle = min_angle_deg * std::numbers::pi / 180.0;
    for (int attempt = 0; attempt < 100000; ++attempt) {
        std::array<Vec2, 3> v{Vec2(U(rng), U(rng)), Vec2(U(rng), U(rng)), Vec2(U(rng), U(rng))};
        double smallest = std::numbers::pi;
        for (int i = 0; i < 3; ++i) {
            const Vec2 e1 = v[(i + 1) % 3] - v[i], e2 = v[(i + 2) % 3] - v[i];
            const double n = e1.norm() * e2.norm();
            if (n < 1e-12) { smallest = 0; break; }
            smallest = std::min(smallest, std::acos(std::clamp(e1.dot(e2) / n, -1.0, 1.0)));
        }
        if (smallest >= min_angle) return AffineMap(v[0], v[1], v[2]);
    }
    throw std::runtime_error("could not sample a shape-regular triangle");
}

double diameter(const AffineMap& map) {
    return std::max({face_length(map, 0), face_length(map, 1), face_length(map, 2)});
}

Eigen::MatrixXd boundary_mass_zero_mean(int degree, const AffineMap& map) {
    const ScalarBasis basis(degree, true);
    const QuadRule& er = edge_rule_cached(2 * degree);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(basis.size(), basis.size());
    for (int face = 0; face < 3; ++face) {
        const double len = face_length(map, face);
        for (std::size_t q = 0; q < er.size(); ++q) {
            const Eigen::VectorXd phi = basis.values(reference_face_point(face, er.points[q].x()));
            M.noalias() += er.weights[q] * len * phi * phi.transpose();
        }
    }
    return M;
}

TraceConstant scaled_trace_constant(int p, const AffineMap& map) {
    if (p < 1 || p > 3) throw std::invalid_argument("trace constant: degree must be 1, 2 or 3");
    const int d = p + 2;
    const Eigen::MatrixXd A = ZeroMeanStiffness(d).matrix(map);
    const Eigen::MatrixXd M = boundary_mass_zero_mean(d, map);

    // Split coordinates into trace kernel N and its Euclidean complement R,
    // then eliminate N by energy minimisation (discrete harmonic extension).
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    const Eigen::VectorXd lam = es.eigenvalues();
    const double cut = 1e-10 * lam.maxCoeff();
    std::vector<int> ker, rng_idx;
    for (int i = 0; i < lam.size(); ++i) (lam[i] <= cut ? ker : rng_idx).push_back(i);
    const int n = static_cast<int>(lam.size());
    Eigen::MatrixXd Q(n, n);
    for (std::size_t i = 0; i < rng_idx.size(); ++i) Q.col(i) = es.eigenvectors().col(rng_idx[i]);
    for (std::size_t i = 0; i < ker.size(); ++i) Q.col(rng_idx.size() + i) = es.eigenvectors().col(ker[i]);
    const int r = static_cast<int>(rng_idx.size()), k = static_cast<int>(ker.size());
    const Eigen::MatrixXd Ah = Q.transpose() * A * Q;
    Eigen::MatrixXd S = Ah.topLeftCorner(r, r);
    if (k > 0)
        S -= Ah.topRightCorner(r, k) * Ah.bottomRightCorner(k, k).llt().solve(Ah.bottomLeftCorner(k, r));
    Eigen::VectorXd Mr(r);
    for (int i = 0; i < r; ++i) Mr[i] = lam[rng_idx[i]];
    const Eigen::VectorXd inv_sqrt = Mr.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd scaled = inv_sqrt.asDiagonal() * S * inv_sqrt.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ev(0.5 * (scaled + scaled.transpose()), Eigen::EigenvaluesOnly);

    TraceConstant out;
    out.kernel_dim = k;
    out.complement_dim = r;
    out.constant = std::sqrt(diameter(map) * std::max(0.0, ev.eigenvalues().maxCoeff()));
    return out;
}

} // namespace resmin

namespace resmin {

Vec2 face_outward_normal(const AffineMap& map, int face) {
    const Vec2 a = map.to_physical(reference_face_point(face, 0.0));
    const Vec2 b = map.to_physical(reference_face_point(face, 1.0));
    const Vec2 t = b - a;
    Vec2 n(t.y(), -t.x());
    n /= n.norm();
    const Vec2 centroid = map.to_physical(Vec2(1.0 / 3.0, 1.0 / 3.0));
    if (n.dot(0.5 * (a + b) - centroid) < 0) n = -n;
    return n;
}

double fortin_bdm1_orthogonality(const BdmSpace& space, const Eigen::VectorXd& q_h, const VectorField& q,
                                 const BiorthogonalSet& set, int k) {
    if (space.degree() != 1) throw std::invalid_argument("BDM orthogonality check needs a degree-1 space");
    const AffineMap map = space.mesh().map(k);
    std::array<Vec2, 3> normals;
    for (int f = 0; f < 3; ++f) normals[f] = face_outward_normal(map, f);

    const BoundaryField v = [&](int f, double s) {
        const Vec2 ref = reference_face_point(f, s);
        const Vec2 qh = space.eval_flux(q_h, k, {ref})[0];
        return (q(map.to_physical(ref)) - qh).dot(normals[f]);
    };
    constexpr int ex = 16;
    const FortinTrace pi = fortin_apply(v, set, map, ex);
    const BoundaryField pv = polynomial_trace(pi.coeffs);
    const BoundaryField diff = [&](int f, double s) { return v(f, s) - pv(f, s); };
    const double vnorm = std::sqrt(boundary_inner(v, v, map, ex));
    if (vnorm == 0.0) return 0.0;

    double worst = 0.0;
    for (int i = 0; i < space.local_dim(); ++i) {
        const BoundaryField pn = [&](int f, double s) {
            const Eigen::MatrixXd vals = space.element_values(k, reference_face_point(f, s));
            return Vec2(vals(i, 0), vals(i, 1)).dot(normals[f]);
        };
        const double pnorm = std::sqrt(boundary_inner(pn, pn, map, ex));
        worst = std::max(worst, std::abs(boundary_inner(pn, diff, map, ex)) / (pnorm * vnorm));
    }
    return worst;
}

} // namespace resmin
