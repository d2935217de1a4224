#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace resmin {

struct VerifyCheck {
    std::string name;
    bool passed = false;
    double value = 0.0;     // measured quantity (residual, ratio or constant)
    double tolerance = 0.0; // threshold it is compared with
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_passed = false;
    std::string json; // pretty-printed report
};

/// Property and identity suite on small meshes: exactness for a linear
/// solution, agreement with the classical postprocessing, the
/// ||grad(theta - nu)||_K = eta~_K identity, local efficiency, the dual-norm
/// eigenvalue oracle and the biorthogonal boundary system. Random samples are
/// drawn from `seed`.
VerifyReport run_verify(std::uint64_t seed);

/// Biorthogonal system report: A, beta, gamma, reference pairing residual,
/// physical pairing residual, operator-norm range and trace constants over
/// `triangles` random shape-regular elements.
VerifyReport fortin_report(std::uint64_t seed, int triangles = 100);

} // namespace resmin
