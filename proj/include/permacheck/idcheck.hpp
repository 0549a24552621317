#pragma once

#include <optional>
#include <string>

#include "permacheck/betaperm.hpp"
#include "permacheck/matrix_types.hpp"

namespace permacheck {

/// Which route decided an infinite-divisibility verdict.
enum class IdMethod {
    bapat_exact,          ///< symmetric: sigma G^{-1} sigma has a Z pattern
    battery_necessary,    ///< a necessary condition failed before any exact test
    inverse_m_sufficient, ///< nonsymmetric: (sigma G sigma)^{-1} has a Z pattern
    vere_jones_scan,      ///< nonsymmetric: beta-positivity scan found a witness, or nothing decided
};

std::string to_string(IdMethod method);

struct IdVerdict {
    Verdict verdict;
    IdMethod method = IdMethod::battery_necessary;
    std::optional<Signature> signature;
};

/// Builds sigma with sigma(i) G(i,j) sigma(j) >= 0 by propagating signs along
/// the nonzero entries (components rooted at +1 in index order). Checks the
/// triple condition first (TripleConditionError) and raises
/// SignInconsistencyError when propagation contradicts itself.
Signature construct_signature(const KernelMatrix& g);

/// Exact test for symmetric positive definite G: 2-colours the graph of
/// nonzero off-diagonals of G^{-1} and verifies sigma G^{-1} sigma. On failure
/// the witness lists an odd cycle (closing edge first). Throws
/// NotPositiveDefiniteError.
IdVerdict bapat_test(const KernelMatrix& g);

struct IdOptions {
    ScanOptions scan = default_scan_options();
};

/// Infinite divisibility of the permanental law (G, beta). Symmetric kernels
/// are decided by bapat_test; nonsymmetric ones by the inverse-M route, then the
/// Vere-Jones scan, else inconclusive over the scanned range.
IdVerdict id_verdict(const KernelMatrix& g, double beta, const IdOptions& options = {});

/// Symmetric 2x2 kernel with the same diagonal and off-diagonal
/// sqrt(C12 C21) carrying the sign of the off-diagonals; |I + xC| is unchanged
/// for diagonal x.
KernelMatrix symmetrize_pair_kernel(const KernelMatrix& c);

/// Two-point shifted criterion for ((eta_x + r)^2, (eta_y + r)^2) being ID for
/// every r, implemented as printed: 0 <= c <= v_x * v_y. The verdict note
/// records that the Green 2x2 characterization would use min(v_x, v_y).
Verdict shifted_pair_id_test(double v_x, double c, double v_y);

}  // namespace permacheck
