#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "permacheck/errors.hpp"

namespace permacheck {

/// Numeric tolerances shared across modules.
namespace tol {
inline constexpr double identity = 1e-10;        // algebraic identities
inline constexpr double inversion = 1e-8;        // inversion round trips
inline constexpr double condition_cap = 1e12;    // invert() refuses above this
inline constexpr double imag_cutoff = 1e-9;      // |Im| <= imag_cutoff*||G|| counts as real
inline constexpr double symmetry = 1e-10;        // relative, for the symmetric flag
inline constexpr double psd = 1e-9;              // lambda_min >= -psd*||G||
inline constexpr double sign_zero = 1e-12;       // |x| <= sign_zero*max|G| is zero for sign logic
}  // namespace tol

enum class Outcome { holds, fails, inconclusive };

std::string to_string(Outcome outcome);

/// Structured evidence attached to a failed (or inconclusive) check.
/// Indices are 0-based in the library and rendered 1-based in reports.
struct Witness {
    std::string reason;
    std::vector<std::size_t> indices;
    std::vector<double> values;
    std::optional<double> alpha;
    std::optional<double> beta;
};

struct Verdict {
    Outcome outcome = Outcome::holds;
    std::optional<Witness> witness;
    std::string note;

    bool holds() const noexcept { return outcome == Outcome::holds; }
    bool fails() const noexcept { return outcome == Outcome::fails; }
    bool inconclusive() const noexcept { return outcome == Outcome::inconclusive; }

    static Verdict pass(std::string note = {});
    static Verdict fail(Witness witness, std::string note = {});
    static Verdict undecided(std::string note, std::optional<Witness> witness = std::nullopt);
};

/// Square real kernel G with a claimed-symmetry flag. Entries are finite and,
/// when flagged symmetric, symmetric to within tol::symmetry * max(1, max|G|).
class KernelMatrix {
public:
    /// Detects symmetry when `symmetric` is not given.
    explicit KernelMatrix(Eigen::MatrixXd entries, std::optional<bool> symmetric = std::nullopt);

    static KernelMatrix identity(std::size_t dim);
    static KernelMatrix from_rows(const std::vector<std::vector<double>>& rows,
                                  std::optional<bool> symmetric = std::nullopt);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
    bool symmetric() const noexcept { return symmetric_; }
    const Eigen::MatrixXd& entries() const noexcept { return entries_; }
    double operator()(std::size_t i, std::size_t j) const {
        return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    double max_abs() const { return entries_.cwiseAbs().maxCoeff(); }

private:
    Eigen::MatrixXd entries_;
    bool symmetric_ = false;
};

bool is_numerically_symmetric(const Eigen::MatrixXd& m, double rel_tol = tol::symmetry);

/// Diagonal +-1 conjugation vector.
class Signature {
public:
    explicit Signature(std::vector<int> signs);
    static Signature all_positive(std::size_t dim);

    std::size_t dim() const noexcept { return signs_.size(); }
    int operator[](std::size_t i) const { return signs_[i]; }
    const std::vector<int>& signs() const noexcept { return signs_; }

    /// sigma * M * sigma.
    Eigen::MatrixXd conjugate(const Eigen::MatrixXd& m) const;
    KernelMatrix conjugate(const KernelMatrix& g) const;
    Signature flipped() const;

    bool operator==(const Signature&) const = default;

private:
    std::vector<int> signs_;
};

/// Non-decreasing list of 0-based indices below `dim`, length >= 1.
class IndexMultiset {
public:
    IndexMultiset(std::vector<std::size_t> indices, std::size_t dim);

    std::size_t size() const noexcept { return indices_.size(); }
    const std::vector<std::size_t>& indices() const noexcept { return indices_; }

    /// A(i, j) = M(k_i, k_j).
    Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m) const;

    bool operator==(const IndexMultiset&) const = default;

private:
    std::vector<std::size_t> indices_;
};

/// All multisets over {0..dim-1} of sizes 1..max_size, sizes ascending and
/// lexicographic within a size.
std::vector<IndexMultiset> enumerate_multisets(std::size_t dim, std::size_t max_size);

}  // namespace permacheck
