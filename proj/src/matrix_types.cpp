#include "permacheck/matrix_types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace permacheck {

std::string to_string(Outcome outcome) {
    switch (outcome) {
    case Outcome::holds: return "holds";
    case Outcome::fails: return "fails";
    case Outcome::inconclusive: return "inconclusive";
    }
    return "unknown";
}

Verdict Verdict::pass(std::string note) {
    return Verdict{Outcome::holds, std::nullopt, std::move(note)};
}

Verdict Verdict::fail(Witness witness, std::string note) {
    return Verdict{Outcome::fails, std::move(witness), std::move(note)};
}

Verdict Verdict::undecided(std::string note, std::optional<Witness> witness) {
    return Verdict{Outcome::inconclusive, std::move(witness), std::move(note)};
}

bool is_numerically_symmetric(const Eigen::MatrixXd& m, double rel_tol) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1.0, m.size() ? m.cwiseAbs().maxCoeff() : 0.0);
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

KernelMatrix::KernelMatrix(Eigen::MatrixXd entries, std::optional<bool> symmetric)
    : entries_(std::move(entries)) {
    if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
        std::ostringstream os;
        os << "kernel must be square and nonempty, got " << entries_.rows() << "x" << entries_.cols();
        throw DomainError(os.str());
    }
    if (!entries_.allFinite()) throw DomainError("kernel has non-finite entries");
    const bool detected = is_numerically_symmetric(entries_);
    if (symmetric.has_value()) {
        if (*symmetric && !detected) throw DomainError("kernel flagged symmetric but is not");
        symmetric_ = *symmetric;
    } else {
        symmetric_ = detected;
    }
}

KernelMatrix KernelMatrix::identity(std::size_t dim) {
    const auto n = static_cast<Eigen::Index>(dim);
    return KernelMatrix(Eigen::MatrixXd::Identity(n, n), true);
}

KernelMatrix KernelMatrix::from_rows(const std::vector<std::vector<double>>& rows,
                                     std::optional<bool> symmetric) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != n) throw DomainError("kernel rows must form a square matrix");
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
    }
    return KernelMatrix(std::move(m), symmetric);
}

Signature::Signature(std::vector<int> signs) : signs_(std::move(signs)) {
    if (signs_.empty()) throw DomainError("signature must be nonempty");
    for (int s : signs_) {
        if (s != 1 && s != -1) throw DomainError("signature entries must be +1 or -1");
    }
}

Signature Signature::all_positive(std::size_t dim) { return Signature(std::vector<int>(dim, 1)); }

Eigen::MatrixXd Signature::conjugate(const Eigen::MatrixXd& m) const {
    if (static_cast<std::size_t>(m.rows()) != dim() || m.rows() != m.cols())
        throw DomainError("signature dimension mismatch");
    Eigen::MatrixXd out = m;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            out(i, j) *= signs_[static_cast<std::size_t>(i)] * signs_[static_cast<std::size_t>(j)];
    return out;
}

KernelMatrix Signature::conjugate(const KernelMatrix& g) const {
    return KernelMatrix(conjugate(g.entries()), g.symmetric());
}

Signature Signature::flipped() const {
    std::vector<int> s = signs_;
    for (int& v : s) v = -v;
    return Signature(std::move(s));
}

IndexMultiset::IndexMultiset(std::vector<std::size_t> indices, std::size_t dim)
    : indices_(std::move(indices)) {
    if (indices_.empty()) throw DomainError("index multiset must be nonempty");
    if (!std::is_sorted(indices_.begin(), indices_.end())) throw DomainError("index multiset must be sorted");
    if (indices_.back() >= dim) throw DomainError("index multiset entry out of range");
}

Eigen::MatrixXd IndexMultiset::submatrix(const Eigen::MatrixXd& m) const {
    const auto k = static_cast<Eigen::Index>(indices_.size());
    Eigen::MatrixXd a(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j)
            a(i, j) = m(static_cast<Eigen::Index>(indices_[static_cast<std::size_t>(i)]),
                        static_cast<Eigen::Index>(indices_[static_cast<std::size_t>(j)]));
    return a;
}

std::vector<IndexMultiset> enumerate_multisets(std::size_t dim, std::size_t max_size) {
    std::vector<IndexMultiset> out;
    if (dim == 0) return out;
    for (std::size_t size = 1; size <= max_size; ++size) {
        std::vector<std::size_t> cur(size, 0);
        while (true) {
            out.emplace_back(cur, dim);
            // next non-decreasing sequence in lexicographic order
            std::size_t pos = size;
            while (pos > 0 && cur[pos - 1] == dim - 1) --pos;
            if (pos == 0) break;
            const std::size_t v = cur[pos - 1] + 1;
            for (std::size_t t = pos - 1; t < size; ++t) cur[t] = v;
        }
    }
    return out;
}

}  // namespace permacheck
