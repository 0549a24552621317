#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace permacheck {

/// Base of every library error. `kind()` is a stable machine-readable tag.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

    /// Numeric failures (singularity, nonconvergence, failed factorization) as
    /// opposed to invalid input or usage.
    virtual bool numeric() const noexcept { return false; }

private:
    std::string kind_;
};

/// Invalid argument or violated precondition on caller-provided values.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& message) : Error("domain", message) {}
    DomainError(std::string kind, const std::string& message) : Error(std::move(kind), message) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& message) : Error("parse", message) {}
};

class NumericError : public Error {
public:
    using Error::Error;
    bool numeric() const noexcept override { return true; }
};

class SingularMatrixError : public NumericError {
public:
    SingularMatrixError(double condition, const std::string& message)
        : NumericError("singular", message), condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

class NotPositiveDefiniteError : public NumericError {
public:
    NotPositiveDefiniteError(double min_eigenvalue, const std::string& message)
        : NumericError("not-positive-definite", message), min_eigenvalue_(min_eigenvalue) {}
    double min_eigenvalue() const noexcept { return min_eigenvalue_; }

private:
    double min_eigenvalue_;
};

class SpectralRadiusError : public NumericError {
public:
    SpectralRadiusError(double radius, const std::string& message)
        : NumericError("spectral-radius", message), radius_(radius) {}
    double radius() const noexcept { return radius_; }

private:
    double radius_;
};

/// Cyclic triple product G(j,i) G(j,k) G(k,i) < 0 (0-based indices).
class TripleConditionError : public NumericError {
public:
    TripleConditionError(std::array<std::size_t, 3> triple, double product, const std::string& message)
        : NumericError("triple-condition-violated", message), triple_(triple), product_(product) {}
    const std::array<std::size_t, 3>& triple() const noexcept { return triple_; }
    double product() const noexcept { return product_; }

private:
    std::array<std::size_t, 3> triple_;
    double product_;
};

/// Sign propagation closed a cycle with the wrong parity.
class SignInconsistencyError : public NumericError {
public:
    struct Entry {
        std::size_t row;
        std::size_t col;
        double value;
    };

    SignInconsistencyError(Entry closing_edge, std::vector<Entry> near_zero, const std::string& message)
        : NumericError("sign-inconsistency", message),
          closing_edge_(closing_edge),
          near_zero_(std::move(near_zero)) {}

    const Entry& closing_edge() const noexcept { return closing_edge_; }
    const std::vector<Entry>& near_zero() const noexcept { return near_zero_; }

private:
    Entry closing_edge_;
    std::vector<Entry> near_zero_;
};

class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& message) : Error("schema", message) {}
};

}  // namespace permacheck
