#pragma once

#include <stdexcept>
#include <string>

namespace ggm {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Fewer observations than required (n <= N).
class InsufficientSample : public Error {
public:
    explicit InsufficientSample(const std::string& what)
        : Error("insufficient sample: " + what) {}
};

class NotPositiveDefinite : public Error {
public:
    explicit NotPositiveDefinite(const std::string& what)
        : Error("matrix is not positive definite: " + what) {}
};

/// The off-edge entries admit no positive-definite completion.
class DegenerateEdge : public Error {
public:
    explicit DegenerateEdge(const std::string& what)
        : Error("degenerate edge: " + what) {}
};

/// Malformed input data (CSV cells, shapes, labels).
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace ggm
