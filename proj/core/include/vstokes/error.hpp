#pragma once

#include <stdexcept>
#include <string>

namespace vstokes {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller passed an argument outside an operation's domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Mesh construction or classification failed (unresolved interface,
/// untagged boundary, non-conforming input).
class MeshError : public Error {
 public:
  using Error::Error;
};

/// Zero-volume cell or facet.
class DegenerateCell : public Error {
 public:
  using Error::Error;
};

/// Assembly produced an inconsistent operator.
class AssemblyError : public Error {
 public:
  using Error::Error;
};

/// Linear algebra failure (factorization, zero pivot, eigen-solver).
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace vstokes
