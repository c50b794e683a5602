#pragma once

#include <stdexcept>
#include <string>

namespace manifold_align {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// A matrix that must be positive definite (or full rank) is not, even after
/// regularization.
class NumericalRank : public Error {
public:
  using Error::Error;
};

/// Input has no spread: all points coincide, zero Gram matrix, etc.
class DegenerateInput : public Error {
public:
  using Error::Error;
};

class DisconnectedGraph : public Error {
public:
  DisconnectedGraph(std::size_t components, const std::string& what)
      : Error(what + " (graph has " + std::to_string(components) +
              " connected components)"),
        components_(components) {}

  std::size_t components() const noexcept { return components_; }

private:
  std::size_t components_;
};

/// The alignment has no correspondence coupling, so the result would be
/// unconstrained.
class Unconstrained : public Error {
public:
  using Error::Error;
};

class Unsupported : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace manifold_align
