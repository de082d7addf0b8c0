#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hidm {

/// Invalid characterization vectors, malformed configuration or inconsistent tables.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Block or stream length does not match the structure dimensions.
class SizeError : public std::length_error {
 public:
  explicit SizeError(const std::string& what) : std::length_error(what) {}
};

/// Not enough sequences to fill the LUTs of a layer.
class ConstructionError : public std::runtime_error {
 public:
  explicit ConstructionError(const std::string& what) : std::runtime_error(what) {}
};

/// A block handed to the inverse matcher is stored in none of the LUTs of its layer.
class NonCodewordError : public std::runtime_error {
 public:
  NonCodewordError(std::size_t layer, std::size_t block, const std::string& what)
      : std::runtime_error(what), layer_(layer), block_(block) {}

  /// 0-based layer index.
  std::size_t layer() const noexcept { return layer_; }
  /// 0-based block position within that layer.
  std::size_t block() const noexcept { return block_; }

 private:
  std::size_t layer_;
  std::size_t block_;
};

/// No characterization vector satisfies the search constraints.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hidm
