#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace manilip {

/// Bad shapes, out-of-range hyperparameters, empty inputs.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A graph could not be built because some point has no neighbor.
class ConstructionError : public std::runtime_error {
 public:
  ConstructionError(const std::string& what, std::size_t point_index)
      : std::runtime_error(what + " (point " + std::to_string(point_index) + ")"),
        point_index_(point_index) {}

  std::size_t point_index() const noexcept { return point_index_; }

 private:
  std::size_t point_index_;
};

class NoPathError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `line` is 1-based; 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? what + " at line " + std::to_string(line) : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace manilip
