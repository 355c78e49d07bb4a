#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iris3d {

// Base of every error raised by the library. The command line tool maps the
// subclasses onto its exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor extents or operand shapes do not satisfy an operation's contract.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A domain invariant was violated (bad parameters, degenerate geometry, ...).
class InvariantError : public Error {
 public:
  using Error::Error;
};

// Reading or writing a file failed, or a file is malformed.
class IoError : public Error {
 public:
  using Error::Error;
};

// Local surface fit failed at a specific vertex.
class VertexError : public InvariantError {
 public:
  VertexError(std::size_t vertex, const std::string& what)
      : InvariantError("vertex " + std::to_string(vertex) + ": " + what), vertex_(vertex) {}
  std::size_t vertex() const { return vertex_; }

 private:
  std::size_t vertex_;
};

// A 15-degree sector could not be turned into a classifier sample.
class SectorError : public InvariantError {
 public:
  SectorError(int sector, const std::string& what)
      : InvariantError("sector " + std::to_string(sector) + ": " + what), sector_(sector) {}
  int sector() const { return sector_; }

 private:
  int sector_;
};

}  // namespace iris3d
