#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fgsgd {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid argument that is not a shape problem (bad counts, non-finite data).
class ValueError : public Error {
 public:
  using Error::Error;
};

class RankDeficientError : public Error {
 public:
  RankDeficientError(std::size_t column, const std::string& what)
      : Error(what), column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

// omega + v collapsed to zero (or a zero column) during a normalizing retraction.
class DegenerateRetractionError : public Error {
 public:
  using Error::Error;
};

class NonFiniteGradientError : public Error {
 public:
  NonFiniteGradientError(std::string group, const std::string& what)
      : Error(what), group_(std::move(group)) {}
  const std::string& group() const noexcept { return group_; }

 private:
  std::string group_;
};

// Malformed or missing external input (config, dataset, checkpoint).
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace fgsgd
