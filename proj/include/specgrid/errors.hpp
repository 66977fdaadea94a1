#ifndef SPECGRID_ERRORS_HPP
#define SPECGRID_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace specgrid {

// Bad shapes, ranges or combinations of arguments.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File was readable but its content is malformed or unsupported.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// NaN/Inf showed up where finite values are required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace specgrid

#endif  // SPECGRID_ERRORS_HPP
