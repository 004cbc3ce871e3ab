#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace helmsweep {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a contract precondition is violated by the caller.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raised by factorizations on singular (or numerically singular) input.
class SingularMatrix : public Error {
 public:
  SingularMatrix(const std::string& what, std::size_t row)
      : Error(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

}  // namespace helmsweep
