#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace gmmshape {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A covariance (or other matrix required to be SPD) failed validation.
class DegenerateCovariance : public Error {
 public:
  DegenerateCovariance(const std::string& what, double eigenvalue)
      : Error(format(what, eigenvalue)), eigenvalue_(eigenvalue) {}

  double eigenvalue() const { return eigenvalue_; }

 private:
  static std::string format(const std::string& what, double eigenvalue) {
    std::ostringstream os;
    os.precision(17);
    os << "degenerate covariance: " << what << " (smallest eigenvalue " << eigenvalue << ")";
    return os.str();
  }

  double eigenvalue_;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// EM produced non-finite parameters.
class FitError : public Error {
 public:
  FitError(const std::string& what, int iteration)
      : Error("EM fit failed at iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}

  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gmmshape
