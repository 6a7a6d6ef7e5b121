#pragma once

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sectcalc {

template <typename Real>
using ComplexT = std::complex<Real>;
template <typename Real>
using CMatrixT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using CVectorT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

using Complex = ComplexT<double>;
using CMatrix = CMatrixT<double>;
using CVector = CVectorT<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Base of everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed JSON, out-of-range parameters, unknown kinds.
class InputError : public Error {
 public:
  explicit InputError(const std::string& msg, std::string pointer = {})
      : Error(pointer.empty() ? msg : msg + " (at " + pointer + ")"), message_(msg), pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }
  const std::string& message() const { return message_; }
  // Same error with the pointer placed under a parent location.
  InputError under(const std::string& parent) const { return InputError(message_, parent + pointer_); }

 private:
  std::string message_;
  std::string pointer_;
};

// Evaluation point outside the domain where the function is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A theorem's hypotheses do not hold for the given inputs.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& msg, double conditionEstimate)
      : Error(msg), condition_(conditionEstimate) {}
  double conditionEstimate() const { return condition_; }

 private:
  double condition_;
};

}  // namespace sectcalc
