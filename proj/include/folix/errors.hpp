#pragma once

#include <stdexcept>
#include <string>

namespace folix {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical certificate did not hold (quadrature, aliasing, eigensolver,
// bundle-like test). The CLI maps these to exit status 3.
class CertificationError : public Error {
 public:
  using Error::Error;
};

class NonPositiveMetric : public Error {
 public:
  NonPositiveMetric(double u, double v, const std::string& what)
      : Error("metric not positive definite at (u,v)=(" + std::to_string(u) + "," +
              std::to_string(v) + "): " + what),
        u_(u),
        v_(v) {}
  double u() const { return u_; }
  double v() const { return v_; }

 private:
  double u_;
  double v_;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class ZeroCovector : public Error {
 public:
  using Error::Error;
};

class ZeroMomentum : public Error {
 public:
  using Error::Error;
};

class NotBundleLike : public CertificationError {
 public:
  using CertificationError::CertificationError;
};

class SupportOverflow : public Error {
 public:
  using Error::Error;
};

class SupportViolation : public Error {
 public:
  using Error::Error;
};

class CharacteristicEscape : public CertificationError {
 public:
  using CertificationError::CertificationError;
};

class QuadratureUnderresolved : public CertificationError {
 public:
  using CertificationError::CertificationError;
};

class AliasingDetected : public CertificationError {
 public:
  using CertificationError::CertificationError;
};

class EigSolverFailure : public CertificationError {
 public:
  using CertificationError::CertificationError;
};

class BandUnresolved : public Error {
 public:
  using Error::Error;
};

class UnknownArtifact : public Error {
 public:
  using Error::Error;
};

// Configuration validation error; `pointer` is a JSON pointer to the field.
class ConfigError : public Error {
 public:
  ConfigError(std::string pointer, const std::string& what)
      : Error(pointer + ": " + what), pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

}  // namespace folix
