#pragma once

#include <stdexcept>
#include <string>

namespace kentreg {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Distribution parameters outside their domain (e.g. 2*beta >= kappa).
class InvalidParams : public Error {
 public:
  using Error::Error;
};

// A mean (of rotations or of directions) collapsed to rank deficiency.
class DegenerateMean : public Error {
 public:
  using Error::Error;
};

class DegenerateSamples : public Error {
 public:
  enum class Reason { LowWeight, NoMeanDirection, ConcentrationOverflow };

  DegenerateSamples(Reason reason, const std::string& what)
      : Error(what), reason_(reason) {}

  Reason reason() const noexcept { return reason_; }

 private:
  Reason reason_;
};

class TooFewPoints : public Error {
 public:
  using Error::Error;
};

class FileNotFound : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace kentreg
