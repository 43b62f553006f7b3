#pragma once

#include <stdexcept>
#include <string>

namespace pmle {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A Cholesky pivot was not strictly positive.
class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class PreconditionViolated : public Error {
 public:
  using Error::Error;
};

/// Every component log-density of an observation was -inf.
class AllZeroRow : public Error {
 public:
  using Error::Error;
};

class InvalidInit : public Error {
 public:
  using Error::Error;
};

/// No unpenalized EM run survived degeneracy filtering.
class AllDegenerate : public Error {
 public:
  using Error::Error;
};

class UnknownModel : public Error {
 public:
  using Error::Error;
};

class InsufficientReplications : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace pmle
