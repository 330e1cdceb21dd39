#pragma once

#include <stdexcept>
#include <string>

namespace lpnr {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

/// A configured size or depth cap would be exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

/// The caller violated a documented precondition of a construction.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace lpnr
