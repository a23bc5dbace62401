#pragma once

#include <stdexcept>
#include <string>

namespace bf {

// All library failures derive from bf::Error so callers can catch one type.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class MalformedInputError : public Error {
  public:
    using Error::Error;
};

class RangeError : public Error {
  public:
    using Error::Error;
};

class ShapeError : public Error {
  public:
    using Error::Error;
};

class DomainError : public Error {
  public:
    using Error::Error;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

// A station chunk a kernel needs is absent.
class StalenessError : public Error {
  public:
    using Error::Error;
};

} // namespace bf
