#pragma once

#include <stdexcept>
#include <string>

namespace copg {

// Base class for every error raised by the library. Commands catch this at
// the scene boundary and attach the scene id before reporting.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class TooFewPoints : public Error {
 public:
  explicit TooFewPoints(const std::string& what) : Error(what) {}
};

class DegenerateGeometry : public Error {
 public:
  explicit DegenerateGeometry(const std::string& what) : Error(what) {}
};

class EmptyRaster : public Error {
 public:
  explicit EmptyRaster(const std::string& what) : Error(what) {}
};

class UnmappedCategory : public Error {
 public:
  explicit UnmappedCategory(const std::string& what) : Error(what) {}
};

class InvalidSpec : public Error {
 public:
  explicit InvalidSpec(const std::string& what) : Error(what) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace copg
