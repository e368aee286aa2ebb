// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace nmd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Interchange document does not match the schema or breaks an invariant.
class DocumentError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& message)
      : Error("at offset " + std::to_string(offset) + ": " + message),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class NameError : public Error {
 public:
  enum class Kind { Unresolved, Ambiguous, Unnamed };
  NameError(Kind kind, const std::string& message)
      : Error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// A formula does not have the nested-IF aggregate shape, or one of its
// ranges is not a named column.
class ShapeError : public Error {
 public:
  enum class Kind { NotConditional, RangeNotNamed };
  ShapeError(Kind kind, const std::string& message)
      : Error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class CycleError : public Error {
 public:
  using Error::Error;
};

// Formula text attached to a cell could not be parsed or resolved.
class FormulaError : public Error {
 public:
  FormulaError(std::string address, const std::string& message)
      : Error(address + ": " + message), address_(std::move(address)) {}
  const std::string& address() const { return address_; }

 private:
  std::string address_;
};

}  // namespace nmd
