#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eml {

/// Base class for every error raised by the toolchain. All of them are
/// "domain" errors from the CLI's point of view (exit code 1).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class UnknownSymbolError : public Error {
 public:
  explicit UnknownSymbolError(const std::string& symbol)
      : Error("unknown symbol '" + symbol + "'"), symbol_(symbol) {}
  const std::string& symbol() const noexcept { return symbol_; }

 private:
  std::string symbol_;
};

class ArityError : public Error {
 public:
  using Error::Error;
};

/// Stack underflow or surplus operands in an RPN program.
class StackError : public Error {
 public:
  using Error::Error;
};

class UnboundVariableError : public Error {
 public:
  explicit UnboundVariableError(const std::string& name)
      : Error("unbound variable '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class MissingDefinitionError : public Error {
 public:
  explicit MissingDefinitionError(const std::string& symbol)
      : Error("no EML definition for '" + symbol + "'"), symbol_(symbol) {}
  const std::string& symbol() const noexcept { return symbol_; }

 private:
  std::string symbol_;
};

class NotPureEmlError : public Error {
 public:
  using Error::Error;
};

}  // namespace eml
