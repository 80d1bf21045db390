#pragma once

#include <stdexcept>
#include <string>

namespace opgrowth {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operands live on different numbers of sites, or a basis mismatch.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

// A requested system size exceeds what a backend can represent.
class CapacityError : public Error {
 public:
  CapacityError(const std::string& what, std::size_t requested, std::size_t limit)
      : Error(what + " (requested " + std::to_string(requested) + ", limit " + std::to_string(limit) + ")"),
        requested_(requested),
        limit_(limit) {}

  std::size_t requested() const { return requested_; }
  std::size_t limit() const { return limit_; }

 private:
  std::size_t requested_;
  std::size_t limit_;
};

class IntegrationError : public Error {
 public:
  using Error::Error;
};

class CertificationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ProtocolStateError : public Error {
 public:
  using Error::Error;
};

class PlanningError : public Error {
 public:
  PlanningError(const std::string& what, std::size_t minimum_n) : Error(what), minimum_n_(minimum_n) {}
  std::size_t minimum_n() const { return minimum_n_; }

 private:
  std::size_t minimum_n_;
};

}  // namespace opgrowth
