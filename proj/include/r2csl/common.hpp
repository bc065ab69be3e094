#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace r2csl {

inline constexpr const char* kLibraryVersion = "r2csl 0.1.0";
inline constexpr double kDefaultResolution = 1e-6;

enum class ErrorKind {
  NonStochasticRow,
  RewardOutOfRange,
  ShapeMismatch,
  WrongLength,
  TieFreeUnverifiable,
  InvalidConfig,
  InvalidAlpha,
  EmptyDomainPoint,
  DomainGap,
  PassMismatch,
  EmptySupport,
  UnreachableState,
  SizeBound,
  EmptyCondition,
  MissingOracle,
  IoError,
  SchemaError,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what),
        kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

// FNV-1a, used for config hashes embedded in CSV provenance columns.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace r2csl
