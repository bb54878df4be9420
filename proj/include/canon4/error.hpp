#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace canon4 {

enum class ErrorKind {
  Syntax,
  UnknownIdentifier,
  Domain,
  DegenerateMetric,
  MinimalPoint,
  NonPrincipal,
  DegenerateDenominator,
  IntegrationDomain,
  ConstancyViolation,
  NonMonotone,
  PatternNotApplicable,
  NotPnmcvf,
  NonConvergence,
  NonPositive,
  BlowUp,
  OrthonormalityDrift,
  RankDeficient,
  ShapeMismatch,
  CompatibilityGate,
  Input,
};

/// Shortest text of x with up to 17 significant digits.
std::string fmt_num(double x);

/// Stable machine-readable name, used in CLI error records.
std::string_view error_kind_name(ErrorKind kind);

struct Point2 {
  double u = 0.0;
  double v = 0.0;
};

/// Base for every error the library raises.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::optional<Point2> where = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  const std::optional<Point2>& where() const noexcept { return where_; }

 private:
  ErrorKind kind_;
  std::optional<Point2> where_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(ErrorKind kind, std::size_t offset, const std::string& message);

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace canon4
