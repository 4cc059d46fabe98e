#pragma once

#include <stdexcept>
#include <string>

namespace hpfts {

/// Base class of every recoverable error raised by this library.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string &what) : std::runtime_error(what) {}
};

/// Bad inputs: malformed files, inconsistent shapes, out-of-range settings.
class ValidationError : public Error {
  public:
    using Error::Error;
};

class MalformedRow : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class GapInYears : public ValidationError {
  public:
    GapInYears(int missing_year, const std::string &context)
        : ValidationError("missing year " + std::to_string(missing_year) + " in " + context),
          year(missing_year) {}
    int year;
};

class NegativeCount : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class MissingAge : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class ShapeMismatch : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class InvalidRate : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class RatesMissing : public ValidationError {
  public:
    RatesMissing(int missing_year, const std::string &label)
        : ValidationError("rate series '" + label + "' does not cover year " +
                          std::to_string(missing_year)),
          year(missing_year) {}
    int year;
};

class YearOutOfRange : public ValidationError {
  public:
    YearOutOfRange(int bad_year, int first, int last)
        : ValidationError("year " + std::to_string(bad_year) + " outside range [" +
                          std::to_string(first) + ", " + std::to_string(last) + "]"),
          year(bad_year) {}
    int year;
};

/// A ratio denominator vanished; carries the offending cell.
class ZeroDenominator : public Error {
  public:
    ZeroDenominator(int cell_year, int cell_age, const std::string &context)
        : Error("zero denominator at year " + std::to_string(cell_year) + ", age " +
                std::to_string(cell_age) + " (" + context + ")"),
          year(cell_year), age(cell_age) {}
    int year;
    int age; // -1 when the denominator is not a single age cell
};

class KTooLarge : public Error {
  public:
    KTooLarge(int k, int max_k)
        : Error("K=" + std::to_string(k) + " exceeds the admissible maximum " +
                std::to_string(max_k)) {}
};

class DegenerateSeries : public Error {
  public:
    using Error::Error;
};

class SeriesTooShort : public Error {
  public:
    SeriesTooShort(std::size_t n, std::size_t need)
        : Error("series of length " + std::to_string(n) + " is too short (need >= " +
                std::to_string(need) + ")") {}
};

class HorizonTooLong : public Error {
  public:
    HorizonTooLong(int h, std::size_t n)
        : Error("horizon " + std::to_string(h) + " leaves fewer than 5 in-sample errors for a " +
                "series of length " + std::to_string(n)) {}
};

class UnsatisfiableThreshold : public Error {
  public:
    UnsatisfiableThreshold(int year, double target)
        : Error("dependency ratio stays above " + std::to_string(target) +
                "% at the maximum pension age in year " + std::to_string(year)),
          year(year) {}
    int year;
};

} // namespace hpfts
