#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace icrenyi {

/// A value in (-inf, +inf]. Divergences are either finite or +inf; the
/// infinite case is carried as a tag so it never flows through log/exp.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  constexpr ExtendedReal(double v) : value_(v) {}  // NOLINT: implicit from finite

  static constexpr ExtendedReal infinity() {
    ExtendedReal r;
    r.infinite_ = true;
    return r;
  }

  [[nodiscard]] constexpr bool is_infinite() const { return infinite_; }
  [[nodiscard]] constexpr bool is_finite() const { return !infinite_; }

  [[nodiscard]] double value() const {
    if (infinite_) throw std::domain_error("ExtendedReal: value() of +inf");
    return value_;
  }

  /// Finite value, or +inf as an IEEE double (for printing/CSV only).
  [[nodiscard]] double to_double() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  friend ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
    if (a.infinite_ || b.infinite_) return infinity();
    return {a.value_ + b.value_};
  }

  /// Scaling by a strictly positive factor.
  friend ExtendedReal operator*(double s, ExtendedReal a) {
    if (!(s > 0.0)) throw std::domain_error("ExtendedReal: scale must be positive");
    if (a.infinite_) return infinity();
    return {s * a.value_};
  }

  friend std::partial_ordering operator<=>(ExtendedReal a, ExtendedReal b) {
    if (a.infinite_ && b.infinite_) return std::partial_ordering::equivalent;
    if (a.infinite_) return std::partial_ordering::greater;
    if (b.infinite_) return std::partial_ordering::less;
    return a.value_ <=> b.value_;
  }
  friend bool operator==(ExtendedReal a, ExtendedReal b) {
    return (a <=> b) == std::partial_ordering::equivalent;
  }

  friend std::ostream& operator<<(std::ostream& os, ExtendedReal a) {
    if (a.infinite_) return os << "+inf";
    return os << a.value_;
  }

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

inline ExtendedReal min(ExtendedReal a, ExtendedReal b) { return (a <= b) ? a : b; }

}  // namespace icrenyi
