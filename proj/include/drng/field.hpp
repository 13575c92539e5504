// SPDX-License-Identifier: Apache-2.0
//
// Arithmetic over the prime field Z_p: elements, polynomials, and Lagrange
// interpolation used both for share dealing and secret reconstruction.
#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "drng/bytes.hpp"
#include "drng/error.hpp"
#include "drng/modarith.hpp"

namespace drng {

/// Prime modulus of the share field. Validated on construction.
class FieldParams {
 public:
  /// 2^61 - 1, a Mersenne prime; products fit in 128 bits.
  static constexpr std::uint64_t kDefaultPrime = (std::uint64_t{1} << 61) - 1;

  FieldParams() : p_(kDefaultPrime) {}

  explicit FieldParams(std::uint64_t p) : p_(p) {
    if (p < 5) throw Error(ErrorCode::NotPrime, "field modulus must be >= 5");
    if (!modarith::is_prime(p)) {
      throw Error(ErrorCode::NotPrime, "field modulus " + std::to_string(p) + " is not prime");
    }
  }

  std::uint64_t p() const noexcept { return p_; }

  friend bool operator==(const FieldParams&, const FieldParams&) = default;

 private:
  std::uint64_t p_;
};

/// An element of Z_p. Carries its modulus so mixing fields is caught.
class FieldElement {
 public:
  FieldElement(const FieldParams& field, std::uint64_t v) : value_(v % field.p()), p_(field.p()) {}

  std::uint64_t value() const noexcept { return value_; }
  std::uint64_t modulus() const noexcept { return p_; }
  FieldParams field() const { return FieldParams(p_); }
  bool is_zero() const noexcept { return value_ == 0; }

  friend FieldElement operator+(FieldElement a, const FieldElement& b) {
    a.check_same(b);
    a.value_ = modarith::add(a.value_, b.value_, a.p_);
    return a;
  }
  friend FieldElement operator-(FieldElement a, const FieldElement& b) {
    a.check_same(b);
    a.value_ = modarith::sub(a.value_, b.value_, a.p_);
    return a;
  }
  friend FieldElement operator*(FieldElement a, const FieldElement& b) {
    a.check_same(b);
    a.value_ = modarith::mul(a.value_, b.value_, a.p_);
    return a;
  }
  FieldElement operator-() const {
    FieldElement r = *this;
    r.value_ = modarith::sub(0, value_, p_);
    return r;
  }
  FieldElement& operator+=(const FieldElement& b) { return *this = *this + b; }
  FieldElement& operator-=(const FieldElement& b) { return *this = *this - b; }
  FieldElement& operator*=(const FieldElement& b) { return *this = *this * b; }

  friend bool operator==(const FieldElement&, const FieldElement&) = default;

  /// Fixed-width 8-byte big-endian encoding.
  void encode_to(Bytes& out) const { append_u64_be(out, value_); }

  void check_same(const FieldElement& other) const {
    if (p_ != other.p_) throw Error(ErrorCode::FieldMismatch, "operands from different fields");
  }

 private:
  std::uint64_t value_;
  std::uint64_t p_;
};

inline FieldElement mod_inv(const FieldElement& a) {
  if (a.is_zero()) throw Error(ErrorCode::ZeroInverse, "zero has no inverse");
  // Fermat: a^(p-2) = a^-1 for prime p.
  return FieldElement(a.field(), modarith::pow(a.value(), a.modulus() - 2, a.modulus()));
}

/// Reduces a big-endian unsigned integer of any width into Z_p.
inline FieldElement reduce_bytes(const FieldParams& field, std::span<const std::uint8_t> be) {
  std::uint64_t acc = 0;
  for (auto b : be) {
    acc = static_cast<std::uint64_t>((static_cast<modarith::u128>(acc) << 8 | b) % field.p());
  }
  return FieldElement(field, acc);
}

/// Dense polynomial over Z_p in ascending-power order. Trailing zero
/// coefficients are trimmed so the degree is always well defined; the zero
/// polynomial is stored as the single coefficient 0.
class Polynomial {
 public:
  Polynomial(const FieldParams& field, std::vector<FieldElement> coeffs) : field_(field), coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw Error(ErrorCode::EmptyInput, "polynomial needs at least one coefficient");
    for (const auto& c : coeffs_) {
      if (c.modulus() != field_.p()) throw Error(ErrorCode::FieldMismatch, "coefficient from a different field");
    }
    while (coeffs_.size() > 1 && coeffs_.back().is_zero()) coeffs_.pop_back();
  }

  static Polynomial from_values(const FieldParams& field, std::span<const std::uint64_t> values) {
    std::vector<FieldElement> c;
    c.reserve(values.size());
    for (auto v : values) c.emplace_back(field, v);
    return Polynomial(field, std::move(c));
  }

  const FieldParams& field() const noexcept { return field_; }
  const std::vector<FieldElement>& coeffs() const noexcept { return coeffs_; }
  std::size_t degree() const noexcept { return coeffs_.size() - 1; }
  const FieldElement& constant_term() const noexcept { return coeffs_.front(); }

  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.coeffs_ == b.coeffs_; }

 private:
  FieldParams field_;
  std::vector<FieldElement> coeffs_;
};

struct SharePoint {
  FieldElement x;
  FieldElement y;
};

/// Horner evaluation.
inline FieldElement poly_eval(const Polynomial& poly, const FieldElement& x) {
  if (x.modulus() != poly.field().p()) throw Error(ErrorCode::FieldMismatch, "evaluation point from a different field");
  const auto& c = poly.coeffs();
  FieldElement acc = c.back();
  for (auto it = c.rbegin() + 1; it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

namespace detail {

inline void check_points(std::span<const SharePoint> points) {
  if (points.empty()) throw Error(ErrorCode::EmptyInput, "interpolation needs at least one point");
  const auto p = points.front().x.modulus();
  std::vector<std::uint64_t> xs;
  xs.reserve(points.size());
  for (const auto& pt : points) {
    if (pt.x.modulus() != p || pt.y.modulus() != p) {
      throw Error(ErrorCode::FieldMismatch, "share points from different fields");
    }
    xs.push_back(pt.x.value());
  }
  std::sort(xs.begin(), xs.end());
  if (std::adjacent_find(xs.begin(), xs.end()) != xs.end()) {
    throw Error(ErrorCode::DuplicateX, "two share points share an x value");
  }
}

}  // namespace detail

/// Unique polynomial of degree <= k-1 through k points with distinct x.
///
/// Builds the master product prod_j (X - x_j) once, then recovers each
/// Lagrange basis numerator by synthetic division, for O(k^2) total work.
inline Polynomial interpolate_coefficients(std::span<const SharePoint> points) {
  detail::check_points(points);
  const FieldParams field(points.front().x.modulus());
  const std::size_t k = points.size();
  const FieldElement zero(field, 0);
  const FieldElement one(field, 1);

  // master[i] is the coefficient of X^i in prod_j (X - x_j).
  std::vector<FieldElement> master(k + 1, zero);
  master[0] = one;
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = j + 1; i > 0; --i) master[i] = master[i - 1] - points[j].x * master[i];
    master[0] = -(points[j].x * master[0]);
  }

  std::vector<FieldElement> result(k, zero);
  std::vector<FieldElement> basis(k, zero);
  for (std::size_t i = 0; i < k; ++i) {
    const auto& xi = points[i].x;
    // master / (X - xi), highest coefficient first.
    FieldElement carry = zero;
    for (std::size_t d = k; d > 0; --d) {
      carry = master[d] + carry * xi;
      basis[d - 1] = carry;
    }
    FieldElement denom = one;
    for (std::size_t j = 0; j < k; ++j) {
      if (j != i) denom *= xi - points[j].x;
    }
    const FieldElement scale = points[i].y * mod_inv(denom);
    for (std::size_t d = 0; d < k; ++d) result[d] += basis[d] * scale;
  }
  return Polynomial(field, std::move(result));
}

/// Y(0) of the interpolating polynomial, via the Lagrange weights at zero.
inline FieldElement interpolate_at_zero(std::span<const SharePoint> points) {
  detail::check_points(points);
  const FieldParams field(points.front().x.modulus());
  FieldElement acc(field, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    FieldElement num(field, 1);
    FieldElement den(field, 1);
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (j == i) continue;
      num *= points[j].x;
      den *= points[j].x - points[i].x;
    }
    acc += points[i].y * num * mod_inv(den);
  }
  return acc;
}

}  // namespace drng
