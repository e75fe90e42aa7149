#pragma once

#include "vwave/core.hpp"

namespace vwave {

/// Neumaier-compensated running sum.
template <typename Scalar>
class CompensatedSum {
 public:
  void add(Scalar v) {
    const Scalar t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(Scalar v) {
    add(v);
    return *this;
  }
  Scalar value() const { return sum_ + comp_; }

 private:
  Scalar sum_{0};
  Scalar comp_{0};
};

/// Component-wise compensated sum of 2-vectors.
template <typename Scalar>
class CompensatedSum2 {
 public:
  void add(const Vector2<Scalar>& v) {
    x_.add(v.x());
    y_.add(v.y());
  }
  void add(Scalar vx, Scalar vy) {
    x_.add(vx);
    y_.add(vy);
  }
  Vector2<Scalar> value() const { return {x_.value(), y_.value()}; }

 private:
  CompensatedSum<Scalar> x_;
  CompensatedSum<Scalar> y_;
};

}  // namespace vwave
