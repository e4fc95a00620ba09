#include "isotree/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace isotree {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr int kMaxIterations = 200;
constexpr double kResidualTolerance = 1e-12;

// Coefficients of a single loss derivative: c3 * x^3 + c1 * x + c0.
struct Cubic {
  double c3;
  double c1;
  double c0;
};

Cubic coefficients(const Loss& loss) {
  return std::visit(Overloaded{
                        [&](const WeightedQuadratic& q) {
                          return Cubic{0.0, q.w, -q.w * q.y + loss.slope()};
                        },
                        [&](const QuarticQuadratic& q) {
                          return Cubic{4.0 * q.b, 2.0 * q.a, q.c + loss.slope()};
                        },
                    },
                    loss.base());
}

}  // namespace

Loss Loss::quadratic(double w, double y) {
  if (!(w > 0.0) || !std::isfinite(w) || !std::isfinite(y)) {
    throw std::invalid_argument("quadratic loss needs finite w > 0 and finite y");
  }
  return Loss(WeightedQuadratic{w, y}, 0.0);
}

Loss Loss::quartic(double a, double b, double c) {
  if (!(a > 0.0) || !(b >= 0.0) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
    throw std::invalid_argument("quartic loss needs finite a > 0, b >= 0 and finite c");
  }
  return Loss(QuarticQuadratic{a, b, c}, 0.0);
}

Loss Loss::shifted(double slope) const { return Loss(base_, slope_ + slope); }

double Loss::value(double x) const {
  const double base = std::visit(Overloaded{
                                     [&](const WeightedQuadratic& q) {
                                       const double d = x - q.y;
                                       return 0.5 * q.w * d * d;
                                     },
                                     [&](const QuarticQuadratic& q) {
                                       const double x2 = x * x;
                                       return q.a * x2 + q.b * x2 * x2 + q.c * x;
                                     },
                                 },
                                 base_);
  return base + slope_ * x;
}

double Loss::derivative(double x) const {
  const Cubic k = coefficients(*this);
  return (k.c3 * x * x + k.c1) * x + k.c0;
}

double Loss::second_derivative(double x) const {
  const Cubic k = coefficients(*this);
  return 3.0 * k.c3 * x * x + k.c1;
}

double Loss::inverse_derivative(double s) const {
  const Cubic k = coefficients(*this);
  if (k.c3 == 0.0) return (s - k.c0) / k.c1;
  return detail::solve_increasing_cubic(k.c3, k.c1, k.c0, s);
}

LossGroup::LossGroup(std::span<const Loss> members) {
  for (const Loss& loss : members) add(loss);
}

void LossGroup::add(const Loss& loss) {
  const Cubic k = coefficients(loss);
  ++count_;
  cubic_ += k.c3;
  linear_ += k.c1;
  offset_ += k.c0;
}

void LossGroup::merge(const LossGroup& other) {
  count_ += other.count_;
  cubic_ += other.cubic_;
  linear_ += other.linear_;
  offset_ += other.offset_;
}

double LossGroup::derivative(double x) const { return (cubic_ * x * x + linear_) * x + offset_; }

double LossGroup::inverse_derivative(double s) const {
  if (empty()) throw std::logic_error("inverse derivative of an empty loss group");
  if (all_quadratic()) return (s - offset_) / linear_;
  return detail::solve_increasing_cubic(cubic_, linear_, offset_, s);
}

double LossGroup::inverse_derivative_iterative(double s) const {
  if (empty()) throw std::logic_error("inverse derivative of an empty loss group");
  return detail::solve_increasing_cubic(cubic_, linear_, offset_, s);
}

double equilibrium_t(const LossGroup& group, double beta, const Loss& attach) {
  LossGroup joint = group;
  joint.add(attach);
  const double x = joint.inverse_derivative(beta);
  return -attach.derivative(x);
}

namespace detail {

double solve_increasing_cubic(double c3, double c1, double c0, double s) {
  auto residual = [&](double x) { return (c3 * x * x + c1) * x + c0 - s; };
  auto slope = [&](double x) { return 3.0 * c3 * x * x + c1; };
  const double tolerance = kResidualTolerance * (1.0 + std::abs(s));

  // Root of the linear part; the cubic term only pulls the root toward 0.
  double x = (s - c0) / c1;
  if (c3 > 0.0) {
    const double cube = std::cbrt((s - c0) / c3);
    if (std::abs(cube) < std::abs(x)) x = cube;
  }
  double r = residual(x);
  if (std::abs(r) <= tolerance) return x;

  int iterations = 0;
  double lo = x;
  double hi = x;
  double step = std::max(1.0, std::abs(x));
  if (r < 0.0) {
    while (residual(hi) < 0.0 && iterations++ < kMaxIterations) {
      lo = hi;
      hi = x + step;
      step *= 2.0;
    }
  } else {
    while (residual(lo) > 0.0 && iterations++ < kMaxIterations) {
      hi = lo;
      lo = x - step;
      step *= 2.0;
    }
  }

  double best = x;
  double best_r = std::abs(r);
  while (iterations++ < kMaxIterations) {
    r = residual(x);
    if (std::abs(r) < best_r) {
      best = x;
      best_r = std::abs(r);
    }
    if (std::abs(r) <= tolerance) return x;
    if (r < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (!(std::nextafter(lo, hi) < hi)) break;
    double next = x - r / slope(x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return best;
}

}  // namespace detail
}  // namespace isotree
