#pragma once

#include <cstddef>
#include <span>
#include <variant>

namespace isotree {

/// f(x) = 1/2 * w * (x - y)^2, w > 0.
struct WeightedQuadratic {
  double w = 1.0;
  double y = 0.0;
};

/// f(x) = a * x^2 + b * x^4 + c * x, a > 0, b >= 0.
struct QuarticQuadratic {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;
};

/// Strongly convex, differentiable scalar loss, optionally plus a linear
/// term slope * x. Immutable value type.
class Loss {
 public:
  using Base = std::variant<WeightedQuadratic, QuarticQuadratic>;

  /// Throws std::invalid_argument unless w > 0 and both parameters are finite.
  static Loss quadratic(double w, double y);
  /// Throws std::invalid_argument unless a > 0, b >= 0 and all are finite.
  static Loss quartic(double a, double b, double c);

  /// This loss plus slope * x. Shifts compose additively.
  Loss shifted(double slope) const;

  const Base& base() const { return base_; }
  double slope() const { return slope_; }
  bool is_quadratic() const { return std::holds_alternative<WeightedQuadratic>(base_); }

  double value(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;

  /// The x with derivative(x) == s, i.e. the derivative of the convex
  /// conjugate evaluated at s.
  double inverse_derivative(double s) const;

 private:
  Loss(Base base, double slope) : base_(base), slope_(slope) {}

  Base base_;
  double slope_ = 0.0;
};

/// Pooled loss sum_i f_i over a group of nodes that share one value.
///
/// Every supported kind has a polynomial derivative, so the group derivative
/// is kept as cubic * x^3 + linear * x + offset and merging or extending a
/// group is O(1). `offset` caches the constant terms, including all linear
/// shifts of the members.
class LossGroup {
 public:
  LossGroup() = default;
  explicit LossGroup(std::span<const Loss> members);

  void add(const Loss& loss);
  void merge(const LossGroup& other);

  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  /// True when no member carries a quartic term; the inverse is then closed form.
  bool all_quadratic() const { return cubic_ == 0.0; }

  double linear() const { return linear_; }
  double cubic() const { return cubic_; }
  double offset() const { return offset_; }

  double derivative(double x) const;

  /// The common value x with sum_i f_i'(x) == s. Throws std::logic_error on
  /// an empty group.
  double inverse_derivative(double s) const;

  /// Same as inverse_derivative but always runs the safeguarded root finder,
  /// even when the closed form applies.
  double inverse_derivative_iterative(double s) const;

 private:
  std::size_t count_ = 0;
  double linear_ = 0.0;
  double cubic_ = 0.0;
  double offset_ = 0.0;
};

/// The parameter t at which the pooled group value (at dual level t + beta)
/// meets the attached node's value (at dual level -t):
///   group.inverse_derivative(t + beta) == attach.inverse_derivative(-t).
/// The gap between the two sides is strictly increasing in t, so the root is
/// unique. Solved as the single equation group'(x) + attach'(x) = beta.
double equilibrium_t(const LossGroup& group, double beta, const Loss& attach);

namespace detail {

/// Root of an increasing cubic c3 * x^3 + c1 * x + c0 = s (c1 > 0, c3 >= 0) by
/// Newton steps safeguarded with bisection, after geometric expansion of a
/// bracket around the initial guess. Stops at |residual| <= 1e-12 * (1 + |s|),
/// a collapsed bracket, or 200 iterations.
double solve_increasing_cubic(double c3, double c1, double c0, double s);

}  // namespace detail

}  // namespace isotree
