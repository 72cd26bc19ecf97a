#pragma once

#include <Eigen/Dense>

#include "pricesim/errors.hpp"

namespace pricesim {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Which halfspace survives a cut at linear level p along direction x.
/// RetainBelow keeps {theta : x'theta <= p} (price rejected);
/// RetainAbove keeps {theta : x'theta >= p} (price accepted).
enum class CutSide { RetainBelow, RetainAbove };

struct SupportBounds {
    double lower = 0.0;     // min over the ellipsoid of x'theta
    double upper = 0.0;     // max over the ellipsoid of x'theta
    double halfwidth = 0.0; // sqrt(x'Ax); upper - lower == 2*halfwidth

    double width() const { return upper - lower; }
    double midpoint() const { return 0.5 * (lower + upper); }
};

// Directions with x'Ax at or below this are treated as numerically flat.
// Must sit near the bottom of the double range: adversarial reserve streams
// legitimately drive x'Ax through hundreds of orders of magnitude before the
// mechanism stops refining.
inline constexpr double kFlatDirectionFloor = 1e-280;

// Cuts with |alpha| within this margin of 1 collapse the retained cap to a
// point and are rejected as invalid.
inline constexpr double kCutDegeneracyMargin = 1e-9;

/// Knowledge set E = {theta : (theta - c)' A^-1 (theta - c) <= 1} with A
/// symmetric positive definite and dim >= 2. Immutable; updates return new
/// values, so instances are freely shareable across threads.
class Ellipsoid {
public:
    /// Ball of radius R at the origin: A = R^2 I, c = 0.
    static Ellipsoid ball(int dim, double radius);

    /// Validating constructor for externally supplied shapes (O(n^3) check).
    static Ellipsoid from_parts(Vector center, Matrix shape);

    int dim() const { return static_cast<int>(center_.size()); }
    const Vector& center() const { return center_; }
    const Matrix& shape() const { return shape_; }

    /// x'Ax, the squared halfwidth along x.
    double quad_form(const Vector& x) const;

    /// b = Ax / sqrt(x'Ax). Throws DegenerateDirection when flat along x.
    Vector direction_vector(const Vector& x) const;

    /// Support interval of x'theta over the ellipsoid: x'(c -/+ b).
    SupportBounds support_bounds(const Vector& x) const;

    /// Loewner-John ellipsoid of the cap retained after cutting at the
    /// hyperplane x'theta = x'c - alpha*sqrt(x'Ax). Valid alpha range is
    /// [-1/n, 1) for RetainBelow and (-1, 1/n] for RetainAbove, shrunk by
    /// the degeneracy margin at the collapsing end.
    Ellipsoid cut(const Vector& x, double alpha, CutSide side) const;

    double volume() const;     // V_n * sqrt(det A)
    double log_volume() const; // computed via log-det; safe after many cuts
    double smallest_eigenvalue() const;

    /// (theta - c)' A^-1 (theta - c) <= 1 + 1e-8, via a linear solve.
    bool contains(const Vector& theta) const;

private:
    Ellipsoid(Vector center, Matrix shape);

    Vector center_;
    Matrix shape_;
};

} // namespace pricesim
