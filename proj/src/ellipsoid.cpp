#include "pricesim/ellipsoid.hpp"

#include <cmath>

namespace pricesim {

namespace {

// log of the unit-ball volume in dimension n: (n/2) log(pi) - lgamma(n/2 + 1).
double log_unit_ball_volume(int n) {
    return 0.5 * n * std::log(M_PI) - std::lgamma(0.5 * n + 1.0);
}

} // namespace

Ellipsoid::Ellipsoid(Vector center, Matrix shape)
    : center_(std::move(center)), shape_(std::move(shape)) {}

Ellipsoid Ellipsoid::ball(int dim, double radius) {
    if (dim < 2) {
        throw InvalidDimension("ellipsoid dimension must be >= 2, got " + std::to_string(dim));
    }
    if (!(radius > 0.0)) {
        throw InvalidRadius("ellipsoid radius must be positive, got " + std::to_string(radius));
    }
    return Ellipsoid(Vector::Zero(dim), radius * radius * Matrix::Identity(dim, dim));
}

Ellipsoid Ellipsoid::from_parts(Vector center, Matrix shape) {
    const auto n = center.size();
    if (n < 2) {
        throw InvalidDimension("ellipsoid dimension must be >= 2");
    }
    if (shape.rows() != n || shape.cols() != n) {
        throw InvalidDimension("shape matrix does not match center dimension");
    }
    const double asym = (shape - shape.transpose()).cwiseAbs().maxCoeff();
    const double scale = shape.cwiseAbs().maxCoeff();
    if (asym > 1e-10 * std::max(scale, 1.0)) {
        throw NumericalFailure("shape matrix is not symmetric");
    }
    Matrix sym = 0.5 * (shape + shape.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw NumericalFailure("eigen-solve failed while validating shape");
    }
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw NumericalFailure("shape matrix is not positive definite");
    }
    return Ellipsoid(std::move(center), std::move(sym));
}

double Ellipsoid::quad_form(const Vector& x) const {
    if (x.size() != center_.size()) {
        throw InvalidDimension("direction dimension does not match ellipsoid");
    }
    return x.dot(shape_ * x);
}

Vector Ellipsoid::direction_vector(const Vector& x) const {
    Vector ax = shape_ * x;
    const double q = x.dot(ax);
    if (!(q > kFlatDirectionFloor)) {
        throw DegenerateDirection("ellipsoid is numerically flat along the requested direction");
    }
    return ax / std::sqrt(q);
}

SupportBounds Ellipsoid::support_bounds(const Vector& x) const {
    Vector b = direction_vector(x);
    const double xc = x.dot(center_);
    const double h = x.dot(b); // == sqrt(x'Ax)
    return SupportBounds{xc - h, xc + h, h};
}

Ellipsoid Ellipsoid::cut(const Vector& x, double alpha, CutSide side) const {
    const double n = static_cast<double>(dim());
    // Mirror RetainAbove onto the RetainBelow parameterization.
    const double a = (side == CutSide::RetainBelow) ? alpha : -alpha;
    if (a < -1.0 / n || a >= 1.0 - kCutDegeneracyMargin) {
        throw InvalidCutPosition("cut position alpha = " + std::to_string(alpha) +
                                 " outside valid range for this side");
    }
    Vector b = direction_vector(x);

    const double scale = n * n * (1.0 - a * a) / (n * n - 1.0);
    const double rank1 = 2.0 * (1.0 + n * a) / ((n + 1.0) * (1.0 + a));
    const double step = (1.0 + n * a) / (n + 1.0);

    Matrix next = scale * (shape_ - rank1 * (b * b.transpose()));
    next = 0.5 * (next + next.transpose().eval()); // re-symmetrize
    Vector c = (side == CutSide::RetainBelow) ? Vector(center_ - step * b)
                                              : Vector(center_ + step * b);
    return Ellipsoid(std::move(c), std::move(next));
}

double Ellipsoid::log_volume() const {
    Eigen::LLT<Matrix> llt(shape_);
    if (llt.info() != Eigen::Success) {
        throw NumericalFailure("Cholesky factorization failed in log_volume");
    }
    double half_logdet = 0.0;
    const Matrix& l = llt.matrixLLT();
    for (int i = 0; i < dim(); ++i) {
        half_logdet += std::log(l(i, i));
    }
    return log_unit_ball_volume(dim()) + half_logdet;
}

double Ellipsoid::volume() const { return std::exp(log_volume()); }

double Ellipsoid::smallest_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(shape_, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw NumericalFailure("symmetric eigen-solve did not converge");
    }
    return es.eigenvalues().minCoeff();
}

bool Ellipsoid::contains(const Vector& theta) const {
    if (theta.size() != center_.size()) {
        throw InvalidDimension("point dimension does not match ellipsoid");
    }
    Eigen::LLT<Matrix> llt(shape_);
    if (llt.info() != Eigen::Success) {
        throw NumericalFailure("Cholesky factorization failed in contains");
    }
    Vector d = theta - center_;
    Vector z = llt.solve(d);
    return d.dot(z) <= 1.0 + 1e-8;
}

} // namespace pricesim
