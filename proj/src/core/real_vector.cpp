#include "lvann/core/real_vector.hpp"

#include <cmath>
#include <string>

#include "lvann/error.hpp"
#include "lvann/kernels/kernels.hpp"

namespace lvann {

void check_finite(std::span<const double> coords) {
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (!std::isfinite(coords[i])) {
            fail(ErrorCode::InvalidArgument,
                 "non-finite coordinate at index " + std::to_string(i));
        }
    }
}

RealVector::RealVector(std::size_t dim) : coords_(dim, 0.0) {}

RealVector::RealVector(std::vector<double> coords) : coords_(std::move(coords)) {
    check_finite(coords_);
}

RealVector::RealVector(std::initializer_list<double> coords) : coords_(coords) {
    check_finite(coords_);
}

RealVector RealVector::basis(std::size_t dim, std::size_t axis) {
    require(axis < dim, ErrorCode::InvalidArgument, "basis axis out of range");
    RealVector e(dim);
    e.coords_[axis] = 1.0;
    return e;
}

double RealVector::squared_norm() const {
    return kernels::dot(coords_, coords_);
}

double RealVector::norm() const { return std::sqrt(squared_norm()); }

RealVector RealVector::scaled(double factor) const {
    std::vector<double> out(coords_);
    for (double& v : out) {
        v *= factor;
    }
    return RealVector(std::move(out));
}

RealVector RealVector::operator-(const RealVector& other) const {
    require(dim() == other.dim(), ErrorCode::DimensionMismatch, "vector subtraction dims differ");
    std::vector<double> out(coords_);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] -= other.coords_[i];
    }
    return RealVector(std::move(out));
}

RealVector RealVector::operator+(const RealVector& other) const {
    require(dim() == other.dim(), ErrorCode::DimensionMismatch, "vector addition dims differ");
    std::vector<double> out(coords_);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] += other.coords_[i];
    }
    return RealVector(std::move(out));
}

double distance(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), ErrorCode::DimensionMismatch, "distance dims differ");
    return std::sqrt(kernels::squared_distance(a, b));
}

double distance(const RealVector& a, const RealVector& b) {
    return distance(a.view(), b.view());
}

}  // namespace lvann
