#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace lvann {

/// Dense point in R^d. Construction rejects NaN and infinite coordinates, so
/// every RealVector has a finite norm.
class RealVector {
public:
    RealVector() = default;
    explicit RealVector(std::size_t dim);  // zero vector
    explicit RealVector(std::vector<double> coords);
    RealVector(std::initializer_list<double> coords);

    static RealVector basis(std::size_t dim, std::size_t axis);

    std::size_t dim() const noexcept { return coords_.size(); }
    bool empty() const noexcept { return coords_.empty(); }

    double operator[](std::size_t i) const noexcept { return coords_[i]; }

    std::span<const double> view() const noexcept { return coords_; }
    const std::vector<double>& coords() const noexcept { return coords_; }

    double norm() const;
    double squared_norm() const;

    RealVector scaled(double factor) const;
    RealVector operator-(const RealVector& other) const;
    RealVector operator+(const RealVector& other) const;

    bool operator==(const RealVector& other) const = default;

private:
    std::vector<double> coords_;
};

double distance(const RealVector& a, const RealVector& b);
double distance(std::span<const double> a, std::span<const double> b);

// Throws InvalidArgument if any coordinate is not finite.
void check_finite(std::span<const double> coords);

}  // namespace lvann
