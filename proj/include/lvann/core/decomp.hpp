#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lvann/core/real_vector.hpp"
#include "lvann/core/rng.hpp"

namespace lvann {

/// An orthogonal decomposition of R^d into d / d' blocks of d' orthonormal
/// rows. Implementations apply all stacked rows at once; block i of the
/// output occupies [i*d', (i+1)*d').
class OrthoDecomp {
public:
    virtual ~OrthoDecomp() = default;

    virtual std::size_t dim() const noexcept = 0;
    virtual std::size_t block_dim() const noexcept = 0;
    std::size_t num_blocks() const noexcept { return dim() / block_dim(); }

    // out.size() == x.size() == dim().
    virtual void apply_stacked(std::span<const double> x, std::span<double> out) const = 0;

    // Row-stacked matrix, built by applying the map to the standard basis.
    Eigen::MatrixXd dense() const;
};

/// Blocks are consecutive coordinate slices.
class CoordinateDecomp final : public OrthoDecomp {
public:
    CoordinateDecomp(std::size_t d, std::size_t block);

    std::size_t dim() const noexcept override { return d_; }
    std::size_t block_dim() const noexcept override { return block_; }
    void apply_stacked(std::span<const double> x, std::span<double> out) const override;

private:
    std::size_t d_;
    std::size_t block_;
};

/// Blocks are consecutive row groups of an orthogonal matrix.
class DenseDecomp : public OrthoDecomp {
public:
    DenseDecomp(Eigen::MatrixXd rows, std::size_t block);

    std::size_t dim() const noexcept override { return static_cast<std::size_t>(rows_.rows()); }
    std::size_t block_dim() const noexcept override { return block_; }
    void apply_stacked(std::span<const double> x, std::span<double> out) const override;

    const Eigen::MatrixXd& matrix() const noexcept { return rows_; }

    // Columns of X are points; returns R X.
    Eigen::MatrixXd apply_batch(const Eigen::MatrixXd& X) const;

private:
    Eigen::MatrixXd rows_;
    std::size_t block_;
};

/// Haar-distributed d x d orthogonal matrix: QR of a Gaussian matrix with the
/// signs of Q's columns fixed so that R has a positive diagonal.
Eigen::MatrixXd random_rotation(std::size_t d, RngStream& rng);

std::vector<RealVector> apply_decomp(const OrthoDecomp& decomp, const RealVector& x);

}  // namespace lvann
