#include "lvann/core/decomp.hpp"

#include <string>

#include "lvann/error.hpp"

namespace lvann {

Eigen::MatrixXd OrthoDecomp::dense() const {
    const std::size_t d = dim();
    Eigen::MatrixXd m(d, d);
    std::vector<double> e(d, 0.0);
    std::vector<double> col(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        e[j] = 1.0;
        apply_stacked(e, col);
        for (std::size_t i = 0; i < d; ++i) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
        }
        e[j] = 0.0;
    }
    return m;
}

CoordinateDecomp::CoordinateDecomp(std::size_t d, std::size_t block) : d_(d), block_(block) {
    require(d >= 1 && block >= 1 && d % block == 0, ErrorCode::InvalidArgument,
            "CoordinateDecomp: block size must divide d");
}

void CoordinateDecomp::apply_stacked(std::span<const double> x, std::span<double> out) const {
    require(x.size() == d_ && out.size() == d_, ErrorCode::DimensionMismatch,
            "CoordinateDecomp: dimension mismatch");
    std::copy(x.begin(), x.end(), out.begin());
}

DenseDecomp::DenseDecomp(Eigen::MatrixXd rows, std::size_t block)
    : rows_(std::move(rows)), block_(block) {
    require(rows_.rows() == rows_.cols() && rows_.rows() >= 1, ErrorCode::InvalidArgument,
            "DenseDecomp: matrix must be square");
    require(block >= 1 && static_cast<std::size_t>(rows_.rows()) % block == 0,
            ErrorCode::InvalidArgument, "DenseDecomp: block size must divide d");
}

void DenseDecomp::apply_stacked(std::span<const double> x, std::span<double> out) const {
    require(x.size() == dim() && out.size() == dim(), ErrorCode::DimensionMismatch,
            "DenseDecomp: dimension mismatch");
    const auto d = static_cast<Eigen::Index>(dim());
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), d);
    Eigen::Map<Eigen::VectorXd> ov(out.data(), d);
    ov.noalias() = rows_ * xv;
}

Eigen::MatrixXd DenseDecomp::apply_batch(const Eigen::MatrixXd& X) const {
    require(static_cast<std::size_t>(X.rows()) == dim(), ErrorCode::DimensionMismatch,
            "DenseDecomp: batch row count must equal d");
    return rows_ * X;
}

Eigen::MatrixXd random_rotation(std::size_t d, RngStream& rng) {
    require(d >= 1, ErrorCode::InvalidArgument, "random_rotation: d must be >= 1");
    const auto n = static_cast<Eigen::Index>(d);
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            g(i, j) = rng.normal();
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd& r = qr.matrixQR();
    for (Eigen::Index j = 0; j < n; ++j) {
        if (r(j, j) < 0.0) {
            q.col(j) = -q.col(j);
        }
    }
    return q;
}

std::vector<RealVector> apply_decomp(const OrthoDecomp& decomp, const RealVector& x) {
    require(x.dim() == decomp.dim(), ErrorCode::DimensionMismatch,
            "apply_decomp: vector dim " + std::to_string(x.dim()) + " != decomposition dim " +
                std::to_string(decomp.dim()));
    std::vector<double> stacked(decomp.dim());
    decomp.apply_stacked(x.view(), stacked);
    const std::size_t bd = decomp.block_dim();
    std::vector<RealVector> parts;
    parts.reserve(decomp.num_blocks());
    for (std::size_t i = 0; i < decomp.num_blocks(); ++i) {
        parts.emplace_back(std::vector<double>(stacked.begin() + i * bd, stacked.begin() + (i + 1) * bd));
    }
    return parts;
}

}  // namespace lvann
