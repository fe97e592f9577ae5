#include "lvann/core/special.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "lvann/error.hpp"

namespace lvann {

double unit_ball_volume(std::size_t b) {
    require(b >= 1, ErrorCode::InvalidArgument, "unit_ball_volume: b must be >= 1");
    const double half = 0.5 * static_cast<double>(b);
    return std::exp(half * std::log(std::numbers::pi) - std::lgamma(half + 1.0));
}

double relative_cap_volume(std::size_t b, double u) {
    require(b >= 1, ErrorCode::InvalidArgument, "relative_cap_volume: b must be >= 1");
    require(u >= 0.0 && u <= 1.0, ErrorCode::InvalidArgument,
            "relative_cap_volume: u must lie in [0, 1]");
    if (u == 1.0) {
        return 0.0;
    }
    if (u == 0.0) {
        return 0.5;
    }
    const double a = 0.5 * (static_cast<double>(b) + 1.0);
    return 0.5 * boost::math::ibeta(a, 0.5, 1.0 - u * u);
}

double gaussian_tail(double eta) {
    return 0.5 * std::erfc(eta / std::numbers::sqrt2);
}

double gaussian_tail_inverse(double p) {
    require(p > 0.0 && p < 1.0, ErrorCode::InvalidArgument,
            "gaussian_tail_inverse: p must lie in (0, 1)");
    return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double chord_cos(double s) { return 1.0 - 0.5 * s * s; }

double chord_sin(double s) {
    const double a = chord_cos(s);
    return std::sqrt(std::max(0.0, 1.0 - a * a));
}

double gaussian_orthant(double s, double eta_u, double eta_q) {
    require(s > 0.0 && s < 2.0, ErrorCode::InvalidArgument,
            "gaussian_orthant: s must lie in (0, 2)");
    const double alpha = chord_cos(s);
    const double beta = chord_sin(s);
    const auto phi = [](double t) {
        return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
    };
    const auto integrand = [&](double t) {
        return phi(t) * gaussian_tail((eta_q - alpha * t) / beta);
    };

    // Beyond 40 standard deviations the Gaussian factor is below 1e-300.
    const double lo = std::max(eta_u, -40.0);
    const double hi = std::max(eta_u, 0.0) + 40.0;
    if (lo >= hi) {
        return 0.0;
    }
    // The inner tail switches from ~0 to ~1 around t = eta_q / alpha, sharply
    // when beta is small; split there so each panel is smooth.
    double cuts[4] = {lo, hi, hi, hi};
    std::size_t ncuts = 2;
    if (alpha != 0.0) {
        const double knee = eta_q / alpha;
        if (knee > lo && knee < hi) {
            cuts[1] = knee;
            cuts[2] = hi;
            ncuts = 3;
        }
    }
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < ncuts; ++i) {
        double err = 0.0;
        total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            integrand, cuts[i], cuts[i + 1], 25, 1e-13, &err);
        if (err > 1e-10) {
            fail(ErrorCode::Estimation, "gaussian_orthant: quadrature did not reach 1e-10");
        }
    }
    return std::clamp(total, 0.0, 1.0);
}

}  // namespace lvann
