#pragma once

#include <cstddef>

namespace lvann {

/// Volume of the unit ball in R^b.
double unit_ball_volume(std::size_t b);

/// Fraction of the unit b-ball lying beyond the hyperplane at distance u from
/// the centre, I_b(u), for 0 <= u <= 1.
double relative_cap_volume(std::size_t b, double u);

/// F(eta) = P(Z >= eta) for a standard normal Z.
double gaussian_tail(double eta);

/// Inverse of gaussian_tail on (0, 1).
double gaussian_tail_inverse(double p);

/// G(s, eta_u, eta_q) = P(<z,u> >= eta_u and <z,q> >= eta_q) for a standard
/// Gaussian z and unit vectors u, q at distance s, 0 < s < 2.
double gaussian_orthant(double s, double eta_u, double eta_q);

// Cosine and sine of the angle between unit vectors at distance s.
double chord_cos(double s);
double chord_sin(double s);

}  // namespace lvann
