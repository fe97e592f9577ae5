#include <algorithm>
#include <cmath>
#include <sstream>

#include "lvann/core/special.hpp"
#include "lvann/error.hpp"
#include "lvann/sphere/spherical.hpp"

namespace lvann {

double tradeoff_slack_general(double r, double c, double rho_u, double rho_q) {
    const double ar = chord_cos(r);
    const double acr = chord_cos(c * r);
    const double br = chord_sin(r);
    const double bcr = chord_sin(c * r);
    return (1.0 - ar * acr) * std::sqrt(rho_q) + (ar - acr) * std::sqrt(rho_u) - br * bcr;
}

double tradeoff_slack_data_dependent(double c, double rho_u, double rho_q) {
    const double c2 = c * c;
    return c2 * std::sqrt(rho_q) + (c2 - 1.0) * std::sqrt(rho_u) - std::sqrt(2.0 * c2 - 1.0);
}

std::string ThresholdSolution::describe() const {
    std::ostringstream out;
    out << "eta_u=" << eta_u << " eta_q=" << eta_q;
    const char* names[3] = {"F(eta_u)/G(r)", "F(eta_q)/G(r)", "G(cr)/G(r)"};
    for (int i = 0; i < 3; ++i) {
        out << ' ' << names[i] << '=' << ratio[i] << " (target " << target[i] << ')';
    }
    out << " worst=" << worst;
    return out.str();
}

namespace {

void check_inputs(double r, double c, double rho_u, double rho_q, double n, double K) {
    require(r > 0.0 && c > 1.0 && c * r < 2.0, ErrorCode::InvalidArgument,
            "thresholds: need r > 0, c > 1 and c r < 2");
    require(rho_u >= 0.0 && rho_q >= 0.0 && rho_q <= 1.0 && rho_u <= 1.0, ErrorCode::InvalidArgument,
            "thresholds: rho_u and rho_q must lie in [0, 1]");
    require(n > 1.0 && K > 0.0, ErrorCode::InvalidArgument, "thresholds: need n > 1 and K > 0");
}

}  // namespace

ThresholdSolution evaluate_thresholds(double r, double c, double rho_u, double rho_q, double n, double K,
                                      double eta_u, double eta_q, double slack) {
    check_inputs(r, c, rho_u, rho_q, n, K);
    ThresholdSolution s;
    s.eta_u = eta_u;
    s.eta_q = eta_q;
    const double gr = gaussian_orthant(r, eta_u, eta_q);
    const double gcr = gaussian_orthant(c * r, eta_u, eta_q);
    require(gr > 0.0, ErrorCode::ParameterInfeasible, "thresholds: G(r) underflows");
    const double L = std::log(n) / K;
    s.ratio[0] = gaussian_tail(eta_u) / gr;
    s.ratio[1] = gaussian_tail(eta_q) / gr;
    s.ratio[2] = gcr / gr;
    s.target[0] = std::exp(rho_u * L);
    s.target[1] = std::exp(rho_q * L);
    s.target[2] = std::exp((rho_q - 1.0) * L);
    s.worst = 0.0;
    for (int i = 0; i < 3; ++i) {
        s.worst = std::max(s.worst, s.ratio[i] / s.target[i]);
    }
    s.within_slack = s.worst <= slack;
    return s;
}

ThresholdSolution solve_thresholds(double r, double c, double rho_u, double rho_q, double n, double K,
                                   double slack) {
    check_inputs(r, c, rho_u, rho_q, n, K);
    const double gap = tradeoff_slack_general(r, c, rho_u, rho_q);
    if (gap < 0.0) {
        std::ostringstream msg;
        msg << "thresholds: (rho_u, rho_q) = (" << rho_u << ", " << rho_q
            << ") violates (1 - a(r)a(cr)) sqrt(rho_q) + (a(r) - a(cr)) sqrt(rho_u) >= b(r)b(cr) by " << -gap;
        fail(ErrorCode::ParameterInfeasible, msg.str());
    }
    const double L = std::log(n) / K;
    // F(eta_q) = F(eta_u) n^{(rho_q - rho_u)/K} makes the first two ratios hit
    // their targets together.
    const double shift = std::exp((rho_q - rho_u) * L);
    const auto eta_q_of = [&](double eu) {
        return gaussian_tail_inverse(std::min(gaussian_tail(eu) * shift, 1.0 - 1e-12));
    };
    const auto balance = [&](double eu) {
        const ThresholdSolution s = evaluate_thresholds(r, c, rho_u, rho_q, n, K, eu, eta_q_of(eu), slack);
        return std::log(s.ratio[0] / s.target[0]) - std::log(s.ratio[2] / s.target[2]);
    };

    double lo = -6.0;
    while (gaussian_tail(lo) * shift >= 0.999 && lo < 6.0) {
        lo += 0.25;
    }
    double hi = 7.0;
    require(lo < hi, ErrorCode::ParameterInfeasible, "thresholds: no admissible eta_u bracket");
    if (balance(lo) > 0.0 || balance(hi) < 0.0) {
        fail(ErrorCode::ParameterInfeasible, "thresholds: balance point outside eta_u in [" +
                                                 std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        (balance(mid) < 0.0 ? lo : hi) = mid;
    }
    const double eu = 0.5 * (lo + hi);
    ThresholdSolution s = evaluate_thresholds(r, c, rho_u, rho_q, n, K, eu, eta_q_of(eu), slack);
    if (rho_u == rho_q) {
        s = evaluate_thresholds(r, c, rho_u, rho_q, n, K, eu, eu, slack);
    }
    if (!s.within_slack) {
        fail(ErrorCode::ParameterInfeasible, "thresholds: finite-n ratios exceed targets: " + s.describe());
    }
    return s;
}

}  // namespace lvann
