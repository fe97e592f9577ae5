#include <cmath>
#include <sstream>

#include "lvann/error.hpp"
#include "lvann/harness/harness.hpp"

namespace lvann {

WilsonInterval wilson(std::uint64_t successes, std::uint64_t trials, double z) {
    require(trials > 0 && successes <= trials, ErrorCode::InvalidArgument, "wilson: need 0 <= k <= n, n > 0");
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    WilsonInterval w;
    w.centre = (p + z2 / (2.0 * n)) / denom;
    w.radius = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return w;
}

BallTorusModel::BallTorusModel(std::size_t b, double w) : b_(b), w_(w) {
    require(b >= 1 && w > 0.0, ErrorCode::InvalidArgument, "BallTorusModel: need b >= 1, w > 0");
}

std::string BallTorusModel::name() const {
    std::ostringstream out;
    out << "ball-lattice torus b=" << b_ << " w=" << w_;
    return out.str();
}

namespace {

// Distance on the torus of side 3w to the ball centre.
bool in_ball(std::span<const double> x, std::span<const double> centre, double w) {
    const double period = 3.0 * w;
    double sq = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        double t = x[k] - centre[k];
        t -= period * std::floor(t / period + 0.5);
        sq += t * t;
    }
    return sq <= w * w;
}

void pair_at(RngStream& rng, std::span<const double> x, double dist, std::span<double> y) {
    double norm = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        y[k] = rng.normal();
        norm += y[k] * y[k];
    }
    norm = std::sqrt(norm);
    for (std::size_t k = 0; k < x.size(); ++k) {
        y[k] = x[k] + dist * y[k] / norm;
    }
}

}  // namespace

TrialOutcome BallTorusModel::trial(RngStream& rng, double r, double cr) const {
    const double period = 3.0 * w_;
    std::vector<double> centre(b_);
    std::vector<double> x(b_);
    std::vector<double> y(b_);
    for (std::size_t k = 0; k < b_; ++k) {
        centre[k] = rng.uniform(0.0, period);
    }
    TrialOutcome out;
    for (double& v : x) {
        v = rng.uniform(0.0, period);
    }
    pair_at(rng, x, r, y);
    out.close_both = in_ball(x, centre, w_) && in_ball(y, centre, w_);
    for (double& v : x) {
        v = rng.uniform(0.0, period);
    }
    pair_at(rng, x, cr, y);
    out.far_both = in_ball(x, centre, w_) && in_ball(y, centre, w_);
    for (double& v : x) {
        v = rng.uniform(0.0, period);
    }
    out.single = in_ball(x, centre, w_);
    return out;
}

TrialOutcome UniversalModel::trial(RngStream&, double, double) const { return {true, true, true}; }

std::string MCEstimate::describe() const {
    std::ostringstream out;
    out << trials << " trials: p1=" << p1 << " +- " << p1_ci.radius << ", p2=" << p2 << " +- " << p2_ci.radius
        << ", q=" << q << " +- " << q_ci.radius << ", rho=" << rho
        << (ordering_ok ? "" : " (ordering p2 < p1 <= q violated)");
    return out.str();
}

MCEstimate estimate_mc_params(const McTrialModel& model, double r, double c, std::uint64_t trials,
                              std::uint64_t seed) {
    require(trials >= 1000, ErrorCode::InvalidArgument, "estimate_mc_params: need at least 1000 trials");
    require(r > 0.0 && c > 1.0, ErrorCode::InvalidArgument, "estimate_mc_params: need r > 0 and c > 1");
    MCEstimate e;
    e.trials = trials;
    RngStream rng(seed, "estimate");
    for (std::uint64_t t = 0; t < trials; ++t) {
        const TrialOutcome o = model.trial(rng, r, c * r);
        e.close_hits += o.close_both;
        e.far_hits += o.far_both;
        e.single_hits += o.single;
    }
    const double n = static_cast<double>(trials);
    e.p1 = static_cast<double>(e.close_hits) / n;
    e.p2 = static_cast<double>(e.far_hits) / n;
    e.q = static_cast<double>(e.single_hits) / n;
    e.p1_ci = wilson(e.close_hits, trials);
    e.p2_ci = wilson(e.far_hits, trials);
    e.q_ci = wilson(e.single_hits, trials);
    e.ordering_ok = e.p2_ci.centre + e.p2_ci.radius < e.p1_ci.centre - e.p1_ci.radius &&
                    e.p1_ci.centre - e.p1_ci.radius <= e.q_ci.centre + e.q_ci.radius;
    if (e.close_hits == 0 || e.far_hits == 0 || e.single_hits == e.far_hits) {
        std::ostringstream msg;
        msg << "estimate_mc_params: exponent undefined for " << model.name() << " (p1=" << e.p1 << ", p2=" << e.p2
            << ", q=" << e.q << ")";
        fail(ErrorCode::Estimation, msg.str());
    }
    e.rho = std::log(e.q / e.p1) / std::log(e.q / e.p2);
    return e;
}

std::string RhoBoundReport::describe() const {
    std::ostringstream out;
    out << "reference 1/c^p = " << reference << ", band [" << lower << ", 1]: " << (in_band ? "inside" : "outside")
        << (ordering_ok ? "" : "; ordering gate FAILED");
    return out.str();
}

RhoBoundReport check_rho_bound(const MCEstimate& est, double c, double p, double slack) {
    RhoBoundReport r;
    r.reference = 1.0 / std::pow(c, p);
    r.lower = r.reference - slack;
    r.in_band = est.rho >= r.lower && est.rho <= 1.0;
    r.ordering_ok = est.ordering_ok;
    return r;
}

}  // namespace lvann
