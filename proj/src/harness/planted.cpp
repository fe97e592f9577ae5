#include <algorithm>
#include <cmath>
#include <sstream>

#include "lvann/error.hpp"
#include "lvann/harness/harness.hpp"
#include "lvann/kernels/kernels.hpp"

namespace lvann {

std::string PlantedAudit::describe() const {
    std::ostringstream out;
    out << (ok ? "audit ok" : "audit FAILED") << ": max planted distance " << max_planted
        << ", min distance to other points " << min_far << ", min pairwise " << min_pairwise;
    return out.str();
}

namespace {

bool clear_of(const std::vector<RealVector>& points, std::span<const double> x, double c2,
              std::optional<std::size_t> skip = std::nullopt) {
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (skip && *skip == i) {
            continue;
        }
        if (kernels::squared_distance(points[i].view(), x) <= c2) {
            return false;
        }
    }
    return true;
}

[[noreturn]] void out_of_budget(const std::string& what, std::size_t d, double c) {
    std::ostringstream msg;
    msg << "gen_planted: rejection budget exhausted while placing " << what << " (d=" << d << ", c=" << c
        << "); lower c or raise d so random points separate";
    fail(ErrorCode::ParameterInfeasible, msg.str());
}

}  // namespace

PlantedInstance gen_planted(std::size_t n, std::size_t d, double c, std::size_t num_queries, std::uint64_t seed) {
    require(n >= 2, ErrorCode::InvalidArgument, "gen_planted: need n >= 2");
    require(d >= 1, ErrorCode::InvalidArgument, "gen_planted: need d >= 1");
    require(c > 1.0, ErrorCode::InvalidArgument, "gen_planted: c must exceed 1");
    PlantedInstance inst;
    inst.c = c;
    inst.seed = seed;
    inst.data.dim = d;
    inst.data.source = "planted(seed=" + std::to_string(seed) + ")";
    const double c2 = c * c;
    const double base = c * std::sqrt(128.0 / static_cast<double>(d));
    const std::size_t budget = 50;

    RngStream root(seed, "planted");
    RngStream pts = root.child("points");
    for (std::size_t i = 0; i < n; ++i) {
        bool placed = false;
        for (std::size_t a = 0; a < budget && !placed; ++a) {
            const double sigma = base * pts.uniform(0.09, 0.2);
            std::vector<double> v(d);
            for (double& x : v) {
                x = sigma * pts.normal();
            }
            if (clear_of(inst.data.points, v, c2)) {
                inst.data.points.emplace_back(std::move(v));
                placed = true;
            }
        }
        if (!placed) {
            out_of_budget("point " + std::to_string(i), d, c);
        }
    }

    RngStream qs = root.child("queries");
    for (std::size_t j = 0; j < num_queries; ++j) {
        bool placed = false;
        for (std::size_t a = 0; a < budget && !placed; ++a) {
            const auto id = static_cast<std::uint32_t>(qs.uniform_below(n));
            std::vector<double> dir(d);
            double norm = 0.0;
            for (double& x : dir) {
                x = qs.normal();
                norm += x * x;
            }
            norm = std::sqrt(norm);
            const double dist = 1.0 - qs.uniform();  // (0, 1]
            const RealVector& p = inst.data.points[id];
            std::vector<double> q(d);
            for (std::size_t k = 0; k < d; ++k) {
                q[k] = p[k] + dist * dir[k] / norm;
            }
            if (clear_of(inst.data.points, q, c2, id)) {
                inst.queries.emplace_back(std::move(q));
                inst.planted.push_back(id);
                placed = true;
            }
        }
        if (!placed) {
            out_of_budget("query " + std::to_string(j), d, c);
        }
    }
    inst.audit = audit_planted(inst);
    require(inst.audit.ok, ErrorCode::VerificationFailure, "gen_planted: " + inst.audit.describe());
    return inst;
}

PlantedAudit audit_planted(const PlantedInstance& inst) {
    PlantedAudit a;
    a.min_far = INFINITY;
    a.min_pairwise = INFINITY;
    const auto& pts = inst.data.points;
    for (std::size_t j = 0; j < inst.queries.size(); ++j) {
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double dist = distance(pts[i], inst.queries[j]);
            if (i == inst.planted[j]) {
                a.max_planted = std::max(a.max_planted, dist);
            } else {
                a.min_far = std::min(a.min_far, dist);
            }
        }
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t k = i + 1; k < pts.size(); ++k) {
            a.min_pairwise = std::min(a.min_pairwise, distance(pts[i], pts[k]));
        }
    }
    a.ok = a.max_planted <= inst.r && a.min_far > inst.c * inst.r && a.min_pairwise > inst.c * inst.r;
    return a;
}

}  // namespace lvann

namespace lvann {

PlantedInstance gen_sphere_planted(std::size_t n, std::size_t m, double r, double c, std::size_t num_queries,
                                   std::uint64_t seed) {
    require(n >= 1 && m >= 2, ErrorCode::InvalidArgument, "gen_sphere_planted: need n >= 1 and m >= 2");
    require(r > 0.0 && r < 2.0 && c > 1.0, ErrorCode::InvalidArgument, "gen_sphere_planted: need 0 < r < 2, c > 1");
    PlantedInstance inst;
    inst.r = r;
    inst.c = c;
    inst.seed = seed;
    inst.data.dim = m;
    inst.data.source = "sphere-planted(seed=" + std::to_string(seed) + ")";
    RngStream root(seed, "sphere-planted");
    RngStream pts = root.child("points");
    const auto unit = [m](RngStream& rng) {
        std::vector<double> v(m);
        double norm = 0.0;
        for (double& x : v) {
            x = rng.normal();
            norm += x * x;
        }
        norm = std::sqrt(norm);
        for (double& x : v) {
            x /= norm;
        }
        return v;
    };
    for (std::size_t i = 0; i < n; ++i) {
        inst.data.points.emplace_back(unit(pts));
    }
    RngStream qs = root.child("queries");
    for (std::size_t j = 0; j < num_queries; ++j) {
        const auto id = static_cast<std::uint32_t>(qs.uniform_below(n));
        const RealVector& p = inst.data.points[id];
        // Tangent direction at p, then the great-circle point at chord s.
        std::vector<double> u = unit(qs);
        const double along = kernels::dot(u, p.view());
        double norm = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            u[k] -= along * p[k];
            norm += u[k] * u[k];
        }
        norm = std::sqrt(norm);
        const double s = r * (1.0 - qs.uniform());
        const double theta = 2.0 * std::asin(s / 2.0);
        std::vector<double> q(m);
        double qn = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            q[k] = std::cos(theta) * p[k] + std::sin(theta) * u[k] / norm;
            qn += q[k] * q[k];
        }
        qn = std::sqrt(qn);
        for (double& x : q) {
            x /= qn;
        }
        inst.queries.emplace_back(std::move(q));
        inst.planted.push_back(id);
    }
    inst.audit.max_planted = 0.0;
    for (std::size_t j = 0; j < inst.queries.size(); ++j) {
        inst.audit.max_planted =
            std::max(inst.audit.max_planted, distance(inst.data.points[inst.planted[j]], inst.queries[j]));
    }
    inst.audit.min_far = NAN;
    inst.audit.min_pairwise = NAN;
    inst.audit.ok = inst.audit.max_planted <= r * (1.0 + 1e-12);
    return inst;
}

}  // namespace lvann
