#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>
#include <unordered_map>

#include "lvann/core/special.hpp"
#include "lvann/error.hpp"
#include "lvann/kernels/kernels.hpp"
#include "lvann/sphere/spherical.hpp"

namespace lvann {

void validate(const SphericalParams& p) {
    require(p.b >= 1 && p.b <= 64, ErrorCode::InvalidArgument, "spherical: b must lie in [1, 64]");
    require(p.r > 0.0 && p.c > 1.0, ErrorCode::InvalidArgument, "spherical: need r > 0 and c > 1");
    require(std::isfinite(p.eta_u) && std::isfinite(p.eta_q), ErrorCode::InvalidArgument,
            "spherical: thresholds must be finite");
    require(p.delta_s > 0.0, ErrorCode::InvalidArgument, "spherical: delta_s must be positive");
    require(pair_radius(p) < 2.0, ErrorCode::ParameterInfeasible,
            "spherical: r(1 + 2 delta_s) must stay below the sphere diameter 2");
    require(p.N >= 1, ErrorCode::InvalidArgument, "spherical: N must be positive");
}

double net_spacing(const SphericalParams& p) { return p.r * p.delta_s / std::sqrt(static_cast<double>(p.b)); }

double net_radius(const SphericalParams& p) {
    const double b = static_cast<double>(p.b);
    return std::min(2.0, 2.0 * p.r * (b + 2.0) * std::sqrt(b) + p.r * p.delta_s);
}

double pair_radius(const SphericalParams& p) { return p.r * (1.0 + 2.0 * p.delta_s); }

double net_size_estimate(const SphericalParams& p) {
    const double b = static_cast<double>(p.b);
    const double sp = net_spacing(p);
    const double h = sp * std::sqrt(b) / 2.0;
    const double shell = unit_ball_volume(p.b) * (std::pow(1.0 + h, b) - std::pow(std::max(0.0, 1.0 - h), b));
    double fraction = 1.0;
    const double R = net_radius(p);
    if (R < 2.0) {
        const double u = 1.0 - R * R / 2.0;  // first coordinate bound of the cap
        fraction = u >= 0.0 ? relative_cap_volume(p.b, u) : 1.0 - relative_cap_volume(p.b, -u);
    }
    return shell * fraction / std::pow(sp, b);
}

std::size_t required_filters(const SphericalParams& p, double net_size) {
    const double g = gaussian_orthant(pair_radius(p), p.eta_u, p.eta_q);
    require(g > 0.0, ErrorCode::ParameterInfeasible, "spherical: G(r(1 + 2 delta_s)) underflows");
    const double n = std::ceil((2.0 * std::log(std::max(net_size, 1.0)) + std::log(2.0)) / g);
    require(n < 1e8, ErrorCode::ParameterInfeasible,
            "spherical: " + std::to_string(n) + " filters needed, above the 1e8 limit");
    return static_cast<std::size_t>(n);
}

SphericalParams make_spherical_params(std::size_t b, double r, double c, double eta_u, double eta_q,
                                      double delta_s, double K) {
    SphericalParams p;
    p.b = b;
    p.r = r;
    p.c = c;
    p.eta_u = eta_u;
    p.eta_q = eta_q;
    p.delta_s = delta_s > 0.0 ? delta_s : 1.0 / static_cast<double>(b);
    p.K = K;
    validate(p);
    const double est = net_size_estimate(p);
    double size = est;
    if (est <= p.net_cap) {
        size = static_cast<double>(build_cap_net(p).size());
    }
    p.N = required_filters(p, size);
    return p;
}

// ------------------------------------------------------------------ cap cover

CapCover::CapCover(std::size_t b, double r, std::vector<double> shift) : b_(b), r_(r), shift_(std::move(shift)) {
    require(b >= 1 && r > 0.0 && shift_.size() == b, ErrorCode::InvalidArgument,
            "CapCover: need b >= 1, r > 0 and a b-dimensional shift");
}

CapCover CapCover::sample(std::size_t b, double r, RngStream& rng) {
    std::vector<double> shift(b);
    const double step = r * static_cast<double>(b);
    for (double& s : shift) {
        s = rng.uniform(0.0, step);
    }
    return CapCover(b, r, std::move(shift));
}

std::vector<std::vector<std::int32_t>> CapCover::cubes(std::span<const double> x) const {
    require(x.size() == b_, ErrorCode::DimensionMismatch, "CapCover: point dim != b");
    std::vector<std::vector<std::int32_t>> choices(b_);
    for (std::size_t k = 0; k < b_; ++k) {
        const double t = x[k] - shift_[k];
        const auto v = static_cast<std::int32_t>(std::floor(t / step()));
        choices[k].push_back(v);
        // The previous cube reaches 2r past this corner.
        if (t - step() * (v - 1) < side()) {
            choices[k].push_back(v - 1);
        }
    }
    std::vector<std::vector<std::int32_t>> out;
    std::vector<std::size_t> pick(b_, 0);
    while (true) {
        std::vector<std::int32_t> cube(b_);
        for (std::size_t k = 0; k < b_; ++k) {
            cube[k] = choices[k][pick[k]];
        }
        out.push_back(std::move(cube));
        std::size_t k = b_;
        while (k > 0) {
            --k;
            if (++pick[k] < choices[k].size()) {
                break;
            }
            pick[k] = 0;
            if (k == 0) {
                std::sort(out.begin(), out.end());
                return out;
            }
        }
        if (b_ == 0) {
            return out;
        }
    }
}

bool CapCover::contains(std::span<const std::int32_t> cube, std::span<const double> x) const {
    for (std::size_t k = 0; k < b_; ++k) {
        const double lo = shift_[k] + step() * cube[k];
        if (x[k] < lo || x[k] >= lo + side()) {
            return false;
        }
    }
    return true;
}

std::vector<double> CapCover::centre(std::span<const std::int32_t> cube) const {
    std::vector<double> o(b_);
    for (std::size_t k = 0; k < b_; ++k) {
        o[k] = shift_[k] + step() * cube[k] + side() / 2.0;
    }
    return o;
}

void CapCover::to_frame(std::span<const std::int32_t> cube, std::span<const double> x, std::span<double> out) const {
    std::vector<double> w = centre(cube);
    double norm = 0.0;
    for (double v : w) {
        norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm < 1e-12) {
        std::fill(w.begin(), w.end(), 0.0);
        w[0] = 1.0;
        norm = 1.0;
    }
    for (double& v : w) {
        v /= norm;
    }
    w[0] -= 1.0;  // reflection axis O' - e_1
    double ww = 0.0;
    double wx = 0.0;
    for (std::size_t k = 0; k < b_; ++k) {
        ww += w[k] * w[k];
        wx += w[k] * x[k];
    }
    if (ww < 1e-30) {
        std::copy(x.begin(), x.end(), out.begin());
        return;
    }
    const double f = 2.0 * wx / ww;
    for (std::size_t k = 0; k < b_; ++k) {
        out[k] = x[k] - f * w[k];
    }
}

// ------------------------------------------------------------------------ net

CapNet build_cap_net(const SphericalParams& p) {
    validate(p);
    const double est = net_size_estimate(p);
    if (est > p.net_cap) {
        std::ostringstream msg;
        msg << "spherical: verification net has ~" << est << " points (b=" << p.b << ", spacing "
            << net_spacing(p) << "), above the cap " << p.net_cap;
        fail(ErrorCode::ParameterInfeasible, msg.str());
    }
    const std::size_t b = p.b;
    const double sp = net_spacing(p);
    const double h = sp * std::sqrt(static_cast<double>(b)) / 2.0;
    const double outer = (1.0 + h) * (1.0 + h);
    const double inner = std::max(0.0, 1.0 - h) * std::max(0.0, 1.0 - h);
    const double R = net_radius(p);
    const auto K = static_cast<std::int64_t>(std::ceil((1.0 + h) / sp));

    CapNet net;
    net.b = b;
    std::vector<std::int64_t> k(b, -K);
    std::vector<double> partial(b + 1, 0.0);  // partial[i]: squared norm of coords < i
    std::size_t level = 0;
    // Depth-first walk over the grid box, pruning on the partial norm.
    while (true) {
        if (k[level] > K) {
            if (level == 0) {
                break;
            }
            k[level] = -K;
            --level;
            ++k[level];
            continue;
        }
        const double v = sp * static_cast<double>(k[level]);
        partial[level + 1] = partial[level] + v * v;
        if (partial[level + 1] > outer) {
            if (k[level] > 0) {
                k[level] = K + 1;  // larger |k| only grows the norm
            } else {
                ++k[level];
            }
            continue;
        }
        if (level + 1 < b) {
            ++level;
            continue;
        }
        const double sq = partial[b];
        if (sq >= inner && sq > 0.0) {
            const double norm = std::sqrt(sq);
            double d2 = 0.0;
            std::vector<double> g(b);
            for (std::size_t i = 0; i < b; ++i) {
                g[i] = sp * static_cast<double>(k[i]) / norm;
                const double e = g[i] - (i == 0 ? 1.0 : 0.0);
                d2 += e * e;
            }
            if (d2 <= R * R) {
                net.points.insert(net.points.end(), g.begin(), g.end());
            }
        }
        ++k[level];
    }
    return net;
}

std::vector<double> round_to_net(const SphericalParams& p, std::span<const double> y) {
    require(y.size() == p.b, ErrorCode::DimensionMismatch, "round_to_net: dim != b");
    const double sp = net_spacing(p);
    std::vector<double> g(p.b);
    double sq = 0.0;
    for (std::size_t i = 0; i < p.b; ++i) {
        g[i] = sp * std::floor(y[i] / sp + 0.5);
        sq += g[i] * g[i];
    }
    require(sq > 0.0, ErrorCode::InvalidArgument, "round_to_net: point rounds to the origin");
    const double norm = std::sqrt(sq);
    for (double& v : g) {
        v /= norm;
    }
    return g;
}

// --------------------------------------------------------------------- family

SphericalFamily::SphericalFamily(SphericalParams params, CapCover cover, std::vector<double> z, bool verified,
                                 std::size_t attempts)
    : params_(std::move(params)), cover_(std::move(cover)), z_(std::move(z)), verified_(verified),
      attempts_(attempts) {
    validate(params_);
    require(z_.size() == params_.N * params_.b, ErrorCode::InvalidArgument, "SphericalFamily: z must be N x b");
    require(cover_.dim() == params_.b, ErrorCode::InvalidArgument, "SphericalFamily: cover dim != b");
}

void SphericalFamily::filters_of(std::span<const double> g, Side side, std::vector<std::uint32_t>& out) const {
    const double eta = threshold(side);
    for (std::size_t i = 0; i < params_.N; ++i) {
        if (kernels::dot(z(i), g) >= eta) {
            out.push_back(static_cast<std::uint32_t>(i));
        }
    }
}

std::string SphVerifyReport::describe() const {
    std::ostringstream out;
    out << (ok ? "verified" : "FAILED") << ": " << net_points << " net points, " << pairs_checked
        << " near pairs";
    if (failing) {
        out << ", first uncovered pair (" << failing->first << ", " << failing->second << ")";
    }
    return out.str();
}

namespace {

std::string cell_key(std::span<const double> x, double cell) {
    std::string key(x.size() * sizeof(std::int32_t), '\0');
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto v = static_cast<std::int32_t>(std::floor(x[i] / cell));
        std::memcpy(key.data() + i * sizeof v, &v, sizeof v);
    }
    return key;
}

}  // namespace

SphVerifyReport verify_spherical_family(const SphericalFamily& family, const CapNet& net) {
    const SphericalParams& p = family.params();
    require(net.b == p.b, ErrorCode::DimensionMismatch, "verify_spherical_family: net dim != b");
    SphVerifyReport report;
    const std::size_t L = net.size();
    report.net_points = L;
    const std::size_t words = (p.N + 63) / 64;
    require(static_cast<double>(L) * static_cast<double>(words) * 16.0 <= 1.5e9, ErrorCode::ParameterInfeasible,
            "verify_spherical_family: bitsets exceed 1.5 GB");
    std::vector<std::uint64_t> U(L * words, 0);
    std::vector<std::uint64_t> Q(L * words, 0);
    std::vector<std::uint32_t> ids;
    for (std::size_t i = 0; i < L; ++i) {
        for (Side side : {Side::Update, Side::Query}) {
            ids.clear();
            family.filters_of(net.point(i), side, ids);
            std::uint64_t* row = (side == Side::Update ? U.data() : Q.data()) + i * words;
            for (std::uint32_t f : ids) {
                row[f / 64] |= std::uint64_t{1} << (f % 64);
            }
        }
    }

    const double rho = pair_radius(p);
    const double rho2 = rho * rho * (1.0 + 1e-12);
    std::unordered_map<std::string, std::vector<std::uint32_t>> grid;
    for (std::size_t i = 0; i < L; ++i) {
        grid[cell_key(net.point(i), rho)].push_back(static_cast<std::uint32_t>(i));
    }
    const std::size_t b = p.b;
    std::size_t neighbours = 1;
    for (std::size_t k = 0; k < b; ++k) {
        neighbours *= 3;
    }
    std::vector<double> probe(b);
    std::vector<std::string> cells;
    for (std::size_t i = 0; i < L; ++i) {
        const auto x = net.point(i);
        cells.clear();
        for (std::size_t code = 0; code < neighbours; ++code) {
            std::size_t rest = code;
            for (std::size_t k = 0; k < b; ++k) {
                probe[k] = x[k] + rho * (static_cast<double>(rest % 3) - 1.0);
                rest /= 3;
            }
            cells.push_back(cell_key(probe, rho));
        }
        std::sort(cells.begin(), cells.end());
        cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
        const std::span<const std::uint64_t> ui(U.data() + i * words, words);
        const std::span<const std::uint64_t> qi(Q.data() + i * words, words);
        for (const std::string& cell : cells) {
            const auto it = grid.find(cell);
            if (it == grid.end()) {
                continue;
            }
            for (std::uint32_t j : it->second) {
                if (j < i || kernels::squared_distance(x, net.point(j)) > rho2) {
                    continue;
                }
                ++report.pairs_checked;
                const std::span<const std::uint64_t> uj(U.data() + j * words, words);
                const std::span<const std::uint64_t> qj(Q.data() + j * words, words);
                if (!kernels::bitsets_intersect(ui, qj) || !kernels::bitsets_intersect(uj, qi)) {
                    report.failing = std::make_pair(i, static_cast<std::size_t>(j));
                    return report;
                }
            }
        }
    }
    report.ok = true;
    return report;
}

namespace {

std::vector<double> sample_z(const SphericalParams& p, RngStream rng) {
    std::vector<double> z(p.N * p.b);
    for (double& v : z) {
        v = rng.normal();
    }
    return z;
}

}  // namespace

SphericalFamily sample_spherical_family(const SphericalParams& params, RngStream& rng) {
    validate(params);
    const CapNet net = build_cap_net(params);
    RngStream cover_rng = rng.child("cover");
    const CapCover cover = CapCover::sample(params.b, params.r, cover_rng);
    SphVerifyReport last;
    for (std::size_t a = 0; a < params.max_resamples; ++a) {
        SphericalFamily fam(params, cover, sample_z(params, rng.child("attempt", a)), false, a + 1);
        last = verify_spherical_family(fam, net);
        if (last.ok) {
            return SphericalFamily(params, cover, fam.zs(), true, a + 1);
        }
    }
    fail(ErrorCode::VerificationFailure, "spherical family: no verified sample in " +
                                             std::to_string(params.max_resamples) + " attempts; " + last.describe());
}

SphericalFamily sample_unverified_spherical_family(const SphericalParams& params, RngStream& rng) {
    validate(params);
    RngStream cover_rng = rng.child("cover");
    CapCover cover = CapCover::sample(params.b, params.r, cover_rng);
    return SphericalFamily(params, std::move(cover), sample_z(params, rng.child("attempt", 0)), false, 1);
}

std::vector<SphFilterId> decode_spherical(const SphericalFamily& family, std::span<const double> x, Side side) {
    const SphericalParams& p = family.params();
    require(x.size() == p.b, ErrorCode::DimensionMismatch,
            "decode_spherical: point dim " + std::to_string(x.size()) + " != b=" + std::to_string(p.b));
    double sq = 0.0;
    for (double v : x) {
        sq += v * v;
    }
    require(std::abs(std::sqrt(sq) - 1.0) <= 1e-9, ErrorCode::InvalidArgument,
            "decode_spherical: point is not on the unit sphere");
    std::vector<SphFilterId> out;
    std::vector<double> y(p.b);
    std::vector<std::uint32_t> ids;
    for (auto& cube : family.cover().cubes(x)) {
        family.cover().to_frame(cube, x, y);
        ids.clear();
        family.filters_of(round_to_net(p, y), side, ids);
        for (std::uint32_t f : ids) {
            out.push_back(SphFilterId{cube, f});
        }
    }
    return out;
}

std::string encode_sph_key(const SphFilterId& id) {
    std::string key((id.cube.size() + 1) * 4, '\0');
    std::memcpy(key.data(), id.cube.data(), id.cube.size() * 4);
    std::memcpy(key.data() + id.cube.size() * 4, &id.filter, 4);
    return key;
}

}  // namespace lvann
