#include "lvann/ball/ball_lattice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lvann/core/special.hpp"
#include "lvann/error.hpp"
#include "lvann/kernels/kernels.hpp"

namespace lvann {

double default_delta(std::size_t b, double w) {
    require(b >= 1 && w > 0.0, ErrorCode::InvalidArgument, "default_delta: need b >= 1, w > 0");
    const double sb = std::sqrt(static_cast<double>(b));
    return std::min(1.0 / static_cast<double>(b), 2.0 * w / (3.0 * sb));
}

double shrunk_radius(const BallLatticeParams& p) {
    return p.w - 0.5 * p.delta * std::sqrt(static_cast<double>(p.b));
}

void validate(const BallLatticeParams& p) {
    require(p.b >= 1, ErrorCode::InvalidArgument, "ball lattice: b must be >= 1");
    require(std::isfinite(p.w) && p.w > 0.0, ErrorCode::InvalidArgument,
            "ball lattice: w must be positive");
    require(std::isfinite(p.delta) && p.delta > 0.0, ErrorCode::InvalidArgument,
            "ball lattice: delta must be positive");
    require(p.max_resamples >= 1, ErrorCode::InvalidArgument,
            "ball lattice: max_resamples must be >= 1");
    if (shrunk_radius(p) <= 0.0) {
        std::ostringstream msg;
        msg << "ball lattice: w' = w - delta*sqrt(b)/2 = " << shrunk_radius(p)
            << " is not positive (b=" << p.b << ", w=" << p.w << ", delta=" << p.delta << ")";
        fail(ErrorCode::ParameterInfeasible, msg.str());
    }
}

double success_prob_lower_bound(const BallLatticeParams& p) {
    validate(p);
    const double b = static_cast<double>(p.b);
    const double wp = shrunk_radius(p);
    const double xi = (1.0 + p.delta * std::sqrt(b)) / (2.0 * wp);
    if (xi >= 1.0) {
        return 0.0;
    }
    return std::pow(wp / (3.0 * p.w), b) * unit_ball_volume(p.b) * 2.0 *
           relative_cap_volume(p.b, xi);
}

std::size_t required_offsets(std::size_t b, double w, double delta, double p_lb) {
    require(p_lb > 0.0 && p_lb <= 1.0, ErrorCode::ParameterInfeasible,
            "required_offsets: success probability bound must lie in (0, 1]");
    require(b >= 1 && w > 0.0 && delta > 0.0, ErrorCode::InvalidArgument,
            "required_offsets: need b >= 1, w > 0, delta > 0");
    const double lead = 2.0 * static_cast<double>(b) * std::log(6.0 * w / delta) + std::log(2.0);
    const double n = std::ceil(lead / p_lb);
    require(n < 4e9, ErrorCode::ParameterInfeasible, "required_offsets: N exceeds 2^32");
    return static_cast<std::size_t>(std::max(1.0, n));
}

std::size_t required_offsets(const BallLatticeParams& p) {
    return required_offsets(p.b, p.w, p.delta, success_prob_lower_bound(p));
}

BallLatticeParams make_ball_params(std::size_t b, double w, double delta, std::size_t max_resamples) {
    BallLatticeParams p;
    p.b = b;
    p.w = w;
    p.delta = delta > 0.0 ? delta : default_delta(b, w);
    p.max_resamples = max_resamples;
    const double plb = success_prob_lower_bound(p);
    if (plb <= 0.0) {
        std::ostringstream msg;
        msg << "ball lattice: no radius-w' ball holds a pair at distance 1 + delta*sqrt(b) (b=" << b
            << ", w=" << w << ", delta=" << p.delta << "); increase w";
        fail(ErrorCode::ParameterInfeasible, msg.str());
    }
    p.N = required_offsets(b, w, p.delta, plb);
    return p;
}

double collision_prob_upper_bound(const BallLatticeParams& p, double t) {
    require(t >= 0.0, ErrorCode::InvalidArgument, "collision bound: t must be >= 0");
    const double b = static_cast<double>(p.b);
    return unit_ball_volume(p.b) * std::pow(3.0, -b) * std::exp(-0.5 * b * t * t / (4.0 * p.w * p.w));
}

BallLatticeFamily::BallLatticeFamily(BallLatticeParams params, std::vector<double> offsets,
                                     bool verified, std::size_t attempts)
    : params_(params), offsets_(std::move(offsets)), verified_(verified), attempts_(attempts) {
    require(params_.b >= 1 && offsets_.size() % params_.b == 0, ErrorCode::InvalidArgument,
            "BallLatticeFamily: offsets must be N x b");
    const double period = 3.0 * params_.w;
    for (double v : offsets_) {
        require(v >= 0.0 && v < period, ErrorCode::InvalidArgument,
                "BallLatticeFamily: offset coordinate outside [0, 3w)");
    }
}

std::string VerifyReport::describe() const {
    std::ostringstream out;
    out << (ok ? "pass" : "fail") << " net_points=" << net_points << " displacements=" << displacements
        << " pairs_checked=" << pairs_checked;
    if (failing) {
        const auto vec = [](const std::vector<double>& v) {
            std::ostringstream s;
            s << '(';
            for (std::size_t i = 0; i < v.size(); ++i) {
                s << (i ? "," : "") << v[i];
            }
            s << ')';
            return s.str();
        };
        out << " failing_pair=" << vec(failing->x) << "," << vec(failing->y);
    }
    return out.str();
}

namespace {

std::size_t grid_steps(const BallLatticeParams& p) {
    // Net coordinates i*delta for i = 0..M cover [0, 6w].
    return static_cast<std::size_t>(std::ceil(6.0 * p.w / p.delta - 1e-9));
}

double neighbour_radius_steps(const BallLatticeParams& p) {
    return (1.0 + p.delta * std::sqrt(static_cast<double>(p.b))) / p.delta;
}

// Lexicographically non-negative integer displacements within the radius,
// the zero displacement first.
std::vector<std::int64_t> half_space_displacements(std::size_t b, double radius_steps) {
    const auto kmax = static_cast<std::int64_t>(std::floor(radius_steps));
    const double r2 = radius_steps * radius_steps;
    std::vector<std::int64_t> out;
    std::vector<std::int64_t> k(b, -kmax);
    for (;;) {
        double s = 0;
        for (std::int64_t v : k) {
            s += static_cast<double>(v * v);
        }
        bool positive = true;
        for (std::int64_t v : k) {
            if (v != 0) {
                positive = v > 0;
                break;
            }
        }
        if (s <= r2 && positive) {
            out.insert(out.end(), k.begin(), k.end());
        }
        std::size_t a = b;
        while (a > 0) {
            --a;
            if (k[a] < kmax) {
                ++k[a];
                break;
            }
            k[a] = -kmax;
            if (a == 0) {
                a = b + 1;
                break;
            }
        }
        if (a == b + 1) {
            break;
        }
    }
    // Move the zero displacement to the front.
    const auto zero = std::vector<std::int64_t>(b, 0);
    for (std::size_t i = 0; i < out.size(); i += b) {
        if (std::equal(zero.begin(), zero.end(), out.begin() + static_cast<std::ptrdiff_t>(i))) {
            std::swap_ranges(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(b),
                             out.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    return out;
}

}  // namespace

VerifyCost verification_cost(const BallLatticeParams& p) {
    validate(p);
    VerifyCost c;
    const double axis = static_cast<double>(grid_steps(p)) + 1.0;
    const double b = static_cast<double>(p.b);
    c.net_points = std::pow(axis, b);
    const double rs = neighbour_radius_steps(p) + 0.5 * std::sqrt(b);
    c.displacements = 0.5 * unit_ball_volume(p.b) * std::pow(rs, b) + 1.0;
    c.label_bytes = c.net_points * static_cast<double>(p.N) * 4.0;
    c.work = c.net_points * (static_cast<double>(p.N) * b + c.displacements);
    return c;
}

void check_verification_budget(const BallLatticeParams& p, const VerifyBudget& budget) {
    const VerifyCost c = verification_cost(p);
    if (p.b > 15 || c.label_bytes > budget.max_label_bytes || c.work > budget.max_work) {
        std::ostringstream msg;
        msg << "ball lattice verification out of budget: b=" << p.b << " w=" << p.w
            << " delta=" << p.delta << " N=" << p.N << " net_points=" << c.net_points
            << " displacements~" << c.displacements << " label_bytes~" << c.label_bytes
            << " work~" << c.work;
        fail(ErrorCode::ParameterInfeasible, msg.str());
    }
}

VerifyReport verify_family_report(const BallLatticeFamily& family, const VerifyBudget& budget) {
    const BallLatticeParams& p = family.params();
    check_verification_budget(p, budget);

    const std::size_t b = p.b;
    const std::size_t n_off = family.size();
    const std::size_t M = grid_steps(p);
    const std::size_t axis = M + 1;
    std::size_t net = 1;
    for (std::size_t a = 0; a < b; ++a) {
        net *= axis;
    }

    VerifyReport report;
    report.net_points = net;
    const std::vector<std::int64_t> disp = half_space_displacements(b, neighbour_radius_steps(p));
    report.displacements = disp.size() / b;

    const auto net_point = [&](std::size_t flat) {
        std::vector<double> x(b);
        for (std::size_t a = b; a-- > 0;) {
            x[a] = static_cast<double>(flat % axis) * p.delta;
            flat /= axis;
        }
        return x;
    };

    if (n_off == 0) {
        report.failing = NetPair{net_point(0), net_point(0)};
        return report;
    }

    // Per (offset, axis, grid index): squared deviation from the nearest
    // lattice coordinate and the cell digit in {0..3} (cell + 1).
    const double period = 3.0 * p.w;
    std::vector<double> sq(n_off * b * axis);
    std::vector<std::int32_t> code(n_off * b * axis);
    for (std::size_t j = 0; j < n_off; ++j) {
        const auto v = family.offset(j);
        for (std::size_t a = 0; a < b; ++a) {
            for (std::size_t i = 0; i < axis; ++i) {
                const double x = static_cast<double>(i) * p.delta;
                const double cell = std::floor((x - v[a]) / period + 0.5);
                const double dev = x - (v[a] + period * cell);
                const std::size_t at = (j * b + a) * axis + i;
                sq[at] = dev * dev;
                code[at] = static_cast<std::int32_t>(cell) + 1;
            }
        }
    }

    // Labels: for net point p and offset j, the encoded cell of the radius-w'
    // ball containing p, or -1.
    const double wp2 = shrunk_radius(p) * shrunk_radius(p);
    std::vector<std::int32_t> labels(net * n_off);
    std::vector<std::size_t> digit(b, 0);
    for (std::size_t flat = 0; flat < net; ++flat) {
        std::int32_t* row = labels.data() + flat * n_off;
        for (std::size_t j = 0; j < n_off; ++j) {
            double s = 0.0;
            std::int32_t lab = 0;
            const std::size_t base = j * b * axis;
            for (std::size_t a = 0; a < b; ++a) {
                const std::size_t at = base + a * axis + digit[a];
                s += sq[at];
                lab = lab * 4 + code[at];
            }
            row[j] = s <= wp2 ? lab : -1;
        }
        for (std::size_t a = b; a-- > 0;) {
            if (++digit[a] < axis) {
                break;
            }
            digit[a] = 0;
        }
    }

    std::vector<std::int64_t> stride(b, 1);
    for (std::size_t a = b - 1; a-- > 0;) {
        stride[a] = stride[a + 1] * static_cast<std::int64_t>(axis);
    }
    const std::size_t nd = disp.size() / b;
    std::vector<std::int64_t> flat_disp(nd, 0);
    for (std::size_t t = 0; t < nd; ++t) {
        for (std::size_t a = 0; a < b; ++a) {
            flat_disp[t] += disp[t * b + a] * stride[a];
        }
    }

    const auto& kern = kernels::active();
    std::fill(digit.begin(), digit.end(), 0);
    for (std::size_t flat = 0; flat < net; ++flat) {
        const std::int32_t* row = labels.data() + flat * n_off;
        for (std::size_t t = 0; t < nd; ++t) {
            bool inside = true;
            for (std::size_t a = 0; a < b; ++a) {
                const std::int64_t c = static_cast<std::int64_t>(digit[a]) + disp[t * b + a];
                if (c < 0 || c > static_cast<std::int64_t>(M)) {
                    inside = false;
                    break;
                }
            }
            if (!inside) {
                continue;
            }
            const std::size_t other = static_cast<std::size_t>(static_cast<std::int64_t>(flat) + flat_disp[t]);
            ++report.pairs_checked;
            if (kern.first_shared_label(row, labels.data() + other * n_off, n_off) == n_off) {
                report.failing = NetPair{net_point(flat), net_point(other)};
                return report;
            }
        }
        for (std::size_t a = b; a-- > 0;) {
            if (++digit[a] < axis) {
                break;
            }
            digit[a] = 0;
        }
    }
    report.ok = true;
    return report;
}

bool verify_family(const BallLatticeFamily& family) { return verify_family_report(family).ok; }

namespace {

std::vector<double> draw_offsets(const BallLatticeParams& params, RngStream& rng) {
    const double period = 3.0 * params.w;
    std::vector<double> offsets(params.N * params.b);
    for (double& v : offsets) {
        v = rng.uniform() * period;
        if (v >= period) {
            v = 0.0;
        }
    }
    return offsets;
}

}  // namespace

BallLatticeFamily sample_family(const BallLatticeParams& params, RngStream& rng,
                                const VerifyBudget& budget) {
    validate(params);
    check_verification_budget(params, budget);
    VerifyReport last;
    for (std::size_t attempt = 1; attempt <= params.max_resamples; ++attempt) {
        RngStream draw = rng.child("attempt", attempt);
        BallLatticeFamily family(params, draw_offsets(params, draw), false, attempt);
        last = verify_family_report(family, budget);
        if (last.ok) {
            return BallLatticeFamily(params, family.offsets(), true, attempt);
        }
    }
    fail(ErrorCode::VerificationFailure,
         "ball lattice family failed verification " + std::to_string(params.max_resamples) +
             " times; last attempt: " + last.describe());
}

BallLatticeFamily sample_unverified_family(const BallLatticeParams& params, RngStream& rng) {
    validate(params);
    RngStream draw = rng.child("attempt", 1);
    return BallLatticeFamily(params, draw_offsets(params, draw), false, 1);
}

void decode_into(const BallLatticeFamily& family, std::span<const double> x, BallDecode& out) {
    const BallLatticeParams& p = family.params();
    require(x.size() == p.b, ErrorCode::DimensionMismatch,
            "ball decode: point dim " + std::to_string(x.size()) + " != b=" + std::to_string(p.b));
    out.clear();
    const double period = 3.0 * p.w;
    const double w2 = p.w * p.w;
    const std::size_t b = p.b;
    std::int32_t cell_buf[64];
    std::vector<std::int32_t> cell_heap;
    std::int32_t* cell = cell_buf;
    if (b > 64) {
        cell_heap.resize(b);
        cell = cell_heap.data();
    }
    const double* off = family.offsets().data();
    for (std::size_t j = 0, n = family.size(); j < n; ++j, off += b) {
        double s = 0.0;
        for (std::size_t a = 0; a < b; ++a) {
            const double c = std::floor((x[a] - off[a]) / period + 0.5);
            const double dev = x[a] - (off[a] + period * c);
            s += dev * dev;
            cell[a] = static_cast<std::int32_t>(c);
        }
        if (s <= w2) {
            out.offsets.push_back(static_cast<std::uint32_t>(j));
            out.cells.insert(out.cells.end(), cell, cell + b);
        }
    }
}

std::vector<BallFilterId> decode(const BallLatticeFamily& family, std::span<const double> x) {
    BallDecode flat;
    decode_into(family, x, flat);
    const std::size_t b = family.params().b;
    std::vector<BallFilterId> ids(flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i) {
        ids[i].offset = flat.offsets[i];
        ids[i].cell.assign(flat.cells.begin() + static_cast<std::ptrdiff_t>(i * b),
                           flat.cells.begin() + static_cast<std::ptrdiff_t>((i + 1) * b));
    }
    return ids;
}

}  // namespace lvann
