#include "lvann/reduce/dim_reduction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "lvann/core/hadamard.hpp"
#include "lvann/error.hpp"
#include "lvann/kernels/kernels.hpp"

namespace lvann {

FastJLDecomp::FastJLDecomp(std::vector<double> signs, std::vector<std::uint32_t> perm, std::size_t block)
    : signs_(std::move(signs)), perm_(std::move(perm)), block_(block) {
    const std::size_t d = signs_.size();
    require(is_power_of_two(d) && is_power_of_two(block) && block <= d, ErrorCode::InvalidArgument,
            "FastJLDecomp: d and block must be powers of two with block <= d");
    require(perm_.size() == d, ErrorCode::InvalidArgument, "FastJLDecomp: permutation length != d");
    std::vector<char> seen(d, 0);
    for (std::uint32_t p : perm_) {
        require(p < d && !seen[p], ErrorCode::InvalidArgument, "FastJLDecomp: perm is not a permutation");
        seen[p] = 1;
    }
    for (double s : signs_) {
        require(s == 1.0 || s == -1.0, ErrorCode::InvalidArgument, "FastJLDecomp: signs must be +-1");
    }
}

void FastJLDecomp::apply_stacked(std::span<const double> x, std::span<double> out) const {
    const std::size_t d = dim();
    require(x.size() == d && out.size() == d, ErrorCode::DimensionMismatch,
            "FastJLDecomp: dimension mismatch");
    std::vector<double> t(d);
    for (std::size_t i = 0; i < d; ++i) {
        t[i] = signs_[i] * x[i];
    }
    fwht_inplace(t);
    for (std::size_t r = 0; r < d; ++r) {
        out[r] = t[perm_[r]];
    }
}

FastJLDecomp sample_stage1(std::size_t d, std::size_t block, RngStream& rng) {
    require(is_power_of_two(d) && is_power_of_two(block) && block <= d, ErrorCode::InvalidArgument,
            "sample_stage1: d and d' must be powers of two with d' <= d");
    RngStream sign_rng = rng.child("signs");
    RngStream perm_rng = rng.child("perm");
    std::vector<double> signs(d);
    for (double& s : signs) {
        s = sign_rng.rademacher();
    }
    std::vector<std::uint32_t> perm(d);
    std::iota(perm.begin(), perm.end(), 0u);
    for (std::size_t i = d; i > 1; --i) {
        const std::size_t j = perm_rng.uniform_below(i);
        std::swap(perm[i - 1], perm[j]);
    }
    return FastJLDecomp(std::move(signs), std::move(perm), block);
}

RotationDecomp sample_stage2(std::size_t d, std::size_t block, RngStream& rng) {
    require(d >= 1 && block >= 1 && block <= d && d % block == 0, ErrorCode::InvalidArgument,
            "sample_stage2: d' must divide d");
    return RotationDecomp(random_rotation(d, rng), block);
}

std::vector<std::vector<RealVector>> reduce(const std::vector<RealVector>& points,
                                            const OrthoDecomp& decomp) {
    const std::size_t d = decomp.dim();
    const std::size_t bd = decomp.block_dim();
    const double scale = std::sqrt(static_cast<double>(d) / static_cast<double>(bd));
    std::vector<std::vector<RealVector>> out(decomp.num_blocks());
    std::vector<double> stacked(d);
    for (const RealVector& x : points) {
        require(x.dim() == d, ErrorCode::DimensionMismatch, "reduce: point dim != decomposition dim");
        decomp.apply_stacked(x.view(), stacked);
        for (std::size_t i = 0; i < decomp.num_blocks(); ++i) {
            std::vector<double> part(stacked.begin() + i * bd, stacked.begin() + (i + 1) * bd);
            for (double& v : part) {
                v *= scale;
            }
            out[i].emplace_back(std::move(part));
        }
    }
    return out;
}

double block_distortion(const OrthoDecomp& decomp, const RealVector& x) {
    const double nx = x.norm();
    require(nx > 0.0, ErrorCode::InvalidArgument, "block_distortion: zero vector");
    std::vector<double> stacked(decomp.dim());
    decomp.apply_stacked(x.view(), stacked);
    const std::size_t bd = decomp.block_dim();
    const double scale = std::sqrt(static_cast<double>(decomp.dim()) / static_cast<double>(bd));
    double worst = 0.0;
    for (std::size_t i = 0; i < decomp.num_blocks(); ++i) {
        double e = 0.0;
        for (std::size_t r = 0; r < bd; ++r) {
            e += stacked[i * bd + r] * stacked[i * bd + r];
        }
        worst = std::max(worst, std::abs(scale * std::sqrt(e) / nx - 1.0));
    }
    return worst;
}

std::string TopRecord::describe(const TopConfig& cfg) const {
    std::ostringstream out;
    out << "n=" << n << " d=" << d << " d_pad=" << d_pad << " m'=" << m_prime
        << (stage1 ? "" : " (stage 1 skipped)") << " m=" << m << (stage2 ? "" : " (stage 2 skipped)")
        << " b=" << cfg.b << " levels=" << levels << " trees=" << trees << " blocks=" << terminal_blocks
        << " w=" << w << " delta=" << delta << " N=" << N << " c=" << c << " c'=" << c_prime
        << " c''=" << c_sub << " eps_A=" << cfg.eps_A << " eps_B=" << cfg.eps_B
        << " kappa1=" << cfg.kappa1 << " kappa2=" << cfg.kappa2 << " w_scale=" << cfg.w_scale
        << " gamma=" << cfg.gamma << " beta=" << cfg.beta
        << " proj=" << (cfg.proj_mode == ProjCollection::Mode::Full ? "full" : "subsampled")
        << " s=" << cfg.proj_s << " seed=" << cfg.seed << " strict=" << (strict ? "yes" : "no");
    return out.str();
}

TopIndex::TopIndex(TopConfig config, TopRecord record, std::optional<FastJLDecomp> stage1,
                   std::vector<RotationDecomp> stage2, std::vector<MidIndex> mids, std::vector<double> points)
    : config_(std::move(config)), record_(record), stage1_(std::move(stage1)), stage2_(std::move(stage2)),
      mids_(std::move(mids)), points_(std::move(points)) {
    require(points_.size() == record_.n * record_.d, ErrorCode::InvalidArgument,
            "TopIndex: points must be n x d");
    require(mids_.size() == record_.terminal_blocks, ErrorCode::InvalidArgument,
            "TopIndex: one mid index per terminal block required");
}

std::vector<double> TopIndex::route(std::span<const double> x) const {
    require(x.size() == record_.d, ErrorCode::DimensionMismatch,
            "TopIndex: query dim " + std::to_string(x.size()) + " != " + std::to_string(record_.d));
    const std::size_t d_pad = record_.d_pad;
    const std::size_t mp = record_.m_prime;
    const std::size_t m = record_.m;
    std::vector<double> padded(d_pad, 0.0);
    std::copy(x.begin(), x.end(), padded.begin());
    std::vector<double> first(d_pad);
    if (stage1_) {
        stage1_->apply_stacked(padded, first);
        const double s1 = std::sqrt(static_cast<double>(d_pad) / static_cast<double>(mp));
        for (double& v : first) {
            v *= s1;
        }
    } else {
        first = padded;
    }
    if (stage2_.empty()) {
        return first;
    }
    std::vector<double> out(d_pad);
    const double s2 = std::sqrt(static_cast<double>(mp) / static_cast<double>(m));
    for (std::size_t i = 0; i < stage2_.size(); ++i) {
        std::span<const double> in(first.data() + i * mp, mp);
        std::span<double> o(out.data() + i * mp, mp);
        stage2_[i].apply_stacked(in, o);
        for (double& v : o) {
            v *= s2;
        }
    }
    return out;
}

namespace {

std::size_t pow2_at_least(double target) {
    const double t = std::max(1.0, std::ceil(target));
    require(t < 1e15, ErrorCode::ParameterInfeasible, "dimension target overflows");
    return next_power_of_two(static_cast<std::size_t>(t));
}

}  // namespace

TopIndex build_top_index(const std::vector<RealVector>& points, double c, const TopConfig& cfg) {
    require(!points.empty(), ErrorCode::InvalidArgument, "build_top_index: empty dataset");
    require(c > 1.0, ErrorCode::InvalidArgument, "build_top_index: c must exceed 1");
    require(cfg.eps_A > 0.0 && cfg.eps_A < 1.0, ErrorCode::InvalidArgument,
            "build_top_index: eps_A must lie in (0, 1)");
    require(is_power_of_two(cfg.b), ErrorCode::InvalidArgument, "build_top_index: b must be a power of two");
    const std::size_t n = points.size();
    const std::size_t d = points.front().dim();
    require(d >= 1, ErrorCode::InvalidArgument, "build_top_index: zero-dimensional points");
    for (std::size_t i = 0; i < n; ++i) {
        require(points[i].dim() == d, ErrorCode::DimensionMismatch,
                "build_top_index: point " + std::to_string(i) + " has dim " + std::to_string(points[i].dim()));
    }

    TopRecord rec;
    rec.n = n;
    rec.d = d;
    rec.c = c;
    rec.d_pad = next_power_of_two(d);
    // Formulas in n need n >= 2; a single point is treated as n = 2.
    const double n_eff = static_cast<double>(std::max<std::size_t>(n, 2));
    const double lnn = std::log(n_eff);

    const double lnnd = std::log(n_eff * static_cast<double>(d));
    rec.m_prime = cfg.force_m_prime ? cfg.force_m_prime
                                    : pow2_at_least(cfg.kappa1 * lnnd * lnnd / (cfg.eps_A * cfg.eps_A));
    require(is_power_of_two(rec.m_prime), ErrorCode::InvalidArgument, "stage 1: m' must be a power of two");
    rec.stage1 = rec.m_prime < rec.d_pad;
    if (!rec.stage1) {
        rec.m_prime = rec.d_pad;
    }

    if (cfg.force_m) {
        require(is_power_of_two(cfg.force_m), ErrorCode::InvalidArgument, "stage 2: m must be a power of two");
        if (cfg.force_m < cfg.b) {
            fail(ErrorCode::ParameterInfeasible, "stage 2: m=" + std::to_string(cfg.force_m) +
                                                     " is smaller than b=" + std::to_string(cfg.b));
        }
        rec.m = cfg.force_m;
    } else {
        rec.m = std::max(cfg.b, pow2_at_least(cfg.kappa2 * lnn * std::log(std::max(lnn, 1.0))));
    }
    rec.stage2 = rec.m < rec.m_prime;
    if (!rec.stage2) {
        rec.m = rec.m_prime;
    }
    if (cfg.b > rec.m) {
        fail(ErrorCode::ParameterInfeasible, "mid index: b=" + std::to_string(cfg.b) +
                                                 " exceeds terminal dimension " + std::to_string(rec.m));
    }
    rec.c_prime = c * (rec.stage1 ? 1.0 - cfg.eps_A : 1.0);
    rec.c_sub = rec.c_prime * (rec.stage2 ? 1.0 - cfg.eps_A : 1.0);
    rec.w = set_radius(rec.m, static_cast<std::size_t>(n_eff), rec.c_sub) * cfg.w_scale;

    BallLatticeParams ball;
    try {
        ball = make_ball_params(cfg.b, rec.w, 0.0, cfg.max_resamples);
    } catch (const Error& e) {
        fail(e.code(), std::string("mid index: ") + e.what());
    }
    rec.delta = ball.delta;
    rec.N = ball.N;

    const std::size_t nb1 = rec.d_pad / rec.m_prime;
    const std::size_t nb2 = rec.m_prime / rec.m;
    rec.terminal_blocks = nb1 * nb2;

    RngStream root(cfg.seed, "top");
    std::optional<FastJLDecomp> stage1;
    if (rec.stage1) {
        RngStream r1 = root.child("stage1");
        stage1 = sample_stage1(rec.d_pad, rec.m_prime, r1);
    }
    std::vector<RotationDecomp> stage2;
    if (rec.stage2) {
        for (std::size_t i = 0; i < nb1; ++i) {
            RngStream r2 = root.child("stage2", i);
            stage2.push_back(sample_stage2(rec.m_prime, rec.m, r2));
        }
    }

    // Terminal vectors for every point, laid out [block][point][m].
    const std::size_t m = rec.m;
    std::vector<double> originals;
    originals.reserve(n * d);
    Eigen::MatrixXd first(rec.d_pad, n);
    std::vector<double> padded(rec.d_pad, 0.0);
    std::vector<double> t(rec.d_pad);
    const double s1 = std::sqrt(static_cast<double>(rec.d_pad) / static_cast<double>(rec.m_prime));
    for (std::size_t p = 0; p < n; ++p) {
        originals.insert(originals.end(), points[p].coords().begin(), points[p].coords().end());
        std::fill(padded.begin(), padded.end(), 0.0);
        std::copy(points[p].coords().begin(), points[p].coords().end(), padded.begin());
        if (stage1) {
            stage1->apply_stacked(padded, t);
            for (std::size_t r = 0; r < rec.d_pad; ++r) {
                first(r, p) = s1 * t[r];
            }
        } else {
            for (std::size_t r = 0; r < rec.d_pad; ++r) {
                first(r, p) = padded[r];
            }
        }
    }
    Eigen::MatrixXd terminal(rec.d_pad, n);
    if (rec.stage2) {
        const double s2 = std::sqrt(static_cast<double>(rec.m_prime) / static_cast<double>(m));
        for (std::size_t i = 0; i < nb1; ++i) {
            const auto mp = static_cast<Eigen::Index>(rec.m_prime);
            terminal.middleRows(static_cast<Eigen::Index>(i) * mp, mp) =
                s2 * stage2[i].apply_batch(first.middleRows(static_cast<Eigen::Index>(i) * mp, mp));
        }
    } else {
        terminal = first;
    }

    std::vector<MidIndex> mids;
    mids.reserve(rec.terminal_blocks);
    for (std::size_t blk = 0; blk < rec.terminal_blocks; ++blk) {
        ProjCollection proj(m, cfg.b, cfg.proj_mode, cfg.proj_s, splitmix64(cfg.seed ^ splitmix64(blk + 1)),
                            cfg.proj_eps);
        TensorFamilyParams tp;
        tp.m = m;
        tp.b = cfg.b;
        tp.eps_B = cfg.eps_B;
        tp.ball = ball;
        tp.proj = proj;
        tp.decode_cap = cfg.decode_cap;
        if (blk == 0) {
            rec.levels = proj.levels();
            rec.trees = static_cast<std::size_t>(proj.tree_count());
            rec.strict = tensor_guarantee_unconditional(tp);
        }
        std::vector<RealVector> sub;
        sub.reserve(n);
        for (std::size_t p = 0; p < n; ++p) {
            std::vector<double> v(m);
            for (std::size_t r = 0; r < m; ++r) {
                v[r] = terminal(static_cast<Eigen::Index>(blk * m + r), static_cast<Eigen::Index>(p));
            }
            sub.emplace_back(std::move(v));
        }
        RngStream mid_rng = root.child("mid", blk);
        try {
            mids.push_back(build_mid_index(sub, sample_tensor_family(tp, mid_rng), rec.c_sub));
        } catch (const Error& e) {
            fail(e.code(), "terminal block " + std::to_string(blk) + ": " + e.what());
        }
    }
    return TopIndex(cfg, rec, std::move(stage1), std::move(stage2), std::move(mids), std::move(originals));
}

TopQueryReport query_top_index(const TopIndex& index, const RealVector& q) {
    require(q.dim() == index.dim(), ErrorCode::DimensionMismatch,
            "query_top_index: query dim " + std::to_string(q.dim()) + " != " + std::to_string(index.dim()));
    TopQueryReport report;
    report.strict = index.record().strict;
    report.false_positives_per_block.assign(index.mids().size(), 0);
    const std::vector<double> routed = index.route(q.view());
    const std::size_t m = index.record().m;
    const double c2 = index.record().c * index.record().c;
    std::vector<char> visited(index.size(), 0);
    const auto accept = [&](std::uint32_t id) {
        if (kernels::squared_distance(index.point(id), q.view()) <= c2) {
            return true;
        }
        report.skipped.push_back(id);
        return false;
    };
    for (std::size_t blk = 0; blk < index.mids().size(); ++blk) {
        MidQueryStats st;
        const auto hit = query_mid_index_with(index.mids()[blk], std::span<const double>(routed.data() + blk * m, m),
                                              accept, visited, &st);
        report.ids += st.ids;
        report.buckets += st.buckets;
        report.candidates += st.candidates;
        report.false_positives += st.false_positives;
        report.false_positives_per_block[blk] = st.false_positives;
        if (hit) {
            report.result = *hit;
            report.distance = distance(index.point(*hit), q.view());
            break;
        }
    }
    return report;
}

}  // namespace lvann
