#include <algorithm>
#include <cmath>
#include <cstring>

#include "lvann/core/decomp.hpp"
#include "lvann/core/hadamard.hpp"
#include "lvann/error.hpp"
#include "lvann/kernels/kernels.hpp"
#include "lvann/sphere/spherical.hpp"

namespace lvann {

SphTensorParams make_sph_tensor_params(std::size_t m, std::size_t b, double r, double c, double eta_u,
                                       double eta_q, double eps_B, ProjCollection proj, double delta_s,
                                       bool require_separation) {
    require(is_power_of_two(m) && is_power_of_two(b) && b <= m, ErrorCode::InvalidArgument,
            "sph tensor: m and b must be powers of two with b <= m");
    require(proj.m() == m && proj.b() == b, ErrorCode::InvalidArgument, "sph tensor: collection dims differ");
    require(eps_B >= 0.0, ErrorCode::InvalidArgument, "sph tensor: eps_B must be non-negative");
    if (require_separation && c * r < std::sqrt(2.0)) {
        fail(ErrorCode::ParameterInfeasible, "sph tensor: c r = " + std::to_string(c * r) + " is below sqrt 2");
    }
    SphTensorParams p;
    p.m = m;
    p.b = b;
    p.r = r;
    p.c = c;
    p.eps_B = eps_B;
    const double scale = std::sqrt(static_cast<double>(b) / static_cast<double>(m));
    p.sphere = make_spherical_params(b, r * (1.0 + 8.0 * eps_B), c, eta_u * scale, eta_q * scale, delta_s);
    p.proj = std::move(proj);
    return p;
}

SphTensorFamily::SphTensorFamily(SphTensorParams params, Eigen::MatrixXd rotation, std::vector<SplitterTree> trees,
                                 std::vector<SphericalFamily> families)
    : params_(std::move(params)), rotation_(std::move(rotation)), trees_(std::move(trees)),
      families_(std::move(families)) {
    const auto m = static_cast<Eigen::Index>(params_.m);
    require(rotation_.rows() == m && rotation_.cols() == m, ErrorCode::InvalidArgument,
            "SphTensorFamily: rotation must be m x m");
    require(families_.size() == trees_.size() * parts(), ErrorCode::InvalidArgument,
            "SphTensorFamily: need one spherical family per (tree, part)");
    for (const SplitterTree& t : trees_) {
        require(t.m() == params_.m && t.b() == params_.b, ErrorCode::InvalidArgument,
                "SphTensorFamily: tree dims differ from (m, b)");
    }
}

bool SphTensorFamily::verified() const noexcept {
    return std::all_of(families_.begin(), families_.end(), [](const SphericalFamily& f) { return f.verified(); });
}

SphTensorFamily sample_sph_tensor_family(const SphTensorParams& params, RngStream& rng, bool verify) {
    const std::uint64_t count = params.proj.tree_count();
    Eigen::MatrixXd rotation = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(params.m),
                                                         static_cast<Eigen::Index>(params.m));
    if (params.m > params.b) {
        RngStream rot_rng = rng.child("rotation");
        rotation = random_rotation(params.m, rot_rng);
    }
    std::vector<SplitterTree> trees;
    std::vector<SphericalFamily> families;
    const std::size_t parts = params.m / params.b;
    for (std::uint64_t t = 0; t < count; ++t) {
        trees.push_back(params.proj.tree_at(t));
        const RngStream tree_rng = rng.child("tree", t);
        for (std::size_t i = 0; i < parts; ++i) {
            RngStream part_rng = tree_rng.child("part", i);
            families.push_back(verify ? sample_spherical_family(params.sphere, part_rng)
                                      : sample_unverified_spherical_family(params.sphere, part_rng));
        }
    }
    return SphTensorFamily(params, std::move(rotation), std::move(trees), std::move(families));
}

void for_each_sph_tensor_key(const SphTensorFamily& family, std::span<const double> x, Side side,
                             const std::function<bool(std::string_view)>& visit, SphDecodeStats* stats) {
    const SphTensorParams& p = family.params();
    require(x.size() == p.m, ErrorCode::DimensionMismatch,
            "decode_sph_tensor: point dim " + std::to_string(x.size()) + " != m=" + std::to_string(p.m));
    double sq = 0.0;
    for (double v : x) {
        sq += v * v;
    }
    require(std::abs(std::sqrt(sq) - 1.0) <= 1e-9, ErrorCode::InvalidArgument,
            "decode_sph_tensor: point is not on the unit sphere");
    const std::size_t parts = family.parts();
    const std::size_t b = p.b;
    const double target = std::sqrt(static_cast<double>(b) / static_cast<double>(p.m));

    const Eigen::VectorXd xr =
        family.rotation() * Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(p.m));
    std::vector<double> comp(p.m);
    std::vector<std::vector<std::vector<std::string>>> sets(family.num_trees());
    std::uint64_t total = 0;
    for (std::size_t t = 0; t < family.num_trees(); ++t) {
        family.tree(t).apply_into(std::span<const double>(xr.data(), p.m), comp);
        std::vector<std::vector<std::string>> keys(parts);
        bool rejected = false;
        std::vector<double> unit(b);
        for (std::size_t i = 0; i < parts && !rejected; ++i) {
            const std::span<const double> u(comp.data() + i * b, b);
            double nu = 0.0;
            for (double v : u) {
                nu += v * v;
            }
            nu = std::sqrt(nu);
            double dev = 0.0;
            for (std::size_t k = 0; k < b; ++k) {
                unit[k] = nu > 0.0 ? u[k] / nu : 0.0;
                const double e = unit[k] * target - u[k];
                dev += e * e;
            }
            // Component too far from the subspace sphere: the tree gives nothing.
            if (nu == 0.0 || std::sqrt(dev) > p.eps_B + 1e-9) {
                rejected = true;
                break;
            }
            for (const SphFilterId& id : decode_spherical(family.family(t, i), unit, side)) {
                keys[i].push_back(encode_sph_key(id));
            }
        }
        if (rejected) {
            if (stats != nullptr) {
                ++stats->rejected_trees;
            }
            continue;
        }
        std::uint64_t prod = 1;
        for (const auto& k : keys) {
            prod = std::min<std::uint64_t>(prod * k.size(), p.decode_cap + 1);
        }
        if (prod == 0 && stats != nullptr) {
            ++stats->empty_products;
        }
        total += prod;
        if (total > p.decode_cap) {
            fail(ErrorCode::Overflow, "decode_sph_tensor: more than " + std::to_string(p.decode_cap) + " filters");
        }
        sets[t] = std::move(keys);
    }

    std::string key;
    for (std::size_t t = 0; t < sets.size(); ++t) {
        const auto& keys = sets[t];
        if (keys.empty() || std::any_of(keys.begin(), keys.end(), [](const auto& k) { return k.empty(); })) {
            continue;
        }
        std::vector<std::size_t> pick(parts, 0);
        while (true) {
            key.assign(4, '\0');
            const auto tree = static_cast<std::uint32_t>(t);
            std::memcpy(key.data(), &tree, 4);
            for (std::size_t i = 0; i < parts; ++i) {
                key += keys[i][pick[i]];
            }
            if (stats != nullptr) {
                ++stats->ids;
            }
            if (!visit(key)) {
                return;
            }
            std::size_t i = parts;
            while (i > 0 && ++pick[i - 1] == keys[i - 1].size()) {
                pick[i - 1] = 0;
                --i;
            }
            if (i == 0) {
                break;
            }
        }
    }
}

std::vector<std::string> decode_sph_tensor(const SphTensorFamily& family, std::span<const double> x, Side side) {
    std::vector<std::string> out;
    for_each_sph_tensor_key(family, x, side, [&](std::string_view k) {
        out.emplace_back(k);
        return true;
    });
    std::sort(out.begin(), out.end());
    return out;
}

SphereIndex::SphereIndex(SphTensorFamily family, double cr, std::vector<double> points,
                         std::unordered_map<std::string, std::vector<std::uint32_t>> buckets)
    : family_(std::move(family)), cr_(cr), points_(std::move(points)), buckets_(std::move(buckets)) {
    require(points_.size() % family_.params().m == 0, ErrorCode::InvalidArgument,
            "SphereIndex: points must be n x m");
}

std::size_t SphereIndex::total_entries() const noexcept {
    std::size_t total = 0;
    for (const auto& [key, ids] : buckets_) {
        total += ids.size();
    }
    return total;
}

SphereIndex build_sphere_index(const std::vector<RealVector>& points, SphTensorFamily family) {
    const std::size_t m = family.params().m;
    std::vector<double> flat;
    flat.reserve(points.size() * m);
    std::unordered_map<std::string, std::vector<std::uint32_t>> buckets;
    for (std::size_t i = 0; i < points.size(); ++i) {
        require(points[i].dim() == m, ErrorCode::DimensionMismatch,
                "build_sphere_index: point " + std::to_string(i) + " has dim " + std::to_string(points[i].dim()));
        flat.insert(flat.end(), points[i].coords().begin(), points[i].coords().end());
        const auto id = static_cast<std::uint32_t>(i);
        for_each_sph_tensor_key(family, points[i].view(), Side::Update, [&](std::string_view k) {
            auto& ids = buckets[std::string(k)];
            if (ids.empty() || ids.back() != id) {
                ids.push_back(id);
            }
            return true;
        });
    }
    const double cr = family.params().c * family.params().r;
    return SphereIndex(std::move(family), cr, std::move(flat), std::move(buckets));
}

std::optional<std::uint32_t> query_sphere_index(const SphereIndex& index, const RealVector& q, SphQueryStats* stats) {
    std::vector<char> visited(index.size(), 0);
    std::optional<std::uint32_t> found;
    SphQueryStats local;
    const double cr2 = index.cr() * index.cr();
    for_each_sph_tensor_key(index.family(), q.view(), Side::Query, [&](std::string_view k) {
        ++local.ids;
        const auto it = index.buckets().find(std::string(k));
        if (it == index.buckets().end()) {
            return true;
        }
        ++local.buckets;
        for (std::uint32_t id : it->second) {
            if (visited[id]) {
                continue;
            }
            visited[id] = 1;
            ++local.candidates;
            if (kernels::squared_distance(index.point(id), q.view()) <= cr2) {
                found = id;
                return false;
            }
            ++local.false_positives;
        }
        return true;
    });
    if (stats != nullptr) {
        *stats = local;
    }
    return found;
}

}  // namespace lvann
