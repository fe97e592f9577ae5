#include "lvann/tensor/tensor_index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "lvann/core/hadamard.hpp"
#include "lvann/error.hpp"
#include "lvann/kernels/kernels.hpp"

namespace lvann {

void validate(const TensorFamilyParams& p) {
    require(is_power_of_two(p.m) && is_power_of_two(p.b) && p.b <= p.m, ErrorCode::InvalidArgument,
            "tensor family: m and b must be powers of two with b <= m");
    require(p.proj.m() == p.m && p.proj.b() == p.b, ErrorCode::InvalidArgument,
            "tensor family: proj collection dims differ from (m, b)");
    require(p.ball.b == p.b, ErrorCode::InvalidArgument, "tensor family: ball dimension != b");
    require(std::isfinite(p.eps_B) && p.eps_B >= 0.0, ErrorCode::InvalidArgument,
            "tensor family: eps_B must be >= 0");
    require(p.decode_cap >= 1, ErrorCode::InvalidArgument, "tensor family: decode cap must be >= 1");
    validate(p.ball);
}

bool tensor_guarantee_unconditional(const TensorFamilyParams& p) {
    const double worst_stretch = std::pow(std::sqrt(2.0), static_cast<double>(p.proj.levels()));
    if (1.0 + p.eps_B >= worst_stretch) {
        return true;
    }
    return p.proj.mode() == ProjCollection::Mode::Full && p.proj.cumulative_eps() <= p.eps_B;
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

std::uint32_t get_u32(std::string_view in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
    }
    return v;
}

}  // namespace

std::string encode_key(const TensorFilterId& id) {
    std::string out;
    put_u32(out, id.tree);
    for (const BallFilterId& part : id.parts) {
        put_u32(out, part.offset);
        for (std::int32_t c : part.cell) {
            put_u32(out, static_cast<std::uint32_t>(c));
        }
    }
    return out;
}

TensorFilterId decode_key(std::string_view key, std::size_t b) {
    const std::size_t part_bytes = 4 * (1 + b);
    require(key.size() >= 4 && (key.size() - 4) % part_bytes == 0, ErrorCode::MalformedHeader,
            "tensor key has an invalid length");
    TensorFilterId id;
    id.tree = get_u32(key, 0);
    for (std::size_t at = 4; at < key.size(); at += part_bytes) {
        BallFilterId part;
        part.offset = get_u32(key, at);
        for (std::size_t a = 0; a < b; ++a) {
            part.cell.push_back(static_cast<std::int32_t>(get_u32(key, at + 4 + 4 * a)));
        }
        id.parts.push_back(std::move(part));
    }
    return id;
}

TensorFamily::TensorFamily(TensorFamilyParams params, std::vector<SplitterTree> trees,
                           std::vector<BallLatticeFamily> families)
    : params_(std::move(params)), trees_(std::move(trees)), families_(std::move(families)) {
    validate(params_);
    require(!trees_.empty(), ErrorCode::InvalidArgument, "tensor family: no trees");
    require(families_.size() == trees_.size() * parts(), ErrorCode::InvalidArgument,
            "tensor family: need one ball family per (tree, leaf)");
    for (const SplitterTree& t : trees_) {
        require(t.m() == params_.m && t.b() == params_.b, ErrorCode::InvalidArgument,
                "tensor family: tree dims differ from (m, b)");
    }
}

TensorFamily sample_tensor_family(const TensorFamilyParams& params, RngStream& rng) {
    validate(params);
    const std::uint64_t count = params.proj.tree_count();
    const std::size_t parts = params.m / params.b;
    check_verification_budget(params.ball);
    const VerifyCost per = verification_cost(params.ball);
    const double total = per.work * static_cast<double>(count) * static_cast<double>(parts);
    if (total > 2e11) {
        std::ostringstream msg;
        msg << "tensor family: sampling " << count << " trees x " << parts
            << " verified ball families needs ~" << total << " operations";
        fail(ErrorCode::ParameterInfeasible, msg.str());
    }
    std::vector<SplitterTree> trees;
    std::vector<BallLatticeFamily> families;
    trees.reserve(count);
    families.reserve(count * parts);
    for (std::uint64_t t = 0; t < count; ++t) {
        trees.push_back(params.proj.tree_at(t));
        RngStream tree_rng = rng.child("tree", t);
        for (std::size_t i = 0; i < parts; ++i) {
            RngStream part_rng = tree_rng.child("part", i);
            families.push_back(sample_family(params.ball, part_rng));
        }
    }
    return TensorFamily(params, std::move(trees), std::move(families));
}

void for_each_tensor_key(const TensorFamily& family, std::span<const double> x,
                         const std::function<bool(std::string_view)>& visit, TensorDecodeStats* stats) {
    const TensorFamilyParams& p = family.params();
    require(x.size() == p.m, ErrorCode::DimensionMismatch,
            "decode_tensor: point dim " + std::to_string(x.size()) + " != m=" + std::to_string(p.m));
    const std::size_t parts = family.parts();
    const std::size_t b = p.b;
    const double shrink = 1.0 / (1.0 + p.eps_B);
    const double scale = std::sqrt(static_cast<double>(parts));

    std::vector<double> xs(x.begin(), x.end());
    for (double& v : xs) {
        v *= shrink;
    }
    std::vector<double> comp(p.m);
    std::vector<std::vector<BallDecode>> sets(family.num_trees(), std::vector<BallDecode>(parts));

    // Decode everything first so the cap is enforced before any visit.
    std::uint64_t total = 0;
    std::uint64_t empty = 0;
    for (std::size_t t = 0; t < family.num_trees(); ++t) {
        family.tree(t).apply_into(xs, comp);
        for (double& v : comp) {
            v *= scale;
        }
        std::uint64_t product = 1;
        for (std::size_t i = 0; i < parts; ++i) {
            decode_into(family.family(t, i), std::span<const double>(comp.data() + i * b, b), sets[t][i]);
            const std::uint64_t sz = sets[t][i].size();
            if (sz == 0) {
                product = 0;
                break;
            }
            product = std::min<std::uint64_t>(product * sz, std::uint64_t{p.decode_cap} + 1);
        }
        if (product == 0) {
            ++empty;
        }
        total += product;
        if (total > p.decode_cap) {
            std::ostringstream msg;
            msg << "decode_tensor: more than " << p.decode_cap << " filter ids (tree " << t << ")";
            fail(ErrorCode::Overflow, msg.str());
        }
    }
    if (stats != nullptr) {
        stats->ids += total;
        stats->empty_products += empty;
    }

    const std::size_t part_bytes = 4 * (1 + b);
    std::string key(4 + parts * part_bytes, '\0');
    std::vector<std::size_t> pos(parts, 0);
    const auto write_u32 = [&key](std::size_t at, std::uint32_t v) {
        for (int i = 0; i < 4; ++i) {
            key[at + i] = static_cast<char>((v >> (8 * i)) & 0xFF);
        }
    };
    const auto write_part = [&](std::size_t t, std::size_t i) {
        const BallDecode& s = sets[t][i];
        const std::size_t at = 4 + i * part_bytes;
        write_u32(at, s.offsets[pos[i]]);
        for (std::size_t a = 0; a < b; ++a) {
            write_u32(at + 4 + 4 * a, static_cast<std::uint32_t>(s.cells[pos[i] * b + a]));
        }
    };
    for (std::size_t t = 0; t < family.num_trees(); ++t) {
        bool any_empty = false;
        for (std::size_t i = 0; i < parts; ++i) {
            any_empty = any_empty || sets[t][i].size() == 0;
        }
        if (any_empty) {
            continue;
        }
        write_u32(0, static_cast<std::uint32_t>(t));
        std::fill(pos.begin(), pos.end(), 0);
        for (std::size_t i = 0; i < parts; ++i) {
            write_part(t, i);
        }
        for (;;) {
            if (!visit(key)) {
                return;
            }
            std::size_t i = parts;
            while (i > 0) {
                --i;
                if (++pos[i] < sets[t][i].size()) {
                    write_part(t, i);
                    break;
                }
                pos[i] = 0;
                write_part(t, i);
                if (i == 0) {
                    i = parts + 1;
                    break;
                }
            }
            if (i == parts + 1) {
                break;
            }
        }
    }
}

std::vector<TensorFilterId> decode_tensor(const TensorFamily& family, const RealVector& x) {
    std::vector<TensorFilterId> ids;
    for_each_tensor_key(family, x.view(), [&](std::string_view key) {
        ids.push_back(decode_key(key, family.params().b));
        return true;
    });
    return ids;
}

double set_radius(std::size_t m, std::size_t n, double c) {
    require(n >= 2, ErrorCode::InvalidArgument, "set_radius: n must be >= 2");
    require(m >= 1 && c > 0.0, ErrorCode::InvalidArgument, "set_radius: need m >= 1 and c > 0");
    return c * std::sqrt(static_cast<double>(m) / (8.0 * std::log(static_cast<double>(n))));
}

MidIndex::MidIndex(TensorFamily family, double c, std::size_t n, std::vector<double> points,
                   std::unordered_map<std::string, std::vector<std::uint32_t>> buckets)
    : family_(std::move(family)), c_(c), n_(n), points_(std::move(points)), buckets_(std::move(buckets)) {
    require(points_.size() == n_ * dim(), ErrorCode::InvalidArgument, "MidIndex: points must be n x m");
}

std::vector<std::string> MidIndex::sorted_keys() const {
    std::vector<std::string> keys;
    keys.reserve(buckets_.size());
    for (const auto& kv : buckets_) {
        keys.push_back(kv.first);
    }
    std::sort(keys.begin(), keys.end());
    return keys;
}

std::size_t MidIndex::total_entries() const noexcept {
    std::size_t total = 0;
    for (const auto& kv : buckets_) {
        total += kv.second.size();
    }
    return total;
}

MidIndex build_mid_index(const std::vector<RealVector>& points, TensorFamily family, double c) {
    const std::size_t m = family.params().m;
    require(c > 0.0, ErrorCode::InvalidArgument, "build_mid_index: c must be positive");
    std::vector<double> flat;
    flat.reserve(points.size() * m);
    std::unordered_map<std::string, std::vector<std::uint32_t>> buckets;
    for (std::size_t id = 0; id < points.size(); ++id) {
        const RealVector& x = points[id];
        require(x.dim() == m, ErrorCode::DimensionMismatch,
                "build_mid_index: point " + std::to_string(id) + " has dim " + std::to_string(x.dim()) +
                    ", expected " + std::to_string(m));
        flat.insert(flat.end(), x.coords().begin(), x.coords().end());
        try {
            for_each_tensor_key(family, x.view(), [&](std::string_view key) {
                buckets[std::string(key)].push_back(static_cast<std::uint32_t>(id));
                return true;
            });
        } catch (const Error& e) {
            if (e.code() == ErrorCode::Overflow) {
                fail(ErrorCode::Overflow, std::string(e.what()) + " at point " + std::to_string(id));
            }
            throw;
        }
    }
    return MidIndex(std::move(family), c, points.size(), std::move(flat), std::move(buckets));
}

MidIndex build_mid_index(const std::vector<RealVector>& points, const TensorFamilyParams& params,
                         double c, RngStream& rng) {
    return build_mid_index(points, sample_tensor_family(params, rng), c);
}

std::optional<std::uint32_t> query_mid_index_with(const MidIndex& index, std::span<const double> q,
                                                  const std::function<bool(std::uint32_t)>& accept,
                                                  std::vector<char>& visited, MidQueryStats* stats) {
    require(visited.size() >= index.size(), ErrorCode::InvalidArgument,
            "query_mid_index: visited set smaller than the index");
    std::optional<std::uint32_t> found;
    TensorDecodeStats ds;
    MidQueryStats local;
    for_each_tensor_key(
        index.family(), q,
        [&](std::string_view key) {
            ++local.ids;
            const auto it = index.buckets().find(std::string(key));
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
                if (accept(id)) {
                    found = id;
                    return false;
                }
                ++local.false_positives;
            }
            return true;
        },
        &ds);
    if (stats != nullptr) {
        stats->ids += local.ids;
        stats->buckets += local.buckets;
        stats->candidates += local.candidates;
        stats->false_positives += local.false_positives;
        stats->empty_products += ds.empty_products;
    }
    return found;
}

std::optional<std::uint32_t> query_mid_index(const MidIndex& index, const RealVector& q,
                                             MidQueryStats* stats) {
    require(q.dim() == index.dim(), ErrorCode::DimensionMismatch,
            "query_mid_index: query dim " + std::to_string(q.dim()) + " != m=" + std::to_string(index.dim()));
    std::vector<char> visited(index.size(), 0);
    const double c2 = index.c() * index.c();
    return query_mid_index_with(
        index, q.view(),
        [&](std::uint32_t id) { return kernels::squared_distance(index.point(id), q.view()) <= c2; },
        visited, stats);
}

}  // namespace lvann
