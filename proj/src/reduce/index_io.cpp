#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lvann/error.hpp"
#include "lvann/reduce/dim_reduction.hpp"

namespace lvann {
namespace {

constexpr char kMagic[5] = {'L', 'V', 'A', 'N', 'N'};

static_assert(std::endian::native == std::endian::little, "index files are written little-endian");

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) { raw(&v, sizeof v); }
    void u64(std::uint64_t v) { raw(&v, sizeof v); }
    void i32(std::int32_t v) { raw(&v, sizeof v); }
    void f64(double v) { raw(&v, sizeof v); }
    void size(std::size_t v) { u64(static_cast<std::uint64_t>(v)); }
    void str(std::string_view s) {
        size(s.size());
        out_.append(s);
    }
    void f64s(const std::vector<double>& v) {
        size(v.size());
        raw(v.data(), v.size() * sizeof(double));
    }
    void u32s(const std::vector<std::uint32_t>& v) {
        size(v.size());
        raw(v.data(), v.size() * sizeof(std::uint32_t));
    }
    std::string take() { return std::move(out_); }

private:
    void raw(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
    std::string out_;
};

class Reader {
public:
    explicit Reader(std::string_view in) : in_(in) {}

    std::uint8_t u8() {
        std::uint8_t v;
        raw(&v, 1);
        return v;
    }
    std::uint32_t u32() {
        std::uint32_t v;
        raw(&v, sizeof v);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v;
        raw(&v, sizeof v);
        return v;
    }
    std::int32_t i32() {
        std::int32_t v;
        raw(&v, sizeof v);
        return v;
    }
    double f64() {
        double v;
        raw(&v, sizeof v);
        return v;
    }
    std::size_t size() {
        const std::uint64_t v = u64();
        if (v > in_.size()) {
            bad("length field " + std::to_string(v) + " exceeds file size");
        }
        return static_cast<std::size_t>(v);
    }
    // Plain quantity, not a length; no file-size sanity check.
    std::size_t value() { return static_cast<std::size_t>(u64()); }
    std::string str() {
        const std::size_t n = size();
        std::string s(n, '\0');
        raw(s.data(), n);
        return s;
    }
    std::vector<double> f64s() {
        std::vector<double> v(count(sizeof(double)));
        raw(v.data(), v.size() * sizeof(double));
        return v;
    }
    std::vector<std::uint32_t> u32s() {
        std::vector<std::uint32_t> v(count(sizeof(std::uint32_t)));
        raw(v.data(), v.size() * sizeof(std::uint32_t));
        return v;
    }
    void magic() {
        char m[5];
        raw(m, 5);
        if (std::memcmp(m, kMagic, 5) != 0) {
            fail(ErrorCode::MalformedHeader, "index file: bad magic");
        }
    }
    bool done() const noexcept { return pos_ == in_.size(); }
    [[noreturn]] void bad(const std::string& what) const {
        fail(ErrorCode::MalformedHeader, "index file: " + what + " at byte " + std::to_string(pos_));
    }

private:
    std::size_t count(std::size_t elem) {
        const std::uint64_t n = u64();
        if (n > (in_.size() - pos_) / elem) {
            bad("array length " + std::to_string(n) + " exceeds remaining bytes");
        }
        return static_cast<std::size_t>(n);
    }
    void raw(void* p, std::size_t n) {
        if (n > in_.size() - pos_) {
            bad("truncated");
        }
        std::memcpy(p, in_.data() + pos_, n);
        pos_ += n;
    }
    std::string_view in_;
    std::size_t pos_ = 0;
};

void put_ball(Writer& w, const BallLatticeParams& p) {
    w.size(p.b);
    w.f64(p.w);
    w.f64(p.delta);
    w.size(p.N);
    w.size(p.max_resamples);
}

BallLatticeParams get_ball(Reader& r) {
    BallLatticeParams p;
    p.b = r.size();
    p.w = r.f64();
    p.delta = r.f64();
    p.N = r.size();
    p.max_resamples = r.size();
    return p;
}

void put_proj(Writer& w, const ProjCollection& p) {
    w.size(p.m());
    w.size(p.b());
    w.u8(p.mode() == ProjCollection::Mode::Full ? 0 : 1);
    w.size(p.per_node());
    w.u64(p.seed());
    w.f64s(p.eps());
    w.u64(p.cap());
}

ProjCollection get_proj(Reader& r) {
    const std::size_t m = r.size();
    const std::size_t b = r.size();
    const std::uint8_t mode = r.u8();
    if (mode > 1) {
        r.bad("unknown collection mode");
    }
    const std::size_t per_node = r.size();
    const std::uint64_t seed = r.u64();
    std::vector<double> eps = r.f64s();
    const std::uint64_t cap = r.u64();
    return ProjCollection(m, b, mode == 0 ? ProjCollection::Mode::Full : ProjCollection::Mode::Subsampled,
                          per_node, seed, std::move(eps), cap);
}

void put_tree(Writer& w, const SplitterTree& t) {
    w.size(t.m());
    w.size(t.b());
    w.size(t.nodes().size());
    for (const HalvingSpec& s : t.nodes()) {
        w.u32(s.perm().k());
        w.u64(s.perm().index());
        w.u64(s.sign().index());
    }
}

SplitterTree get_tree(Reader& r) {
    const std::size_t m = r.size();
    const std::size_t b = r.size();
    const std::size_t count = r.size();
    std::vector<HalvingSpec> nodes;
    for (std::size_t i = 0; i < count; ++i) {
        const unsigned k = r.u32();
        const std::uint64_t perm = r.u64();
        const std::uint64_t sign = r.u64();
        nodes.emplace_back(PairwisePerm::from_index(k, perm), FourwiseSign::from_index(k, sign));
    }
    return SplitterTree(m, b, std::move(nodes));
}

void put_mid(Writer& w, const MidIndex& mid) {
    const TensorFamily& fam = mid.family();
    const TensorFamilyParams& p = fam.params();
    w.size(p.m);
    w.size(p.b);
    w.f64(p.eps_B);
    put_ball(w, p.ball);
    put_proj(w, p.proj);
    w.size(p.decode_cap);
    w.size(fam.num_trees());
    for (const SplitterTree& t : fam.trees()) {
        put_tree(w, t);
    }
    w.size(fam.families().size());
    for (const BallLatticeFamily& f : fam.families()) {
        put_ball(w, f.params());
        w.f64s(f.offsets());
        w.u8(f.verified() ? 1 : 0);
        w.size(f.attempts());
    }
    w.f64(mid.c());
    w.size(mid.size());
    w.f64s(mid.points());
    const std::vector<std::string> keys = mid.sorted_keys();
    w.size(keys.size());
    for (const std::string& k : keys) {
        w.str(k);
        w.u32s(mid.buckets().at(k));
    }
}

MidIndex get_mid(Reader& r) {
    TensorFamilyParams p;
    p.m = r.size();
    p.b = r.size();
    p.eps_B = r.f64();
    p.ball = get_ball(r);
    p.proj = get_proj(r);
    p.decode_cap = r.value();
    const std::size_t num_trees = r.size();
    std::vector<SplitterTree> trees;
    for (std::size_t t = 0; t < num_trees; ++t) {
        trees.push_back(get_tree(r));
    }
    const std::size_t num_fams = r.size();
    std::vector<BallLatticeFamily> fams;
    for (std::size_t i = 0; i < num_fams; ++i) {
        BallLatticeParams bp = get_ball(r);
        std::vector<double> offsets = r.f64s();
        const bool verified = r.u8() != 0;
        const std::size_t attempts = r.size();
        fams.emplace_back(bp, std::move(offsets), verified, attempts);
    }
    const double c = r.f64();
    const std::size_t n = r.size();
    std::vector<double> points = r.f64s();
    const std::size_t num_keys = r.size();
    std::unordered_map<std::string, std::vector<std::uint32_t>> buckets;
    buckets.reserve(num_keys);
    for (std::size_t i = 0; i < num_keys; ++i) {
        std::string key = r.str();
        std::vector<std::uint32_t> ids = r.u32s();
        for (std::uint32_t id : ids) {
            if (id >= n) {
                r.bad("bucket id out of range");
            }
        }
        buckets.emplace(std::move(key), std::move(ids));
    }
    return MidIndex(TensorFamily(p, std::move(trees), std::move(fams)), c, n, std::move(points),
                    std::move(buckets));
}

}  // namespace

std::string save_index_bytes(const TopIndex& index) {
    Writer w;
    for (char ch : kMagic) {
        w.u8(static_cast<std::uint8_t>(ch));
    }
    w.u32(kIndexFormatVersion);

    const TopConfig& cfg = index.config();
    w.f64(cfg.kappa1);
    w.f64(cfg.kappa2);
    w.f64(cfg.eps_A);
    w.f64(cfg.eps_B);
    w.size(cfg.b);
    w.f64(cfg.w_scale);
    w.u8(cfg.proj_mode == ProjCollection::Mode::Full ? 0 : 1);
    w.size(cfg.proj_s);
    w.f64s(cfg.proj_eps);
    w.size(cfg.max_resamples);
    w.size(cfg.decode_cap);
    w.f64(cfg.gamma);
    w.f64(cfg.beta);
    w.size(cfg.force_m_prime);
    w.size(cfg.force_m);
    w.u64(cfg.seed);

    const TopRecord& rec = index.record();
    w.size(rec.n);
    w.size(rec.d);
    w.size(rec.d_pad);
    w.f64(rec.c);
    w.size(rec.m_prime);
    w.size(rec.m);
    w.u8(rec.stage1 ? 1 : 0);
    w.u8(rec.stage2 ? 1 : 0);
    w.f64(rec.c_prime);
    w.f64(rec.c_sub);
    w.f64(rec.w);
    w.f64(rec.delta);
    w.size(rec.N);
    w.u32(rec.levels);
    w.size(rec.trees);
    w.size(rec.terminal_blocks);
    w.u8(rec.strict ? 1 : 0);

    w.u8(index.stage1() ? 1 : 0);
    if (index.stage1()) {
        w.f64s(index.stage1()->signs());
        w.u32s(index.stage1()->perm());
        w.size(index.stage1()->block_dim());
    }
    w.size(index.stage2().size());
    for (const RotationDecomp& r : index.stage2()) {
        const Eigen::MatrixXd& mat = r.matrix();
        w.size(static_cast<std::size_t>(mat.rows()));
        w.size(r.block_dim());
        for (Eigen::Index i = 0; i < mat.rows(); ++i) {
            for (Eigen::Index j = 0; j < mat.cols(); ++j) {
                w.f64(mat(i, j));
            }
        }
    }
    w.size(index.mids().size());
    for (const MidIndex& mid : index.mids()) {
        put_mid(w, mid);
    }
    w.f64s(index.points());
    return w.take();
}

TopIndex load_index_bytes(std::string_view bytes) {
    Reader r(bytes);
    r.magic();
    const std::uint32_t version = r.u32();
    if (version != kIndexFormatVersion) {
        fail(ErrorCode::VersionMismatch, "index file: format version " + std::to_string(version) +
                                             ", expected " + std::to_string(kIndexFormatVersion));
    }
    try {
        TopConfig cfg;
        cfg.kappa1 = r.f64();
        cfg.kappa2 = r.f64();
        cfg.eps_A = r.f64();
        cfg.eps_B = r.f64();
        cfg.b = r.size();
        cfg.w_scale = r.f64();
        cfg.proj_mode = r.u8() == 0 ? ProjCollection::Mode::Full : ProjCollection::Mode::Subsampled;
        cfg.proj_s = r.size();
        cfg.proj_eps = r.f64s();
        cfg.max_resamples = r.size();
        cfg.decode_cap = r.value();
        cfg.gamma = r.f64();
        cfg.beta = r.f64();
        cfg.force_m_prime = r.size();
        cfg.force_m = r.size();
        cfg.seed = r.u64();

        TopRecord rec;
        rec.n = r.size();
        rec.d = r.size();
        rec.d_pad = r.size();
        rec.c = r.f64();
        rec.m_prime = r.size();
        rec.m = r.size();
        rec.stage1 = r.u8() != 0;
        rec.stage2 = r.u8() != 0;
        rec.c_prime = r.f64();
        rec.c_sub = r.f64();
        rec.w = r.f64();
        rec.delta = r.f64();
        rec.N = r.size();
        rec.levels = r.u32();
        rec.trees = r.size();
        rec.terminal_blocks = r.size();
        rec.strict = r.u8() != 0;

        std::optional<FastJLDecomp> stage1;
        if (r.u8() != 0) {
            std::vector<double> signs = r.f64s();
            std::vector<std::uint32_t> perm = r.u32s();
            const std::size_t block = r.size();
            stage1.emplace(std::move(signs), std::move(perm), block);
        }
        std::vector<RotationDecomp> stage2;
        const std::size_t num2 = r.size();
        for (std::size_t i = 0; i < num2; ++i) {
            const std::size_t dim = r.size();
            const std::size_t block = r.size();
            if (dim > 1u << 16) {
                r.bad("rotation dimension too large");
            }
            Eigen::MatrixXd mat(dim, dim);
            for (std::size_t a = 0; a < dim; ++a) {
                for (std::size_t b = 0; b < dim; ++b) {
                    mat(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = r.f64();
                }
            }
            stage2.emplace_back(std::move(mat), block);
        }
        const std::size_t num_mids = r.size();
        std::vector<MidIndex> mids;
        for (std::size_t i = 0; i < num_mids; ++i) {
            mids.push_back(get_mid(r));
        }
        std::vector<double> points = r.f64s();
        if (!r.done()) {
            r.bad("trailing bytes");
        }
        return TopIndex(cfg, rec, std::move(stage1), std::move(stage2), std::move(mids), std::move(points));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::MalformedHeader) {
            throw;
        }
        fail(ErrorCode::MalformedHeader, std::string("index file: inconsistent contents: ") + e.what());
    }
}

void save_index(const TopIndex& index, const std::string& path) {
    const std::string bytes = save_index_bytes(index);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        fail(ErrorCode::Io, "cannot open " + path + " for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        fail(ErrorCode::Io, "write failed: " + path);
    }
}

TopIndex load_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorCode::Io, "cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_index_bytes(buf.str());
}

}  // namespace lvann
