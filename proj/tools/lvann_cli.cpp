// lvann: build and query Las Vegas ANN indexes, plus the experiment drivers.
//
// Exit codes: 0 success, 1 Las Vegas miss in strict mode, 2 input error,
// 3 infeasible parameters (including failed verification and overflow).

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lvann/ball/ball_lattice.hpp"
#include "lvann/error.hpp"
#include "lvann/harness/harness.hpp"
#include "lvann/kernels/kernels.hpp"

namespace {

using namespace lvann;

constexpr int kOk = 0;
constexpr int kMiss = 1;
constexpr int kInput = 2;
constexpr int kInfeasible = 3;

int exit_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::ParameterInfeasible:
        case ErrorCode::VerificationFailure:
        case ErrorCode::Overflow:
        case ErrorCode::Estimation:
            return kInfeasible;
        case ErrorCode::NotFound:
            return kMiss;
        default:
            return kInput;
    }
}

struct Common {
    std::uint64_t seed = 1;
    std::size_t n = 2000;
    std::size_t d = 128;
    double c = 2.0;
    std::string mode = "subsampled";
    std::string out;
    std::size_t queries = 500;
    std::string kernels = "auto";
    TopConfig top;
};

TopConfig resolved(const Common& o) {
    TopConfig cfg = o.top;
    cfg.seed = o.seed;
    cfg.proj_mode = o.mode == "strict" ? ProjCollection::Mode::Full : ProjCollection::Mode::Subsampled;
    return cfg;
}

Dataset load_any(const std::string& path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
        return load_csv(path);
    }
    return load_fvecs(path);
}

int cmd_gen_data(const Common& o) {
    require(!o.out.empty(), ErrorCode::InvalidArgument, "gen-data: --out is required");
    const PlantedInstance inst = gen_planted(o.n, o.d, o.c, o.queries, o.seed);
    save_fvecs(inst.data, o.out + ".fvecs");
    Dataset q;
    q.dim = o.d;
    q.points = inst.queries;
    q.source = "queries";
    save_fvecs(q, o.out + ".queries.fvecs");
    std::printf("wrote %zu points and %zu queries (d=%zu, c=%g, seed=%llu) to %s.*\n%s\n", inst.data.points.size(),
                inst.queries.size(), o.d, o.c, static_cast<unsigned long long>(o.seed), o.out.c_str(),
                inst.audit.describe().c_str());
    return kOk;
}

int cmd_build(const Common& o, const std::string& data_path) {
    require(!o.out.empty(), ErrorCode::InvalidArgument, "build: --out is required");
    const Dataset data = load_any(data_path);
    const TopConfig cfg = resolved(o);
    const TopIndex index = build_top_index(data.points, o.c, cfg);
    save_index(index, o.out);
    std::printf("%s\nwrote %s\n", index.record().describe(cfg).c_str(), o.out.c_str());
    return kOk;
}

int cmd_query(const std::string& index_path, const std::string& query_path, double r) {
    const TopIndex index = load_index(index_path);
    const Dataset queries = load_any(query_path);
    std::vector<RealVector> data;
    data.reserve(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        data.emplace_back(std::vector<double>(index.point(i).begin(), index.point(i).end()));
    }
    std::size_t misses = 0;
    for (std::size_t j = 0; j < queries.points.size(); ++j) {
        const RealVector& q = queries.points[j];
        const TopQueryReport rep = query_top_index(index, q);
        // A miss only counts when some point really lies within r.
        const bool promised = brute_force_nn(data, q).second <= r;
        if (rep.result) {
            std::printf("%zu %u %.6f candidates=%llu\n", j, *rep.result, rep.distance,
                        static_cast<unsigned long long>(rep.candidates));
        } else {
            std::printf("%zu none candidates=%llu%s\n", j, static_cast<unsigned long long>(rep.candidates),
                        promised ? " MISS" : "");
            misses += promised ? 1 : 0;
        }
    }
    std::printf("%zu queries, %zu misses (%s)\n", queries.points.size(), misses,
                index.record().strict ? "strict" : "subsampled");
    return misses > 0 && index.record().strict ? kMiss : kOk;
}

int cmd_bench(const Common& o) {
    const PlantedInstance inst = gen_planted(o.n, o.d, o.c, o.queries, o.seed);
    const TopConfig cfg = resolved(o);
    const TopIndex index = build_top_index(inst.data.points, o.c, cfg);
    std::printf("%s\n%s\n", index.record().describe(cfg).c_str(), inst.audit.describe().c_str());
    const RecallReport rep = run_recall(index, inst.queries);
    std::printf("%s\n", rep.describe().c_str());
    return rep.hard_failure() ? kMiss : kOk;
}

int cmd_verify_family(std::size_t b, double w, double delta, std::uint64_t seed) {
    const BallLatticeParams p = make_ball_params(b, w, delta);
    RngStream rng(seed, "verify-family");
    const BallLatticeFamily fam = sample_family(p, rng);
    const VerifyReport rep = verify_family_report(fam);
    std::printf("b=%zu w=%g delta=%g N=%zu attempts=%zu\n%s\n", p.b, p.w, p.delta, p.N, fam.attempts(),
                rep.describe().c_str());
    return rep.ok ? kOk : kInfeasible;
}

int cmd_estimate_rho(std::size_t b, double w, double r, double c, std::uint64_t trials, std::uint64_t seed,
                     double slack) {
    const BallTorusModel model(b, w);
    const MCEstimate est = estimate_mc_params(model, r, c, trials, seed);
    const RhoBoundReport bound = check_rho_bound(est, c, 2.0, slack);
    std::printf("%s\n%s\n%s\n", model.name().c_str(), est.describe().c_str(), bound.describe().c_str());
    return kOk;
}

int cmd_sphere_demo(const SphereDemoConfig& cfg) {
    const SphereDemoReport rep = run_sphere_demo(cfg);
    std::printf("%s\n", rep.describe().c_str());
    return rep.hits == rep.queries || !rep.verified ? kOk : kMiss;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Las Vegas locality-sensitive-filter nearest neighbour search"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "key=value parameter file; flags override it");
    app.allow_config_extras(CLI::config_extras_mode::error);

    Common o;
    app.add_option("--seed", o.seed, "master seed");
    app.add_option("--n", o.n, "number of data points");
    app.add_option("--d", o.d, "dimension");
    app.add_option("--c", o.c, "approximation factor")->check(CLI::PositiveNumber);
    app.add_option("--mode", o.mode, "strict (full splitter enumeration) or subsampled")
        ->check(CLI::IsMember({"strict", "subsampled"}));
    app.add_option("--out", o.out, "output path");
    app.add_option("--queries", o.queries, "number of queries");
    app.add_option("--kernels", o.kernels, "scalar, avx2 or auto")->check(CLI::IsMember({"scalar", "avx2", "auto"}));
    app.add_option("--kappa1", o.top.kappa1);
    app.add_option("--kappa2", o.top.kappa2);
    app.add_option("--eps-A", o.top.eps_A);
    app.add_option("--eps-B", o.top.eps_B);
    app.add_option("--b", o.top.b, "ball-lattice dimension");
    app.add_option("--w-scale", o.top.w_scale);
    app.add_option("--proj-s", o.top.proj_s, "candidates per node in subsampled mode");
    app.add_option("--max-resamples", o.top.max_resamples);
    app.add_option("--decode-cap", o.top.decode_cap);
    app.add_option("--m-prime", o.top.force_m_prime, "force the stage-1 dimension");
    app.add_option("--m", o.top.force_m, "force the terminal dimension");

    auto* gen = app.add_subcommand("gen-data", "write a planted instance as fvecs");
    auto* build = app.add_subcommand("build", "build an index file");
    std::string data_path;
    build->add_option("data", data_path, "fvecs or csv dataset")->required();
    auto* query = app.add_subcommand("query", "query an index file");
    std::string index_path;
    std::string query_path;
    double near_r = 1.0;
    query->add_option("index", index_path)->required();
    query->add_option("queries", query_path, "fvecs or csv queries")->required();
    query->add_option("--r", near_r, "near radius used to classify misses");
    auto* bench = app.add_subcommand("bench", "planted instance, build, recall report");

    auto* verify = app.add_subcommand("verify-family", "sample and verify a ball-lattice family");
    std::size_t vb = 3;
    double vw = 2.0;
    double vdelta = 0.0;
    verify->add_option("--dim", vb, "ball dimension");
    verify->add_option("--w", vw, "ball radius");
    verify->add_option("--delta", vdelta, "net spacing (default rule when omitted)");

    auto* rho = app.add_subcommand("estimate-rho", "Monte Carlo exponent of the ball-lattice family");
    std::size_t rb = 8;
    double rw = 2.0;
    double rr = 1.0;
    std::uint64_t trials = 1000000;
    double slack = 0.3;
    rho->add_option("--dim", rb, "ball dimension");
    rho->add_option("--w", rw, "ball radius");
    rho->add_option("--r", rr, "near distance");
    rho->add_option("--trials", trials);
    rho->add_option("--slack", slack, "allowed shortfall below 1/c^2");

    auto* sphere = app.add_subcommand("sphere-demo", "spherical filter index on planted sphere data");
    SphereDemoConfig sc;
    sphere->add_option("--dim", sc.b, "component dimension b");
    sphere->add_option("--m", sc.m, "ambient dimension (m = b uses a single family)");
    sphere->add_option("--r", sc.r, "near radius");
    sphere->add_option("--rho", sc.rho, "symmetric exponent for the threshold solver");
    sphere->add_option("--n-param", sc.n_param, "n in the threshold targets");
    sphere->add_option("--K", sc.K, "exponent budget in the threshold targets");
    sphere->add_flag("--verify", sc.verify, "verify each family on its net");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInput;
    }

    try {
        if (!kernels::select(o.kernels)) {
            std::fprintf(stderr, "error: kernel set '%s' is not available on this machine\n", o.kernels.c_str());
            return kInput;
        }
        if (*gen) {
            return cmd_gen_data(o);
        }
        if (*build) {
            return cmd_build(o, data_path);
        }
        if (*query) {
            return cmd_query(index_path, query_path, near_r);
        }
        if (*bench) {
            return cmd_bench(o);
        }
        if (*verify) {
            return cmd_verify_family(vb, vw, vdelta, o.seed);
        }
        if (*rho) {
            return cmd_estimate_rho(rb, rw, rr, o.c, trials, o.seed, slack);
        }
        if (*sphere) {
            sc.c = o.c;
            if (app.count("--n") > 0) {
                sc.n = o.n;
            }
            if (app.count("--queries") > 0) {
                sc.queries = o.queries;
            }
            sc.seed = o.seed;
            return cmd_sphere_demo(sc);
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error [%s]: %s\n", to_string(e.code()), e.what());
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kInput;
    }
    return kInput;
}
