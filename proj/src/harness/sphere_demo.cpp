#include <sstream>

#include "lvann/error.hpp"
#include "lvann/harness/harness.hpp"

namespace lvann {

std::string SphereDemoReport::describe() const {
    std::ostringstream out;
    out << "b=" << params.b << " r'=" << params.r << " delta_s=" << params.delta_s << " N=" << params.N << ' '
        << thresholds.describe() << (verified ? " verified" : " unverified") << "; " << hits << '/' << queries
        << " queries answered within cr, mean candidates " << mean_candidates << ", mean update ids "
        << mean_update_ids;
    return out.str();
}

SphereDemoReport run_sphere_demo(const SphereDemoConfig& cfg) {
    SphereDemoReport rep;
    rep.thresholds = solve_thresholds(cfg.r, cfg.c, cfg.rho, cfg.rho, cfg.n_param, cfg.K);
    const ProjCollection proj = cfg.m == cfg.b ? ProjCollection::full(cfg.m, cfg.b)
                                               : ProjCollection::subsampled(cfg.m, cfg.b, 2, cfg.seed);
    const SphTensorParams tp = make_sph_tensor_params(cfg.m, cfg.b, cfg.r, cfg.c, rep.thresholds.eta_u,
                                                      rep.thresholds.eta_q, cfg.eps_B, proj, 0.0, cfg.m != cfg.b);
    rep.params = tp.sphere;
    RngStream rng(cfg.seed, "sphere-demo");
    RngStream fam_rng = rng.child("family");
    SphTensorFamily family = sample_sph_tensor_family(tp, fam_rng, cfg.verify);
    rep.verified = family.verified();
    const PlantedInstance inst = gen_sphere_planted(cfg.n, cfg.m, cfg.r, cfg.c, cfg.queries, cfg.seed);
    const SphereIndex index = build_sphere_index(inst.data.points, std::move(family));
    rep.mean_update_ids = static_cast<double>(index.total_entries()) / static_cast<double>(cfg.n);
    double candidates = 0;
    for (const RealVector& q : inst.queries) {
        SphQueryStats st;
        const auto hit = query_sphere_index(index, q, &st);
        candidates += static_cast<double>(st.candidates);
        ++rep.queries;
        if (hit) {
            ++rep.hits;
        }
    }
    rep.mean_candidates = rep.queries == 0 ? 0.0 : candidates / static_cast<double>(rep.queries);
    return rep;
}

}  // namespace lvann
