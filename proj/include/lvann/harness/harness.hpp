#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lvann/ball/ball_lattice.hpp"
#include "lvann/core/real_vector.hpp"
#include "lvann/core/rng.hpp"
#include "lvann/reduce/dim_reduction.hpp"
#include "lvann/sphere/spherical.hpp"

namespace lvann {

// -------------------------------------------------------------------- data

struct Dataset {
    std::vector<RealVector> points;
    std::size_t dim = 0;
    std::string source;
};

// Throws DimensionMismatch on mixed dims, InvalidArgument on non-finite data.
void validate(const Dataset& data);

/// fvecs: per record a little-endian int32 dim and dim float32 values.
Dataset load_fvecs(const std::string& path);
void save_fvecs(const Dataset& data, const std::string& path);
Dataset parse_fvecs(std::string_view bytes, const std::string& source = "fvecs");
std::string format_fvecs(const Dataset& data);

/// CSV: one vector per line, comma separated decimals.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& data, const std::string& path);

// Exact scan, smallest id on ties. Throws InvalidArgument when empty.
std::pair<std::uint32_t, double> brute_force_nn(const std::vector<RealVector>& points, const RealVector& q);

// ----------------------------------------------------------------- planted

struct PlantedAudit {
    bool ok = false;
    double max_planted = 0;          // largest query-to-planted distance
    double min_far = 0;              // smallest query-to-other distance
    double min_pairwise = 0;         // smallest distance between data points
    std::string describe() const;
};

struct PlantedInstance {
    Dataset data;
    std::vector<RealVector> queries;
    std::vector<std::uint32_t> planted;
    double r = 1.0;
    double c = 2.0;
    std::uint64_t seed = 0;
    PlantedAudit audit;
};

/// Far points are Gaussian clouds whose per-point scale spreads pairwise
/// distances over roughly (1.3c, 3c); every point is rejection-sampled to stay
/// beyond c of all earlier points and queries. Each query sits at distance
/// U(0, 1] from its planted point. Throws ParameterInfeasible when the
/// rejection budget runs out.
PlantedInstance gen_planted(std::size_t n, std::size_t d, double c, std::size_t num_queries, std::uint64_t seed);

PlantedAudit audit_planted(const PlantedInstance& inst);

/// Uniform points on S^{m-1}; each query is a random point at chord distance
/// U(0, r] from a uniformly chosen data point. No separation is enforced.
PlantedInstance gen_sphere_planted(std::size_t n, std::size_t m, double r, double c, std::size_t num_queries,
                                   std::uint64_t seed);

// ------------------------------------------------------------------ recall

struct QueryRecord {
    std::optional<std::uint32_t> result;
    double distance = 0;
    std::uint64_t candidates = 0;
    std::uint64_t false_positives = 0;
    double micros = 0;
};

struct RecallReport {
    std::size_t queries = 0;
    std::size_t hits = 0;
    std::size_t misses = 0;
    bool strict = false;
    std::vector<QueryRecord> records;
    std::vector<std::uint64_t> false_positives_per_block;
    double mean_candidates = 0;
    double total_seconds = 0;

    // A miss under a strict configuration breaks the Las Vegas contract.
    bool hard_failure() const noexcept { return strict && misses > 0; }
    std::string describe() const;
};

RecallReport run_recall(const TopIndex& index, const std::vector<RealVector>& queries);

// ---------------------------------------------------------------- estimate

struct WilsonInterval {
    double centre = 0;
    double radius = 0;
};

// Wilson score interval at z standard deviations.
WilsonInterval wilson(std::uint64_t successes, std::uint64_t trials, double z = 3.0);

struct TrialOutcome {
    bool close_both = false;  // close pair inside the sampled filter
    bool far_both = false;    // far pair inside the sampled filter
    bool single = false;      // one fresh point inside the sampled filter
};

/// One trial: sample a family, take a uniformly random filter from it and
/// test a close pair (distance r), a far pair (distance cr) and one point.
class McTrialModel {
public:
    virtual ~McTrialModel() = default;
    virtual TrialOutcome trial(RngStream& rng, double r, double cr) const = 0;
    virtual std::string name() const = 0;
};

/// Ball lattice on the torus [0, 3w)^b: a uniform filter is one ball around
/// a uniform offset.
class BallTorusModel final : public McTrialModel {
public:
    BallTorusModel(std::size_t b, double w);
    TrialOutcome trial(RngStream& rng, double r, double cr) const override;
    std::string name() const override;

private:
    std::size_t b_;
    double w_;
};

// The single filter containing everything.
class UniversalModel final : public McTrialModel {
public:
    TrialOutcome trial(RngStream& rng, double r, double cr) const override;
    std::string name() const override { return "universal"; }
};

struct MCEstimate {
    std::uint64_t trials = 0;
    std::uint64_t close_hits = 0;
    std::uint64_t far_hits = 0;
    std::uint64_t single_hits = 0;
    double p1 = 0;
    double p2 = 0;
    double q = 0;
    WilsonInterval p1_ci;
    WilsonInterval p2_ci;
    WilsonInterval q_ci;
    double rho = 0;  // ln(q/p1) / ln(q/p2)
    bool ordering_ok = false;  // p2 < p1 <= q at the interval level

    std::string describe() const;
};

/// Throws InvalidArgument below 1000 trials and Estimation when the exponent
/// is undefined (p1 = 0, p2 = 0 or q = p2).
MCEstimate estimate_mc_params(const McTrialModel& model, double r, double c, std::uint64_t trials,
                              std::uint64_t seed);

struct RhoBoundReport {
    double reference = 0;  // 1 / c^p
    double lower = 0;      // reference - slack
    bool in_band = false;  // rho within [lower, 1]
    bool ordering_ok = false;
    std::string describe() const;
};

RhoBoundReport check_rho_bound(const MCEstimate& est, double c, double p, double slack);

// ------------------------------------------------------------- sphere demo

struct SphereDemoConfig {
    std::size_t b = 8;
    std::size_t m = 8;
    double r = 0.5;
    double c = 2.0;
    double rho = 0.4;  // symmetric exponent handed to solve_thresholds
    double n_param = 1e4;
    double K = 4.0;
    double eps_B = 0.0;
    std::size_t n = 1000;
    std::size_t queries = 200;
    bool verify = false;
    std::uint64_t seed = 0;
};

struct SphereDemoReport {
    ThresholdSolution thresholds;
    SphericalParams params;
    bool verified = false;
    std::size_t queries = 0;
    std::size_t hits = 0;
    double mean_candidates = 0;
    double mean_update_ids = 0;
    std::string describe() const;
};

SphereDemoReport run_sphere_demo(const SphereDemoConfig& cfg);

}  // namespace lvann
