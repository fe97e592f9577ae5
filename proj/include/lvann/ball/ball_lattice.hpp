#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lvann/core/rng.hpp"

namespace lvann {

/// Shifted lattices of radius-w balls in R^b with centres v_i + 3w Z^b.
struct BallLatticeParams {
    std::size_t b = 1;
    double w = 1.0;
    double delta = 1.0;  // verification net spacing
    std::size_t N = 1;   // number of offsets
    std::size_t max_resamples = 16;
};

// min(1/b, 2w/(3 sqrt b)).
double default_delta(std::size_t b, double w);

// w' = w - delta sqrt(b) / 2.
double shrunk_radius(const BallLatticeParams& p);

// Throws InvalidArgument / ParameterInfeasible when the invariants fail.
void validate(const BallLatticeParams& p);

double success_prob_lower_bound(const BallLatticeParams& p);

std::size_t required_offsets(std::size_t b, double w, double delta, double p_lb);
std::size_t required_offsets(const BallLatticeParams& p);

/// Parameters with delta (default_delta when delta <= 0) and N = required_offsets.
BallLatticeParams make_ball_params(std::size_t b, double w, double delta = 0.0,
                                   std::size_t max_resamples = 16);

double collision_prob_upper_bound(const BallLatticeParams& p, double t);

struct BallFilterId {
    std::uint32_t offset = 0;
    std::vector<std::int32_t> cell;

    bool operator==(const BallFilterId&) const = default;
    auto operator<=>(const BallFilterId&) const = default;
};

class BallLatticeFamily {
public:
    BallLatticeFamily() = default;
    BallLatticeFamily(BallLatticeParams params, std::vector<double> offsets, bool verified = false,
                      std::size_t attempts = 0);

    const BallLatticeParams& params() const noexcept { return params_; }
    std::size_t size() const noexcept { return params_.b == 0 ? 0 : offsets_.size() / params_.b; }
    std::span<const double> offset(std::size_t i) const noexcept {
        return {offsets_.data() + i * params_.b, params_.b};
    }
    const std::vector<double>& offsets() const noexcept { return offsets_; }
    bool verified() const noexcept { return verified_; }
    std::size_t attempts() const noexcept { return attempts_; }

private:
    BallLatticeParams params_;
    std::vector<double> offsets_;  // N x b, row-major
    bool verified_ = false;
    std::size_t attempts_ = 0;
};

struct NetPair {
    std::vector<double> x;
    std::vector<double> y;
};

struct VerifyReport {
    bool ok = false;
    std::uint64_t net_points = 0;
    std::uint64_t displacements = 0;  // neighbour steps per net point (half-space)
    std::uint64_t pairs_checked = 0;
    std::optional<NetPair> failing;

    std::string describe() const;
};

/// Predicted resources of one exhaustive verification.
struct VerifyCost {
    double net_points = 0;
    double displacements = 0;
    double label_bytes = 0;
    double work = 0;  // label evaluations + pair checks
};

struct VerifyBudget {
    double max_label_bytes = 1.5e9;
    double max_work = 5e10;
};

VerifyCost verification_cost(const BallLatticeParams& p);

// Throws ParameterInfeasible (naming the predicted cost) when over budget.
void check_verification_budget(const BallLatticeParams& p, const VerifyBudget& budget = {});

/// Exhaustive net check: every x, y in delta Z^b within [0, 6w]^b with
/// ||x - y|| <= 1 + delta sqrt(b) lie together in a radius-w' ball.
VerifyReport verify_family_report(const BallLatticeFamily& family, const VerifyBudget& budget = {});
bool verify_family(const BallLatticeFamily& family);

/// Draws offsets until the family verifies; throws VerificationFailure with
/// the last failing pair after max_resamples attempts.
BallLatticeFamily sample_family(const BallLatticeParams& params, RngStream& rng,
                                const VerifyBudget& budget = {});

/// Same offsets distribution without the net check, for dimensions where the
/// check is out of reach. The family is marked unverified.
BallLatticeFamily sample_unverified_family(const BallLatticeParams& params, RngStream& rng);

/// Flat decode result: ids i have offset offsets[i] and cell
/// cells[i*b, (i+1)*b).
struct BallDecode {
    std::vector<std::uint32_t> offsets;
    std::vector<std::int32_t> cells;
    std::size_t size() const noexcept { return offsets.size(); }
    void clear() noexcept {
        offsets.clear();
        cells.clear();
    }
};

void decode_into(const BallLatticeFamily& family, std::span<const double> x, BallDecode& out);
std::vector<BallFilterId> decode(const BallLatticeFamily& family, std::span<const double> x);

}  // namespace lvann
