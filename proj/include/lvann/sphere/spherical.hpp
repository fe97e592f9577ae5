#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "lvann/core/real_vector.hpp"
#include "lvann/core/rng.hpp"
#include "lvann/splitters/splitters.hpp"

namespace lvann {

// ---------------------------------------------------------------- thresholds

/// Slack of a (rho_u, rho_q) pair against a tradeoff curve: lhs - rhs, so a
/// non-negative value means feasible.
///   general: (1 - a(r) a(cr)) sqrt(rho_q) + (a(r) - a(cr)) sqrt(rho_u) >= b(r) b(cr)
///   data-dependent: c^2 sqrt(rho_q) + (c^2 - 1) sqrt(rho_u) >= sqrt(2c^2 - 1)
double tradeoff_slack_general(double r, double c, double rho_u, double rho_q);
double tradeoff_slack_data_dependent(double c, double rho_u, double rho_q);

struct ThresholdSolution {
    double eta_u = 0;
    double eta_q = 0;
    // F(eta_u)/G(r), F(eta_q)/G(r), G(cr)/G(r) and their targets
    // n^{rho_u/K}, n^{rho_q/K}, n^{(rho_q-1)/K}.
    double ratio[3] = {0, 0, 0};
    double target[3] = {0, 0, 0};
    double worst = 0;  // max ratio / target
    bool within_slack = false;

    std::string describe() const;
};

/// Plugs thresholds back into F and G.
ThresholdSolution evaluate_thresholds(double r, double c, double rho_u, double rho_q, double n, double K,
                                      double eta_u, double eta_q, double slack = 1.05);

/// eta_q is tied to eta_u through the first two ratios; eta_u is bisected to
/// balance the first and third. Throws ParameterInfeasible below the general
/// curve or when the balanced point misses the slack.
ThresholdSolution solve_thresholds(double r, double c, double rho_u, double rho_q, double n, double K,
                                   double slack = 1.05);

// ------------------------------------------------------------------- family

enum class Side { Update, Query };

struct SphericalParams {
    std::size_t b = 2;
    double r = 0.5;
    double c = 2.0;
    double eta_u = 1.0;
    double eta_q = 1.0;
    double delta_s = 0.5;
    std::size_t N = 1;
    double K = 1.0;  // reporting only
    std::size_t max_resamples = 16;
    double net_cap = 2e6;  // largest net enumerated for verification
};

void validate(const SphericalParams& p);

double net_spacing(const SphericalParams& p);  // r delta_s / sqrt(b)
double net_radius(const SphericalParams& p);   // around the pole, at most 2
double pair_radius(const SphericalParams& p);  // r (1 + 2 delta_s)
double net_size_estimate(const SphericalParams& p);

// ceil((2 ln |L| + ln 2) / G(r(1 + 2 delta_s), eta_u, eta_q)).
std::size_t required_filters(const SphericalParams& p, double net_size);

/// delta_s <= 0 selects 1/b. N uses the exact net size when the net is small
/// enough to enumerate and the volume estimate otherwise.
SphericalParams make_spherical_params(std::size_t b, double r, double c, double eta_u, double eta_q,
                                      double delta_s = 0.0, double K = 1.0);

/// Cubes of side r(b+2) at the corners of rb Z^b + shift. Each cap (cube
/// intersected with the sphere) has a frame: the Householder reflection taking
/// the projected cube centre to e_1.
class CapCover {
public:
    CapCover() = default;
    CapCover(std::size_t b, double r, std::vector<double> shift);

    static CapCover sample(std::size_t b, double r, RngStream& rng);

    std::size_t dim() const noexcept { return b_; }
    double step() const noexcept { return r_ * static_cast<double>(b_); }
    double side() const noexcept { return r_ * static_cast<double>(b_ + 2); }
    const std::vector<double>& shift() const noexcept { return shift_; }

    // Lattice indices of every cube containing x (half-open cubes).
    std::vector<std::vector<std::int32_t>> cubes(std::span<const double> x) const;
    bool contains(std::span<const std::int32_t> cube, std::span<const double> x) const;
    std::vector<double> centre(std::span<const std::int32_t> cube) const;
    // Reflection of x into the canonical frame of a cube.
    void to_frame(std::span<const std::int32_t> cube, std::span<const double> x, std::span<double> out) const;

private:
    std::size_t b_ = 0;
    double r_ = 0;
    std::vector<double> shift_;
};

/// Normalized grid points (spacing r delta_s / sqrt b) of the shell around the
/// unit sphere, within net_radius of e_1.
struct CapNet {
    std::size_t b = 0;
    std::vector<double> points;  // flat, unit norm
    std::size_t size() const noexcept { return b == 0 ? 0 : points.size() / b; }
    std::span<const double> point(std::size_t i) const noexcept { return {points.data() + i * b, b}; }
};

CapNet build_cap_net(const SphericalParams& p);

/// Rounds a canonical-frame point to the grid and projects it to the sphere.
std::vector<double> round_to_net(const SphericalParams& p, std::span<const double> y);

class SphericalFamily {
public:
    SphericalFamily() = default;
    SphericalFamily(SphericalParams params, CapCover cover, std::vector<double> z, bool verified,
                    std::size_t attempts = 0);

    const SphericalParams& params() const noexcept { return params_; }
    const CapCover& cover() const noexcept { return cover_; }
    std::size_t size() const noexcept { return params_.N; }
    std::span<const double> z(std::size_t i) const noexcept { return {z_.data() + i * params_.b, params_.b}; }
    const std::vector<double>& zs() const noexcept { return z_; }
    bool verified() const noexcept { return verified_; }
    std::size_t attempts() const noexcept { return attempts_; }
    double threshold(Side side) const noexcept { return side == Side::Update ? params_.eta_u : params_.eta_q; }

    // Filters of a canonical-frame point that is already on the net.
    void filters_of(std::span<const double> g, Side side, std::vector<std::uint32_t>& out) const;

private:
    SphericalParams params_;
    CapCover cover_;
    std::vector<double> z_;  // N x b raw Gaussians
    bool verified_ = false;
    std::size_t attempts_ = 0;
};

struct SphVerifyReport {
    bool ok = false;
    std::size_t net_points = 0;
    std::uint64_t pairs_checked = 0;
    std::optional<std::pair<std::size_t, std::size_t>> failing;
    std::string describe() const;
};

SphVerifyReport verify_spherical_family(const SphericalFamily& family, const CapNet& net);

/// Samples z-vectors until the net check passes; VerificationFailure after
/// max_resamples attempts, ParameterInfeasible when the net is too large.
SphericalFamily sample_spherical_family(const SphericalParams& params, RngStream& rng);
SphericalFamily sample_unverified_spherical_family(const SphericalParams& params, RngStream& rng);

struct SphFilterId {
    std::vector<std::int32_t> cube;
    std::uint32_t filter = 0;

    bool operator==(const SphFilterId&) const = default;
    auto operator<=>(const SphFilterId&) const = default;
};

std::vector<SphFilterId> decode_spherical(const SphericalFamily& family, std::span<const double> x, Side side);

// Key: b x int32 cube, u32 filter; little-endian.
std::string encode_sph_key(const SphFilterId& id);

// ------------------------------------------------------------ tensored family

struct SphTensorParams {
    std::size_t m = 2;
    std::size_t b = 2;
    double r = 0.5;  // near radius on S^{m-1}
    double c = 2.0;
    double eps_B = 0.0;
    SphericalParams sphere;  // component parameters (r', eta') on S^{b-1}
    ProjCollection proj = ProjCollection::full(2, 2);
    std::size_t decode_cap = std::size_t{1} << 20;
};

/// Component radius r(1 + 8 eps_B), thresholds scaled by sqrt(b/m). When
/// require_separation is set, c r >= sqrt 2 is enforced.
SphTensorParams make_sph_tensor_params(std::size_t m, std::size_t b, double r, double c, double eta_u,
                                       double eta_q, double eps_B, ProjCollection proj,
                                       double delta_s = 0.0, bool require_separation = true);

class SphTensorFamily {
public:
    SphTensorFamily() = default;
    SphTensorFamily(SphTensorParams params, Eigen::MatrixXd rotation, std::vector<SplitterTree> trees,
                    std::vector<SphericalFamily> families);

    const SphTensorParams& params() const noexcept { return params_; }
    const Eigen::MatrixXd& rotation() const noexcept { return rotation_; }
    std::size_t parts() const noexcept { return params_.m / params_.b; }
    std::size_t num_trees() const noexcept { return trees_.size(); }
    const SplitterTree& tree(std::size_t t) const noexcept { return trees_[t]; }
    const SphericalFamily& family(std::size_t t, std::size_t i) const noexcept {
        return families_[t * parts() + i];
    }
    bool verified() const noexcept;

private:
    SphTensorParams params_;
    Eigen::MatrixXd rotation_;  // shared pre-rotation, identity when m == b
    std::vector<SplitterTree> trees_;
    std::vector<SphericalFamily> families_;  // tree-major
};

SphTensorFamily sample_sph_tensor_family(const SphTensorParams& params, RngStream& rng, bool verify = true);

struct SphDecodeStats {
    std::uint64_t ids = 0;
    std::uint64_t rejected_trees = 0;  // some component failed the projection rule
    std::uint64_t empty_products = 0;
};

/// Visits composite keys tree by tree, last part fastest; the visitor returns
/// false to stop. Throws Overflow above decode_cap.
void for_each_sph_tensor_key(const SphTensorFamily& family, std::span<const double> x, Side side,
                             const std::function<bool(std::string_view)>& visit,
                             SphDecodeStats* stats = nullptr);

std::vector<std::string> decode_sph_tensor(const SphTensorFamily& family, std::span<const double> x, Side side);

// --------------------------------------------------------------- demo index

struct SphQueryStats {
    std::uint64_t ids = 0;
    std::uint64_t buckets = 0;
    std::uint64_t candidates = 0;
    std::uint64_t false_positives = 0;
};

class SphereIndex {
public:
    SphereIndex() = default;
    SphereIndex(SphTensorFamily family, double cr, std::vector<double> points,
                std::unordered_map<std::string, std::vector<std::uint32_t>> buckets);

    const SphTensorFamily& family() const noexcept { return family_; }
    std::size_t size() const noexcept { return points_.size() / family_.params().m; }
    std::span<const double> point(std::size_t i) const noexcept {
        const std::size_t m = family_.params().m;
        return {points_.data() + i * m, m};
    }
    double cr() const noexcept { return cr_; }
    std::size_t num_buckets() const noexcept { return buckets_.size(); }
    std::size_t total_entries() const noexcept;
    const std::unordered_map<std::string, std::vector<std::uint32_t>>& buckets() const noexcept {
        return buckets_;
    }

private:
    SphTensorFamily family_;
    double cr_ = 0;
    std::vector<double> points_;
    std::unordered_map<std::string, std::vector<std::uint32_t>> buckets_;
};

/// Unit-norm points, stored under their update-side keys.
SphereIndex build_sphere_index(const std::vector<RealVector>& points, SphTensorFamily family);

/// First stored point within c r of q among the query-side buckets.
std::optional<std::uint32_t> query_sphere_index(const SphereIndex& index, const RealVector& q,
                                                SphQueryStats* stats = nullptr);

}  // namespace lvann
