#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rankforge/forms.hpp"
#include "rankforge/rational.hpp"

namespace rankforge {

// The layer {x : map(x) = layer}; codimension is the target dimension. A
// variety built from a shape alone is the whole space (codimension 0).
class Variety {
public:
    explicit Variety(Shape shape);
    Variety(MultiaffineMap map, FVec layer);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t codim() const noexcept { return layer_.size(); }
    const MultiaffineMap* map() const noexcept { return map_ ? &*map_ : nullptr; }
    const FVec& layer() const noexcept { return layer_; }

    bool contains(std::span<const FVec> x) const;
    PointSet points() const;

private:
    Shape shape_;
    std::optional<MultiaffineMap> map_;
    FVec layer_;
};

Rational density(const Variety& v);

struct DensityReport {
    std::uint64_t size = 0;
    Rational density;
    // p^{-k r}
    Rational bound;
    bool holds = false;
};

// Empty varieties hold vacuously.
DensityReport density_bound_check(const Variety& v);

struct BohrReport {
    MultiaffineMap phi;
    std::uint64_t a_zero = 0;
    std::uint64_t phi_zero = 0;
    // |{phi = 0} \ {A = 0}|
    std::uint64_t exceptional = 0;
    bool contained = false;
    // Every coordinate A is linear in is one phi is linear in.
    bool linearity_preserved = false;
};

// phi(x)_i = A(x) . h_i for h_1..h_s uniform in the target of A, drawn
// from Rng(seed).
BohrReport bohr_external(const MultiaffineMap& a, std::size_t s, std::uint64_t seed);

struct LambdaReport {
    FVec lambda;
    std::uint64_t a_zero = 0;
    std::uint64_t phi_zero = 0;
    std::uint64_t exceptional = 0;
    bool contained = false;
};

struct BohrSimReport {
    std::size_t s = 0;
    // phi[i] is the approximation paired with a[i].
    std::vector<MultiaffineMap> phi;
    std::vector<LambdaReport> per_lambda;
    bool contained = false;
};

// s = r + ceil(log_p(1/epsilon)).
std::size_t bohr_sim_dimension(std::uint32_t p, std::size_t r, const Rational& epsilon);

// Approximates every combination sum_i lambda_i A_i at once via the
// auxiliary map (x, lambda) -> sum_i lambda_i A_i(x). All maps share one
// shape and target; epsilon lies in (0, 1].
BohrSimReport bohr_external_sim(const std::vector<MultiaffineMap>& a, const Rational& epsilon, std::uint64_t seed);

struct LayerFamily {
    MultiaffineMap map;
    std::vector<FVec> layers;
};

enum class ApproximationMode { internal, external };

// internal: |S \ union| / |G|, requires each selected layer inside S.
// external: |union \ S| / |G|, requires S inside the union.
// Violations raise ContainmentError naming the layer.
Rational approximation_error(const LayerFamily& family, const PointSet& s, ApproximationMode mode);

inline constexpr std::uint64_t kExactDiameterLimit = 4096;

struct ConnectivityReport {
    std::uint64_t size = 0;
    bool connected = false;
    std::uint64_t components = 0;
    // Present when connected. Equal bounds mean the diameter is exact.
    std::optional<std::uint64_t> diameter_lower;
    std::optional<std::uint64_t> diameter_upper;
    bool diameter_exact = false;
    std::uint64_t bfs_runs = 0;
};

// Components and diameter of S in the graph joining points that differ in
// exactly one coordinate. All-pairs search when |S| <= kExactDiameterLimit,
// otherwise eccentricity bounds from a double sweep plus sampled sources.
ConnectivityReport connectivity(const PointSet& s, bool with_diameter = true);

enum class Verdict { holds, violated, inconclusive, not_applicable };
std::string to_string(Verdict v);

struct NonzeroConnReport {
    ConnectivityReport graph;
    Rational max_bias;
    Rational eta;
    bool hypothesis_satisfied = false;
    std::uint64_t diameter_bound = 0;
    Verdict verdict = Verdict::not_applicable;
};

// eta = 2^{-2k} p^{-(k+1)(3r+2)}
Rational nonzero_conn_eta(std::uint32_t p, std::size_t k, std::size_t r);

// The set {gamma_i(x_{I_i}) = 0 for all i, rho(x) != 0}, with the bias
// hypothesis evaluated over combinations of the gammas with I_i = [k].
NonzeroConnReport nonzero_conn_check(const MultilinearMap& rho, const std::vector<IndexedForm>& gammas);

// z with v1.z != 0, v2.z != 0 and u.z = 0 for every u, or nullopt exactly
// when v1 or v2 lies in the span of the u.
std::optional<FVec> find_common_nonvanisher(std::uint32_t p, const FVec& v1, const FVec& v2, const std::vector<FVec>& us);

struct SolvabilityReport {
    bool exists = false;
    std::optional<FVec> y;
    // mu with sum_i mu_i x_i = 0 and mu . lambda != 0
    std::optional<FVec> mu;
};

// Decides x_i . y = lambda_i by elimination and, independently, by the
// dual condition over all mu; throws VerificationError if they disagree.
SolvabilityReport solvability_check(std::uint32_t p, std::size_t n, const std::vector<FVec>& xs, const FVec& lambda);

struct MultilinearizationReport {
    std::vector<IndexedForm> forms;
    std::size_t bound = 0;
    bool contained = false;
    bool nonempty = false;
};

// Homogeneous multilinear forms whose common zero set lies in {A = 0}.
// Throws PreconditionError for an empty variety and ContainmentError when
// D is not inside {A = 0}.
MultilinearizationReport multilinearize_variety(const Variety& d, const MultilinearMap& a);

// Points where every form vanishes; each form lives on G_{subset}.
PointSet common_zero_set(const Shape& shape, const std::vector<IndexedForm>& forms);

// Basis of the multilinear forms on the shape that vanish on S.
std::vector<MultilinearMap> forms_vanishing_on(const PointSet& s);

} // namespace rankforge
