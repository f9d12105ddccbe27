#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "rankforge/analytic_rank.hpp"
#include "rankforge/forms.hpp"
#include "rankforge/rational.hpp"

namespace rankforge {

// Exact rational function on G_[k]: value(x) = num[x] / den.
struct RationalTable {
    Shape shape;
    std::vector<std::int64_t> num;
    std::uint64_t den = 1;

    Rational at(std::uint64_t point) const { return Rational(BigInt(num.at(point)), BigInt(den)); }
    Rational mean() const;
};

RationalTable indicator_table(const PointSet& s);

// Conv_i f(x) = E_y f(.., y + x_i, ..) conj f(.., y, ..), direction i 0-based.
DomainTable conv_dir(const DomainTable& f, std::size_t direction);
// Throws ResourceError when the common denominator would overflow 64 bits.
RationalTable conv_dir(const RationalTable& f, std::size_t direction);

// Conv_{d_l} ... Conv_{d_1} applied in the listed order.
RationalTable conv_chain(const PointSet& z, const std::vector<std::size_t>& directions);
// Conv_{i-1} ... Conv_0 z.
RationalTable conv_chain(const PointSet& z, std::size_t levels);

// An [i]-arrangement: 2^i points, the concatenation of an [i-1]-arrangement
// of lengths (.., l_i + y, ..) and one of lengths (.., y, ..).
struct Arrangement {
    std::size_t level = 0;
    std::uint64_t lengths = 0;
    std::vector<std::uint64_t> points;
};

// Number of choices y that determine an [i]-arrangement: 2^i - 1.
std::size_t arrangement_choice_count(std::size_t level);

// Choices are consumed in preorder: this level's y, then those of the
// first half, then those of the second.
Arrangement make_arrangement(const Shape& shape, std::size_t level, std::uint64_t lengths,
                             const std::vector<std::uint64_t>& choices);
Arrangement random_arrangement(const Shape& shape, std::size_t level, std::uint64_t lengths, std::uint64_t seed);

// Visits every [i]-arrangement of the given lengths; stops early when the
// visitor returns false.
void for_each_arrangement(const Shape& shape, std::size_t level, std::uint64_t lengths,
                          const std::function<bool(const Arrangement&)>& visit);

// |G_1|^{2^{i-1}} ... |G_i|, the number of [i]-arrangements of any lengths.
std::uint64_t arrangement_total(const Shape& shape, std::size_t level);

// Arrangements with every point in S, counted by recursion over the choices.
std::uint64_t count_arrangements(const PointSet& s, std::size_t level, std::uint64_t lengths);

struct ArrangementIdentityReport {
    std::uint64_t direct = 0;
    Rational formula;
    bool holds = false;
};

// direct count versus Conv_i ... Conv_1 S(l) |G_1|^{2^{i-1}} ... |G_i|.
ArrangementIdentityReport arrangement_identity_check(const PointSet& s, std::size_t level, std::uint64_t lengths);

struct PositionCountReport {
    std::uint64_t direct = 0;
    std::uint64_t expected = 0;
    bool holds = false;
};

// Arrangements of lengths l holding x at position j (1-based, j <= 2^i).
PositionCountReport position_count_check(const Shape& shape, std::uint64_t x, std::uint64_t lengths, std::size_t level,
                                         std::size_t position);

struct PropagationReport {
    bool all_points_vanish = false;
    bool lengths_vanish = false;
    // all_points_vanish implies lengths_vanish.
    bool holds = false;
};

PropagationReport vanishing_propagation_check(const MultilinearMap& a, const Arrangement& q);

struct ArrangementSuiteReport {
    std::uint64_t checks = 0;
    std::uint64_t identity_mismatches = 0;
    std::uint64_t position_mismatches = 0;
    std::uint64_t propagation_violations = 0;
    // Propagation checks whose arrangement lay inside {A = 0}.
    std::uint64_t propagation_nontrivial = 0;
    bool holds = false;
};

// `checks` random instances of each of the three arrangement checks over
// p in {2, 3}, k <= 3, dims <= 2; instance t draws from Rng(derive_seed(seed, t)).
ArrangementSuiteReport arrangement_suite(std::uint64_t checks, std::uint64_t seed);

struct CsChainReport {
    Rational density;
    // means[j] = E Conv_j ... Conv_1 Z for j = 0..k.
    std::vector<Rational> means;
    // steps[j-1]: means[j] >= means[j-1]^2.
    std::vector<bool> steps;
    bool final_holds = false;
    bool holds = false;
};

CsChainReport cs_chain_check(const PointSet& z);
CsChainReport cs_chain_check(const MultilinearMap& beta);

struct ChainTerm {
    std::complex<double> c;
    MultiaffineMap rho;
};

struct ConvApproximationReport {
    double max_deviation = 0;
    Rational exceptional_density;
    double coefficient_mass = 0;
    bool within_epsilon = false;
    bool exceptional_small = false;
    bool mass_ok = false;
    bool holds = false;
};

// Checks |Conv_l ... Conv_1 Z(x) - sum_i c_i chi(rho_i(x))| <= epsilon off
// (union of the gamma layers) x G_l, with gamma on G_{[k]\{l}}, the union of
// density at most epsilon and sum |c_i| <= 1. l is 0-based here.
ConvApproximationReport conv_approximation_check(const PointSet& z, std::size_t l, const std::vector<ChainTerm>& terms,
                                                 const MultiaffineMap& gamma, const std::vector<FVec>& layers,
                                                 double epsilon);

// Lowest-index point where the table reaches the threshold.
std::optional<std::uint64_t> find_chain_point(const RationalTable& chain, const Rational& threshold);

struct ExtractionReport {
    std::uint64_t checked = 0;
    // Points of D with a [k]-arrangement inside {A = 0}.
    std::uint64_t certified = 0;
    bool contained = false;
};

// For each x in D, searches a [k]-arrangement of lengths x inside {A = 0};
// when one exists A(x) = 0 follows, and is then confirmed directly.
ExtractionReport weak_extraction_check(const MultilinearMap& a, const PointSet& d);

} // namespace rankforge
