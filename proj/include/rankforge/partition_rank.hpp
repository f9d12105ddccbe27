#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rankforge/forms.hpp"
#include "rankforge/linalg.hpp"
#include "rankforge/rational.hpp"

namespace rankforge {

// beta(x_I) * gamma(x_{[k]\I}), with beta on shape.restrict_to(subset) and
// gamma on the complement.
struct PartitionSummand {
    CoordSet subset = 0;
    MultilinearMap beta;
    MultilinearMap gamma;
};

struct PartitionDecomposition {
    Shape shape;
    std::vector<PartitionSummand> summands;

    MultilinearMap reconstruct() const;
    std::size_t size() const noexcept { return summands.size(); }
};

// Coefficients of the multilinear form x -> beta(x_I) gamma(x_{[k]\I}).
MultilinearMap summand_form(const Shape& shape, const PartitionSummand& s);

// Rows run over monomials of G_I, columns over monomials of the
// complement, both row-major in coordinate order. I must be nonempty proper.
Matrix flatten(const MultilinearMap& alpha, CoordSet subset);

// A witness of partition rank exactly 1, or nullopt (always for alpha = 0).
// Bipartitions are tried with coordinate 1 inside I, in increasing subset
// order; beta's leading nonzero coefficient is 1.
std::optional<PartitionSummand> partition_rank_one(const MultilinearMap& alpha);

// ceil(arank), computed exactly from the vanishing count.
std::size_t lovett_lower_bound(const MultilinearMap& alpha);

struct PrankOptions {
    std::size_t r_max = 4;
    // Membership tests the search may spend before giving up.
    std::uint64_t budget_nodes = 1'000'000;
};

struct RankReport {
    std::size_t lo = 0;
    std::size_t hi = 0;
    std::size_t lovett_lower = 0;
    std::size_t flattening_bound = 0;
    std::uint64_t nodes = 0;
    // A decomposition with hi summands.
    PartitionDecomposition witness;

    bool exact() const noexcept { return lo == hi; }
};

// Exact partition rank by iterative deepening from the Lovett bound, or an
// interval [lo, hi] when r_max or the budget cuts the search short. Throws
// ArityError for k = 1.
RankReport prank_exact(const MultilinearMap& alpha, const PrankOptions& options = {});

struct StrongDecomposition {
    PartitionDecomposition decomposition;
    std::size_t rank = 0;
    Rational bias;
    // bias >= c implies c p^rank <= 1.
    bool bound_holds = false;
};

// alpha(x, y) = sum_i beta_i(x) (v_i . y) with v_i a basis of the image of
// the curried map. Throws ArityError unless k = 2.
StrongDecomposition bilinear_strong_decomposition(const MultilinearMap& alpha, const Rational& c);

} // namespace rankforge
