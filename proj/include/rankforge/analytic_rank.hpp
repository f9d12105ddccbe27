#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "rankforge/forms.hpp"
#include "rankforge/rational.hpp"

namespace rankforge {

// Exact count of each value a scalar map takes over its domain (or over a
// restriction of it).
struct ValueHistogram {
    std::uint32_t p = 2;
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;

    // sum_t counts[t] chi(t) / total; zero for an empty restriction.
    std::complex<double> bias() const;
};

ValueHistogram value_histogram(const MultiaffineMap& f);
ValueHistogram value_histogram(const MultiaffineMap& f, const PointSet& restriction);
ValueHistogram value_histogram(const MultilinearMap& f);

// |{x : f(x) = 0}| without materializing the zero set.
std::uint64_t vanishing_count(const MultiaffineMap& f);
std::uint64_t vanishing_count(const MultilinearMap& f);

struct BiasReport {
    ValueHistogram histogram;
    std::complex<double> bias;
    // Present for multilinear inputs.
    std::optional<Rational> exact_bias;
    // -log_p(bias); +inf for a nonzero linear form. Absent for inputs that
    // are not multilinear.
    std::optional<double> arank;
    // |{A = 0}| for the curried map A; present for multilinear inputs of arity >= 2.
    std::optional<std::uint64_t> vanishing_count;
};

// Throws VerificationError if the histogram and the vanishing density of
// the curried map disagree.
BiasReport bias_report(const MultilinearMap& alpha);
// Multiaffine inputs that are multilinear are handled as such; otherwise
// only the histogram and the complex bias are reported.
BiasReport bias_report(const MultiaffineMap& f);

std::complex<double> bias(const MultiaffineMap& f);
Rational exact_bias(const MultilinearMap& alpha);
double arank(const MultilinearMap& alpha);

struct BiasHomogReport {
    double abs_bias = 0;
    Rational top_bias;
    bool holds = false;
};

inline constexpr double kCharacterTolerance = 1e-9;

BiasHomogReport bias_homog_check(const MultiaffineMap& f);

// A complex-valued function on G_[k].
struct DomainTable {
    Shape shape;
    std::vector<std::complex<double>> values;
};

// chi o f for a scalar map.
DomainTable character_table(const MultiaffineMap& f);
DomainTable character_table(const MultilinearMap& f);

// Largest |G|^2 the 2k-fold averages may walk.
inline constexpr std::uint64_t kPairGuard = std::uint64_t{1} << 30;

// E_{x,y} prod_I Conj^{|I|} f_I(x_I, y_{[k]\I}) with family[I] indexed by
// subset mask; family.size() must be 2^k.
std::complex<double> box_average(const std::vector<DomainTable>& family);

// Gowers box norm. Throws VerificationError if the inner average is not
// real non-negative within kCharacterTolerance.
double box_norm(const DomainTable& f);

struct GcsReport {
    double lhs = 0;
    double rhs = 0;
    bool holds = false;
};

GcsReport gcs_check(const std::vector<DomainTable>& family);

} // namespace rankforge
