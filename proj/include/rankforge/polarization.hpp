#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <json.hpp>

#include "rankforge/forms.hpp"
#include "rankforge/partition_rank.hpp"
#include "rankforge/rational.hpp"

namespace rankforge {

// A polynomial F_p^n -> F_p in reduced form: every exponent is at most p-1.
class PolyDense {
public:
    using Exponent = std::vector<std::uint32_t>;

    PolyDense() = default;
    PolyDense(std::uint32_t p, std::uint32_t n);

    std::uint32_t p() const noexcept { return p_; }
    std::uint32_t n() const noexcept { return n_; }
    const std::map<Exponent, Residue>& terms() const noexcept { return terms_; }

    // Adds c x^e; exponents >= p are reduced with x^p = x.
    void add_term(Exponent e, Residue c);

    // Max total degree over nonzero terms; 0 for the zero polynomial.
    std::uint32_t degree() const;
    bool is_zero() const noexcept { return terms_.empty(); }
    bool is_homogeneous() const;
    // Terms of total degree exactly d.
    PolyDense homogeneous_part(std::uint32_t d) const;

    Residue evaluate(std::span<const Residue> x) const;
    // Values at every x in F_p^n, indexed by encode_vector.
    std::vector<Residue> value_table() const;

    PolyDense operator+(const PolyDense& other) const;
    PolyDense operator-(const PolyDense& other) const;
    PolyDense operator*(const PolyDense& other) const;

    bool operator==(const PolyDense&) const = default;

private:
    std::uint32_t p_ = 2;
    std::uint32_t n_ = 0;
    std::map<Exponent, Residue> terms_;
};

PolyDense random_homogeneous(std::uint32_t p, std::uint32_t n, std::uint32_t d, std::uint64_t seed);

nlohmann::json poly_to_json(const PolyDense& f);
// Throws InputError on malformed documents.
PolyDense poly_from_json(const nlohmann::json& doc);

// The symmetric d-linear form on (F_p^n)^d with alpha(x, ..., x) equal to the
// degree-d part of f. d defaults to f.degree(); throws CharacteristicError
// when d >= p and PreconditionError when d = 0.
MultilinearMap polarize(const PolyDense& f, std::optional<std::uint32_t> degree = std::nullopt);

// Invariance of the coefficient tensor under every argument permutation.
bool is_symmetric(const MultilinearMap& alpha);

// x -> alpha(x, ..., x) as a polynomial on F_p^n; every dim must equal n.
PolyDense diagonal(const MultilinearMap& alpha);

struct CsAmplificationReport {
    std::uint32_t degree = 0;
    double abs_bias = 0;
    // |bias(f)|^{2^{d-1}}
    double lhs = 0;
    // E chi(sum_S (-1)^{d-1-|S|} f(x + sum_{i in S} y^i))
    std::complex<double> signed_sum_mean;
    Rational alpha_bias;
    // |bias(f)|^{2^{2d-2}}
    double alpha_bound = 0;
    bool first_holds = false;
    bool second_holds = false;
    bool holds = false;
};

// Requires d >= 2 and d < p.
CsAmplificationReport cs_amplification_check(const PolyDense& f, std::optional<std::uint32_t> degree = std::nullopt);

struct SubstitutionReport {
    // f = sum_i beta_i * gamma_i + remainder, remainder of degree < d.
    std::vector<std::pair<PolyDense, PolyDense>> factors;
    PolyDense remainder;
    bool verified = false;
};

// Throws PreconditionError unless the decomposition reconstructs polarize(f),
// VerificationError if the pointwise identity fails.
SubstitutionReport substitute_decomposition(const PolyDense& f, const PartitionDecomposition& decomposition,
                                            std::optional<std::uint32_t> degree = std::nullopt);

} // namespace rankforge
