#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace rankforge {

using Residue = std::uint32_t;

// A vector of F_p^n, entries in [0, p).
using FVec = std::vector<Residue>;

bool is_prime(std::uint64_t n);

// The prime field F_p together with the additive character
// chi(t) = exp(2 pi i t / p).
class PrimeField {
public:
    static constexpr std::uint32_t kMaxModulus = 1u << 20;

    explicit PrimeField(std::uint32_t p);

    std::uint32_t p() const noexcept { return p_; }

    Residue add(Residue a, Residue b) const noexcept {
        const Residue s = a + b;
        return s >= p_ ? s - p_ : s;
    }
    Residue sub(Residue a, Residue b) const noexcept { return a >= b ? a - b : a + p_ - b; }
    Residue neg(Residue a) const noexcept { return a == 0 ? 0 : p_ - a; }
    Residue mul(Residue a, Residue b) const noexcept {
        return static_cast<Residue>((static_cast<std::uint64_t>(a) * b) % p_);
    }
    Residue pow(Residue a, std::uint64_t e) const noexcept;
    // Throws DomainError for a == 0.
    Residue inv(Residue a) const;

    // Reduces an arbitrary signed integer into [0, p).
    Residue reduce(std::int64_t v) const noexcept {
        const std::int64_t m = v % static_cast<std::int64_t>(p_);
        return static_cast<Residue>(m < 0 ? m + p_ : m);
    }

    const std::complex<double>& character(Residue t) const { return chars_.at(t); }
    std::span<const std::complex<double>> characters() const noexcept { return chars_; }

    bool operator==(const PrimeField& other) const noexcept { return p_ == other.p_; }

private:
    std::uint32_t p_;
    std::vector<std::complex<double>> chars_;
};

// The fixed dot product sum_j u_j v_j on F_p^n.
Residue dot(const PrimeField& field, std::span<const Residue> u, std::span<const Residue> v);

// Plain log base p. The library reports every logarithm in this convention.
double log_p(std::uint32_t p, double x);

// log_p(p x) = log_p(x) + 1, the shifted logarithm used in bound formulas.
double shifted_log(std::uint32_t p, double x);

} // namespace rankforge
