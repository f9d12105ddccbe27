#include "rankforge/field.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rankforge/errors.hpp"

namespace rankforge {

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    if (n % 2 == 0) return n == 2;
    for (std::uint64_t d = 3; d * d <= n; d += 2) {
        if (n % d == 0) return false;
    }
    return true;
}

PrimeField::PrimeField(std::uint32_t p) : p_(p) {
    if (!is_prime(p)) throw DomainError("modulus " + std::to_string(p) + " is not prime");
    if (p > kMaxModulus) throw DomainError("modulus " + std::to_string(p) + " exceeds supported range");
    chars_.reserve(p);
    for (std::uint32_t t = 0; t < p; ++t) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(p);
        chars_.emplace_back(std::cos(angle), std::sin(angle));
    }
    // exact values where the floating formula leaves residue
    chars_[0] = {1.0, 0.0};
    if (p == 2) chars_[1] = {-1.0, 0.0};
}

Residue PrimeField::pow(Residue a, std::uint64_t e) const noexcept {
    Residue result = 1 % p_;
    Residue base = a % p_;
    while (e > 0) {
        if (e & 1u) result = mul(result, base);
        base = mul(base, base);
        e >>= 1u;
    }
    return result;
}

Residue PrimeField::inv(Residue a) const {
    if (a % p_ == 0) throw DomainError("inverse of zero in F_" + std::to_string(p_));
    return pow(a, p_ - 2);
}

Residue dot(const PrimeField& field, std::span<const Residue> u, std::span<const Residue> v) {
    if (u.size() != v.size()) {
        throw DimensionError("dot product of vectors of lengths " + std::to_string(u.size()) + " and " +
                             std::to_string(v.size()));
    }
    std::uint64_t acc = 0;
    const std::uint64_t p = field.p();
    for (std::size_t j = 0; j < u.size(); ++j) {
        acc = (acc + static_cast<std::uint64_t>(u[j]) * v[j]) % p;
    }
    return static_cast<Residue>(acc);
}

double log_p(std::uint32_t p, double x) { return std::log(x) / std::log(static_cast<double>(p)); }

double shifted_log(std::uint32_t p, double x) { return log_p(p, x) + 1.0; }

} // namespace rankforge
