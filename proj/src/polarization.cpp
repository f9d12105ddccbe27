#include "rankforge/polarization.hpp"

#include <atomic>
#include <bit>
#include <functional>
#include <cmath>
#include <numeric>

#include "rankforge/analytic_rank.hpp"
#include "rankforge/errors.hpp"
#include "rankforge/parallel.hpp"
#include "rankforge/rng.hpp"

namespace rankforge {

namespace {

std::uint32_t reduce_exponent(std::uint32_t p, std::uint32_t e) { return e < p ? e : (e - 1) % (p - 1) + 1; }

std::uint32_t total_degree(const PolyDense::Exponent& e) { return std::accumulate(e.begin(), e.end(), 0u); }

void require_same_ring(const PolyDense& a, const PolyDense& b) {
    if (a.p() != b.p() || a.n() != b.n()) throw DimensionError("polynomials live in different rings");
}

// Calls visit(e) for every reduced exponent vector of total degree d, in
// lexicographic order.
template <class Visit>
void for_each_exponent(std::uint32_t p, std::uint32_t n, std::uint32_t d, Visit&& visit) {
    PolyDense::Exponent e(n, 0);
    auto rec = [&](auto& self, std::uint32_t i, std::uint32_t left) -> void {
        if (i + 1 == n) {
            if (left < p) {
                e[i] = left;
                visit(e);
            }
            return;
        }
        for (std::uint32_t v = 0; v <= std::min(left, p - 1); ++v) {
            e[i] = v;
            self(self, i + 1, left - v);
        }
    };
    if (n > 0) rec(rec, 0, d);
}

void check_degree(std::uint32_t p, std::uint32_t d) {
    if (d == 0) throw PreconditionError("polarization needs degree at least 1");
    if (d >= p) throw CharacteristicError("polarization needs degree below the characteristic");
}

std::uint32_t resolve_degree(const PolyDense& f, std::optional<std::uint32_t> degree) {
    const std::uint32_t d = degree.value_or(f.degree());
    if (d < f.degree()) throw PreconditionError("degree is below the degree of the polynomial");
    check_degree(f.p(), d);
    return d;
}

} // namespace

PolyDense::PolyDense(std::uint32_t p, std::uint32_t n) : p_(p), n_(n) {
    if (!is_prime(p)) throw DomainError("polynomial modulus must be prime");
}

void PolyDense::add_term(Exponent e, Residue c) {
    if (e.size() != n_) throw DimensionError("exponent vector has the wrong length");
    for (auto& v : e) v = reduce_exponent(p_, v);
    c %= p_;
    if (c == 0) return;
    auto [it, inserted] = terms_.emplace(std::move(e), c);
    if (!inserted) {
        it->second = (it->second + c) % p_;
        if (it->second == 0) terms_.erase(it);
    }
}

std::uint32_t PolyDense::degree() const {
    std::uint32_t d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, total_degree(e));
    return d;
}

bool PolyDense::is_homogeneous() const {
    const std::uint32_t d = degree();
    for (const auto& [e, c] : terms_)
        if (total_degree(e) != d) return false;
    return true;
}

PolyDense PolyDense::homogeneous_part(std::uint32_t d) const {
    PolyDense out(p_, n_);
    for (const auto& [e, c] : terms_)
        if (total_degree(e) == d) out.terms_.emplace(e, c);
    return out;
}

Residue PolyDense::evaluate(std::span<const Residue> x) const {
    if (x.size() != n_) throw DimensionError("point has the wrong length");
    const PrimeField field(p_);
    Residue acc = 0;
    for (const auto& [e, c] : terms_) {
        Residue t = c;
        for (std::uint32_t i = 0; i < n_ && t != 0; ++i) t = field.mul(t, field.pow(x[i] % p_, e[i]));
        acc = field.add(acc, t);
    }
    return acc;
}

std::vector<Residue> PolyDense::value_table() const {
    const std::uint64_t size = checked_pow(p_, n_);
    require_within(size, kTableGuard, "polynomial value table");
    std::vector<Residue> out(size);
    parallel_for(size, [&](std::size_t x) { out[x] = evaluate(decode_vector(p_, n_, x)); });
    return out;
}

PolyDense PolyDense::operator+(const PolyDense& other) const {
    require_same_ring(*this, other);
    PolyDense out = *this;
    for (const auto& [e, c] : other.terms_) out.add_term(e, c);
    return out;
}

PolyDense PolyDense::operator-(const PolyDense& other) const {
    require_same_ring(*this, other);
    PolyDense out = *this;
    for (const auto& [e, c] : other.terms_) out.add_term(e, (p_ - c) % p_);
    return out;
}

PolyDense PolyDense::operator*(const PolyDense& other) const {
    require_same_ring(*this, other);
    PolyDense out(p_, n_);
    for (const auto& [ea, ca] : terms_)
        for (const auto& [eb, cb] : other.terms_) {
            Exponent e(n_);
            for (std::uint32_t i = 0; i < n_; ++i) e[i] = ea[i] + eb[i];
            out.add_term(std::move(e), static_cast<Residue>(std::uint64_t{ca} * cb % p_));
        }
    return out;
}

PolyDense random_homogeneous(std::uint32_t p, std::uint32_t n, std::uint32_t d, std::uint64_t seed) {
    PolyDense f(p, n);
    Rng rng(seed);
    for_each_exponent(p, n, d, [&](const PolyDense::Exponent& e) { f.add_term(e, static_cast<Residue>(rng.below(p))); });
    return f;
}

nlohmann::json poly_to_json(const PolyDense& f) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [e, c] : f.terms()) terms.push_back({{"exp", e}, {"c", c}});
    return {{"p", f.p()}, {"n", f.n()}, {"terms", terms}};
}

PolyDense poly_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw InputError("polynomial document must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        if (key != "p" && key != "n" && key != "terms") throw InputError("unknown polynomial field \"" + key + "\"");
    }
    auto unsigned_field = [&](const char* key) {
        if (!doc.contains(key) || !doc.at(key).is_number_unsigned()) {
            throw InputError(std::string("field \"") + key + "\" must be a non-negative integer");
        }
        return doc.at(key).get<std::uint64_t>();
    };
    const std::uint64_t p = unsigned_field("p");
    if (p > PrimeField::kMaxModulus || !is_prime(p)) throw InputError("p must be a prime below 2^20");
    const std::uint64_t n = unsigned_field("n");
    if (n == 0 || n > 64) throw InputError("n must be in [1, 64]");
    if (!doc.contains("terms") || !doc.at("terms").is_array()) throw InputError("missing array field \"terms\"");
    PolyDense f(static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(n));
    for (const auto& t : doc.at("terms")) {
        if (!t.is_object() || !t.contains("exp") || !t.contains("c") || t.size() != 2) {
            throw InputError("each term needs exactly \"exp\" and \"c\"");
        }
        const auto& exp = t.at("exp");
        if (!exp.is_array() || exp.size() != n) throw InputError("exponent vector must have n entries");
        PolyDense::Exponent e;
        for (const auto& v : exp) {
            if (!v.is_number_unsigned() || v.get<std::uint64_t>() > 1024) throw InputError("exponents must be integers in [0, 1024]");
            e.push_back(v.get<std::uint32_t>());
        }
        const auto& c = t.at("c");
        if (!c.is_number_integer()) throw InputError("coefficients must be integers");
        const std::int64_t cv = c.get<std::int64_t>();
        const std::int64_t pm = static_cast<std::int64_t>(p);
        f.add_term(std::move(e), static_cast<Residue>(((cv % pm) + pm) % pm));
    }
    return f;
}

MultilinearMap polarize(const PolyDense& f, std::optional<std::uint32_t> degree) {
    const std::uint32_t d = resolve_degree(f, degree);
    const std::uint32_t p = f.p();
    const std::uint32_t n = f.n();
    const PolyDense top = f.homogeneous_part(d);
    const PrimeField field(p);
    Residue factorial = 1;
    for (std::uint32_t i = 2; i <= d; ++i) factorial = field.mul(factorial, i);
    const Residue inv_factorial = field.inv(factorial);

    MultilinearMap alpha(Shape(p, std::vector<std::uint32_t>(d, n)), 1);
    const std::size_t entries = alpha.coeffs().size();
    parallel_for(entries, [&](std::size_t flat) {
        std::vector<std::uint32_t> j(d);
        std::size_t rest = flat;
        for (std::uint32_t i = d; i-- > 0;) {
            j[i] = static_cast<std::uint32_t>(rest % n);
            rest /= n;
        }
        Residue acc = 0;
        FVec point(n);
        for (std::uint32_t s = 0; s < (1u << d); ++s) {
            std::fill(point.begin(), point.end(), 0);
            for (std::uint32_t i = 0; i < d; ++i)
                if ((s >> i) & 1u) point[j[i]] = field.add(point[j[i]], 1);
            const Residue v = top.evaluate(point);
            acc = ((d - static_cast<std::uint32_t>(std::popcount(s))) % 2) ? field.sub(acc, v) : field.add(acc, v);
        }
        alpha.set_coeff_at(flat, field.mul(acc, inv_factorial));
    });
    return alpha;
}

bool is_symmetric(const MultilinearMap& alpha) {
    const std::size_t k = alpha.arity();
    const auto& dims = alpha.shape().dims();
    if (!alpha.is_form() || std::adjacent_find(dims.begin(), dims.end(), std::not_equal_to<>()) != dims.end()) return false;
    if (k < 2) return true;
    const std::uint32_t n = dims[0];
    std::vector<std::uint32_t> j(k, 0);
    for (std::size_t flat = 0; flat < alpha.coeffs().size(); ++flat) {
        std::size_t rest = flat;
        for (std::size_t i = k; i-- > 0;) {
            j[i] = static_cast<std::uint32_t>(rest % n);
            rest /= n;
        }
        for (std::size_t i = 0; i + 1 < k; ++i) {
            std::swap(j[i], j[i + 1]);
            const bool same = alpha.coeff(j) == alpha.coeffs()[flat];
            std::swap(j[i], j[i + 1]);
            if (!same) return false;
        }
    }
    return true;
}

PolyDense diagonal(const MultilinearMap& alpha) {
    const auto& dims = alpha.shape().dims();
    if (!alpha.is_form() || dims.empty() ||
        std::adjacent_find(dims.begin(), dims.end(), std::not_equal_to<>()) != dims.end()) {
        throw DimensionError("diagonal needs a scalar form with equal dims");
    }
    const std::uint32_t n = dims[0];
    const std::size_t k = dims.size();
    PolyDense f(alpha.p(), n);
    for (std::size_t flat = 0; flat < alpha.coeffs().size(); ++flat) {
        const Residue c = alpha.coeffs()[flat];
        if (c == 0) continue;
        PolyDense::Exponent e(n, 0);
        std::size_t rest = flat;
        for (std::size_t i = 0; i < k; ++i) {
            ++e[rest % n];
            rest /= n;
        }
        f.add_term(std::move(e), c);
    }
    return f;
}

CsAmplificationReport cs_amplification_check(const PolyDense& f, std::optional<std::uint32_t> degree) {
    const std::uint32_t d = resolve_degree(f, degree);
    if (d < 2) throw PreconditionError("amplification needs degree at least 2");
    const std::uint32_t p = f.p();
    const std::uint32_t n = f.n();
    const std::uint64_t g = checked_pow(p, n);
    require_within(checked_pow(g, d), kEnumerationGuard, "signed sum enumeration");
    require_within(checked_mul(g, g), kTableGuard, "vector addition table");
    const PrimeField field(p);

    CsAmplificationReport r;
    r.degree = d;
    const std::vector<Residue> values = f.value_table();
    std::complex<double> b = 0;
    for (Residue v : values) b += field.character(v);
    r.abs_bias = std::abs(b / static_cast<double>(g));

    std::vector<std::uint32_t> add(g * g);
    for (std::uint64_t a = 0; a < g; ++a)
        for (std::uint64_t c = 0; c < g; ++c) add[a * g + c] = static_cast<std::uint32_t>(vector_add(p, n, a, c));

    const std::uint32_t m = d - 1;
    const std::uint64_t ys = checked_pow(g, m);
    std::vector<std::atomic<std::uint64_t>> counts(p);
    for (auto& c : counts) c = 0;
    parallel_for(g, [&](std::size_t x) {
        std::vector<std::uint64_t> local(p, 0);
        std::vector<std::uint32_t> y(m), sums(std::size_t{1} << m);
        for (std::uint64_t code = 0; code < ys; ++code) {
            std::uint64_t rest = code;
            for (std::uint32_t i = m; i-- > 0;) {
                y[i] = static_cast<std::uint32_t>(rest % g);
                rest /= g;
            }
            sums[0] = static_cast<std::uint32_t>(x);
            Residue acc = ((m % 2) ? field.neg(values[x]) : values[x]);
            for (std::size_t s = 1; s < sums.size(); ++s) {
                const std::size_t low = static_cast<std::size_t>(std::countr_zero(s));
                sums[s] = add[std::uint64_t{sums[s & (s - 1)]} * g + y[low]];
                const Residue v = values[sums[s]];
                acc = ((m - std::popcount(s)) % 2) ? field.sub(acc, v) : field.add(acc, v);
            }
            ++local[acc];
        }
        for (std::uint32_t t = 0; t < p; ++t) counts[t].fetch_add(local[t], std::memory_order_relaxed);
    });
    std::complex<double> mean = 0;
    for (std::uint32_t t = 0; t < p; ++t) mean += static_cast<double>(counts[t].load()) * field.character(t);
    r.signed_sum_mean = mean / static_cast<double>(checked_mul(g, ys));
    r.lhs = std::pow(r.abs_bias, static_cast<double>(std::uint64_t{1} << (d - 1)));
    r.alpha_bias = exact_bias(polarize(f, d));
    r.alpha_bound = std::pow(r.abs_bias, static_cast<double>(std::uint64_t{1} << (2 * d - 2)));
    r.first_holds = r.lhs <= r.signed_sum_mean.real() + kCharacterTolerance;
    r.second_holds = to_double(r.alpha_bias) + kCharacterTolerance >= r.alpha_bound;
    r.holds = r.first_holds && r.second_holds;
    return r;
}

SubstitutionReport substitute_decomposition(const PolyDense& f, const PartitionDecomposition& decomposition,
                                            std::optional<std::uint32_t> degree) {
    const std::uint32_t d = resolve_degree(f, degree);
    const MultilinearMap alpha = polarize(f, d);
    if (!(decomposition.shape == alpha.shape()) || !(decomposition.reconstruct() == alpha)) {
        throw PreconditionError("decomposition does not reconstruct the polarization");
    }
    SubstitutionReport r;
    r.remainder = f - f.homogeneous_part(d);
    for (const auto& s : decomposition.summands) r.factors.emplace_back(diagonal(s.beta), diagonal(s.gamma));

    const std::vector<Residue> lhs = f.value_table();
    std::vector<Residue> rhs = r.remainder.value_table();
    const PrimeField field(f.p());
    for (const auto& [beta, gamma] : r.factors) {
        const auto bv = beta.value_table();
        const auto gv = gamma.value_table();
        for (std::size_t x = 0; x < rhs.size(); ++x) rhs[x] = field.add(rhs[x], field.mul(bv[x], gv[x]));
    }
    if (lhs != rhs) throw VerificationError("substituted decomposition disagrees with the polynomial");
    r.verified = true;
    return r;
}

} // namespace rankforge
