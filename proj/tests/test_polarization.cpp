#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "oracles.hpp"
#include "rankforge/analytic_rank.hpp"
#include "rankforge/errors.hpp"
#include "rankforge/polarization.hpp"
#include "rankforge/rng.hpp"

using namespace rankforge;

namespace {

PolyDense monomial(std::uint32_t p, PolyDense::Exponent e, Residue c = 1) {
    PolyDense f(p, static_cast<std::uint32_t>(e.size()));
    f.add_term(std::move(e), c);
    return f;
}

// Straight evaluation of sum c x^e over explicit residues.
Residue oracle_eval(const PolyDense& f, const FVec& x) {
    std::uint64_t acc = 0;
    for (const auto& [e, c] : f.terms()) {
        std::uint64_t t = c;
        for (std::size_t i = 0; i < e.size(); ++i)
            for (std::uint32_t j = 0; j < e[i]; ++j) t = t * x[i] % f.p();
        acc = (acc + t) % f.p();
    }
    return static_cast<Residue>(acc);
}

// Invariance under every permutation of the index tuple.
bool oracle_symmetric(const MultilinearMap& alpha) {
    const std::size_t k = alpha.arity();
    const std::uint32_t n = alpha.shape().dim(0);
    std::vector<std::uint32_t> j(k, 0);
    std::size_t total = 1;
    for (std::size_t i = 0; i < k; ++i) total *= n;
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rest = flat;
        for (std::size_t i = 0; i < k; ++i) {
            j[i] = static_cast<std::uint32_t>(rest % n);
            rest /= n;
        }
        std::vector<std::size_t> perm(k);
        std::iota(perm.begin(), perm.end(), 0);
        const Residue base = alpha.coeff(j);
        do {
            std::vector<std::uint32_t> q(k);
            for (std::size_t i = 0; i < k; ++i) q[i] = j[perm[i]];
            if (alpha.coeff(q) != base) return false;
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return true;
}

// Coefficient of alpha at index j for homogeneous f: c_e * prod e_i! / d!.
Residue oracle_coeff(const PolyDense& f, const std::vector<std::uint32_t>& j) {
    const std::uint32_t p = f.p();
    PolyDense::Exponent e(f.n(), 0);
    for (auto i : j) ++e[i];
    auto it = f.terms().find(e);
    if (it == f.terms().end()) return 0;
    std::uint64_t num = it->second;
    for (auto v : e)
        for (std::uint32_t t = 2; t <= v; ++t) num = num * t % p;
    std::uint64_t fact = 1;
    for (std::uint32_t t = 2; t <= j.size(); ++t) fact = fact * t % p;
    std::uint64_t inv = 1;
    for (std::uint32_t t = 0; t < p - 2; ++t) inv = inv * fact % p;
    return static_cast<Residue>(num * inv % p);
}

void check_round_trip(const PolyDense& f, std::uint32_t d) {
    const MultilinearMap alpha = polarize(f, d);
    CHECK(is_symmetric(alpha));
    CHECK(oracle_symmetric(alpha));
    const PolyDense top = f.homogeneous_part(d);
    for (const FVec& x : oracle::all_vectors(f.p(), f.n())) {
        std::vector<FVec> xs(d, x);
        REQUIRE(alpha.evaluate_form(xs) == oracle_eval(top, x));
    }
}

} // namespace

TEST_CASE("add_term reduces exponents and cancels") {
    PolyDense f(3, 2);
    f.add_term({4, 0}, 1);
    CHECK(f.terms().count({2, 0}) == 1);
    f.add_term({2, 0}, 2);
    CHECK(f.is_zero());
    f.add_term({3, 1}, 5);
    CHECK(f.terms().at({1, 1}) == 2);
    CHECK(f.degree() == 2);
    CHECK_THROWS_AS(f.add_term({1}, 1), DimensionError);
    CHECK_THROWS_AS(PolyDense(4, 2), DomainError);
}

TEST_CASE("evaluate matches the term oracle") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        const std::uint32_t p = seed % 2 ? 5 : 3;
        PolyDense f(p, 3);
        for (int t = 0; t < 6; ++t)
            f.add_term({static_cast<std::uint32_t>(rng.below(p)), static_cast<std::uint32_t>(rng.below(p)),
                        static_cast<std::uint32_t>(rng.below(p))},
                       static_cast<Residue>(rng.below(p)));
        const auto table = f.value_table();
        const auto xs = oracle::all_vectors(p, 3);
        for (std::size_t i = 0; i < xs.size(); ++i) REQUIRE(table[encode_vector(p, xs[i])] == oracle_eval(f, xs[i]));
    }
}

TEST_CASE("ring operations agree pointwise") {
    const PolyDense a = random_homogeneous(5, 2, 2, 1);
    const PolyDense b = random_homogeneous(5, 2, 1, 2);
    for (const FVec& x : oracle::all_vectors(5, 2)) {
        CHECK(oracle_eval(a + b, x) == (oracle_eval(a, x) + oracle_eval(b, x)) % 5);
        CHECK(oracle_eval(a - b, x) == (oracle_eval(a, x) + 5 - oracle_eval(b, x)) % 5);
        CHECK(oracle_eval(a * b, x) == oracle_eval(a, x) * oracle_eval(b, x) % 5);
    }
    CHECK((a - a).is_zero());
    CHECK_THROWS_AS(a + PolyDense(5, 3), DimensionError);
}

TEST_CASE("random_homogeneous is homogeneous and deterministic") {
    const PolyDense f = random_homogeneous(5, 3, 3, 9);
    CHECK(f.is_homogeneous());
    CHECK(f.degree() == 3);
    CHECK(f == random_homogeneous(5, 3, 3, 9));
}

TEST_CASE("x^2 over F_3 polarizes to xy") {
    const MultilinearMap alpha = polarize(monomial(3, {2}));
    CHECK(alpha.arity() == 2);
    CHECK(alpha.coeffs().size() == 1);
    CHECK(alpha.coeffs()[0] == 1);
    check_round_trip(monomial(3, {2}), 2);
}

TEST_CASE("x1 x2 x3 over F_5 polarizes to the symmetrized tensor") {
    const PolyDense f = monomial(5, {1, 1, 1});
    const MultilinearMap alpha = polarize(f);
    const Residue sixth = 1;  // 6 = 1 mod 5
    std::vector<std::uint32_t> j = {0, 1, 2};
    do {
        CHECK(alpha.coeff(j) == sixth);
    } while (std::next_permutation(j.begin(), j.end()));
    CHECK(alpha.coeff(std::vector<std::uint32_t>{0, 0, 1}) == 0);
    check_round_trip(f, 3);
}

TEST_CASE("zero polynomial with explicit degree") {
    const PolyDense zero(5, 2);
    const MultilinearMap alpha = polarize(zero, 3);
    CHECK(alpha.is_zero());
    CHECK_THROWS_AS(polarize(zero), PreconditionError);
}

TEST_CASE("degree one polarizes to the linear form") {
    PolyDense f(3, 3);
    f.add_term({1, 0, 0}, 2);
    f.add_term({0, 0, 1}, 1);
    const MultilinearMap alpha = polarize(f);
    CHECK(alpha.arity() == 1);
    CHECK(alpha.coeffs()[0] == 2);
    CHECK(alpha.coeffs()[1] == 0);
    CHECK(alpha.coeffs()[2] == 1);
}

TEST_CASE("degree at or above the characteristic is rejected") {
    CHECK_THROWS_AS(polarize(monomial(2, {1, 1})), CharacteristicError);
    CHECK_THROWS_AS(polarize(monomial(3, {1, 1, 1})), CharacteristicError);
    CHECK_THROWS_AS(polarize(monomial(5, {1, 1}), 1), PreconditionError);
    CHECK_THROWS_AS(cs_amplification_check(monomial(2, {1, 1})), CharacteristicError);
}

TEST_CASE("lower-degree terms are dropped by polarization") {
    PolyDense f = monomial(5, {1, 1});
    f.add_term({1, 0}, 3);
    f.add_term({0, 0}, 4);
    CHECK(polarize(f) == polarize(monomial(5, {1, 1})));
    check_round_trip(f, 2);
}

TEST_CASE("random polarizations match coefficient formula and round trip") {
    struct Case {
        std::uint32_t p, n, d;
    };
    for (const Case c : {Case{3, 1, 2}, Case{3, 3, 2}, Case{5, 2, 2}, Case{5, 3, 3}, Case{5, 2, 4}, Case{7, 2, 5}}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const PolyDense f = random_homogeneous(c.p, c.n, c.d, seed * 31 + c.p);
            if (f.is_zero()) continue;
            const MultilinearMap alpha = polarize(f, c.d);
            std::vector<std::uint32_t> j(c.d, 0);
            for (std::size_t flat = 0; flat < alpha.coeffs().size(); ++flat) {
                std::size_t rest = flat;
                for (std::uint32_t i = c.d; i-- > 0;) {
                    j[i] = static_cast<std::uint32_t>(rest % c.n);
                    rest /= c.n;
                }
                REQUIRE(alpha.coeff(j) == oracle_coeff(f, j));
            }
            check_round_trip(f, c.d);
            CHECK(diagonal(alpha) == f);
        }
    }
}

TEST_CASE("is_symmetric rejects an asymmetric form") {
    MultilinearMap a(Shape(3, {2, 2}), 1);
    a.set_coeff(std::vector<std::uint32_t>{0, 1}, 0, 1);
    CHECK_FALSE(is_symmetric(a));
    CHECK_FALSE(oracle_symmetric(a));
    a.set_coeff(std::vector<std::uint32_t>{1, 0}, 0, 1);
    CHECK(is_symmetric(a));
    CHECK_FALSE(is_symmetric(MultilinearMap(Shape(3, {2, 3}), 1)));
}

TEST_CASE("diagonal sums coefficients by multiset") {
    MultilinearMap a(Shape(5, {2, 2}), 1);
    a.set_coeff(std::vector<std::uint32_t>{0, 1}, 0, 2);
    a.set_coeff(std::vector<std::uint32_t>{1, 0}, 0, 4);
    const PolyDense f = diagonal(a);
    CHECK(f.terms().size() == 1);
    CHECK(f.terms().at({1, 1}) == 1);
    CHECK_THROWS_AS(diagonal(MultilinearMap(Shape(5, {2, 3}), 1)), DimensionError);
}

TEST_CASE("amplification on x1 x2 over F_3") {
    const CsAmplificationReport r = cs_amplification_check(monomial(3, {1, 1}));
    CHECK(r.degree == 2);
    // bias(x1 x2) = 1/3 over F_3^2.
    CHECK(r.abs_bias == doctest::Approx(1.0 / 3));
    CHECK(r.lhs == doctest::Approx(1.0 / 9));
    // E chi(f(x+y) - f(x)) = 1/9 for this f.
    CHECK(r.signed_sum_mean.real() == doctest::Approx(1.0 / 9));
    CHECK(std::abs(r.signed_sum_mean.imag()) < 1e-12);
    CHECK(r.alpha_bias == exact_bias(polarize(monomial(3, {1, 1}))));
    CHECK(r.alpha_bias == Rational(1, 9));
    CHECK(r.alpha_bound == doctest::Approx(1.0 / 81));
    CHECK(r.holds);
}

TEST_CASE("amplification on the zero polynomial is tight") {
    const CsAmplificationReport r = cs_amplification_check(PolyDense(5, 2), 2);
    CHECK(r.abs_bias == doctest::Approx(1.0));
    CHECK(r.signed_sum_mean.real() == doctest::Approx(1.0));
    CHECK(r.alpha_bias == Rational(1));
    CHECK(r.holds);
    CHECK_THROWS_AS(cs_amplification_check(monomial(5, {1, 0})), PreconditionError);
}

TEST_CASE("signed sum mean equals a direct oracle") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const std::uint32_t p = seed < 3 ? 3 : 5;
        const std::uint32_t d = seed < 3 ? 2 : 3;
        const std::uint32_t n = 2;
        PolyDense f = random_homogeneous(p, n, d, seed);
        f.add_term({1, 0}, 1);
        const auto r = cs_amplification_check(f, d);
        const auto xs = oracle::all_vectors(p, n);
        std::complex<double> acc = 0;
        std::uint64_t count = 0;
        std::vector<std::size_t> ys(d - 1, 0);
        for (const FVec& x : xs) {
            std::fill(ys.begin(), ys.end(), 0);
            while (true) {
                std::int64_t s = 0;
                for (std::uint32_t mask = 0; mask < (1u << (d - 1)); ++mask) {
                    FVec z = x;
                    for (std::uint32_t i = 0; i + 1 < d; ++i)
                        if ((mask >> i) & 1u)
                            for (std::uint32_t t = 0; t < n; ++t) z[t] = (z[t] + xs[ys[i]][t]) % p;
                    const int sign = ((d - 1 - std::popcount(mask)) % 2) ? -1 : 1;
                    s += sign * static_cast<std::int64_t>(oracle_eval(f, z));
                }
                acc += oracle::chi(p, static_cast<Residue>(((s % p) + p) % p));
                ++count;
                std::size_t i = 0;
                while (i < ys.size() && ++ys[i] == xs.size()) ys[i++] = 0;
                if (i == ys.size()) break;
            }
        }
        acc /= static_cast<double>(count);
        CHECK(r.signed_sum_mean.real() == doctest::Approx(acc.real()).epsilon(1e-9));
        CHECK(r.signed_sum_mean.imag() == doctest::Approx(acc.imag()).epsilon(1e-9));
        CHECK(r.holds);
    }
}

TEST_CASE("amplification holds on random polynomials") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::uint32_t p = seed % 2 ? 5 : 3;
        const std::uint32_t d = p == 5 && seed % 4 == 1 ? 3 : 2;
        PolyDense f = random_homogeneous(p, 2, d, seed + 100);
        f.add_term({0, 1}, static_cast<Residue>(seed % p));
        if (f.homogeneous_part(d).is_zero()) continue;
        const auto r = cs_amplification_check(f, d);
        CHECK(r.first_holds);
        CHECK(r.second_holds);
    }
}

TEST_CASE("substitution for x1 x2 x3 over F_5") {
    const PolyDense f = monomial(5, {1, 1, 1});
    const RankReport rank = prank_exact(polarize(f));
    REQUIRE(rank.exact());
    const SubstitutionReport r = substitute_decomposition(f, rank.witness);
    CHECK(r.verified);
    CHECK(r.factors.size() == rank.hi);
    CHECK(r.remainder.is_zero());
    for (const auto& [beta, gamma] : r.factors) {
        CHECK(beta.degree() < 3);
        CHECK(gamma.degree() < 3);
    }
    for (const FVec& x : oracle::all_vectors(5, 3)) {
        std::uint64_t s = 0;
        for (const auto& [beta, gamma] : r.factors) s += std::uint64_t{oracle_eval(beta, x)} * oracle_eval(gamma, x);
        REQUIRE(s % 5 == oracle_eval(f, x));
    }
}

TEST_CASE("substitution of a rank-one product and lower terms") {
    PolyDense f = monomial(5, {2, 0}, 3);
    f.add_term({1, 0}, 2);
    const RankReport rank = prank_exact(polarize(f));
    REQUIRE(rank.exact());
    CHECK(rank.hi == 1);
    const SubstitutionReport r = substitute_decomposition(f, rank.witness);
    CHECK(r.verified);
    CHECK(r.factors.size() == 1);
    CHECK(r.remainder == monomial(5, {1, 0}, 2));
}

TEST_CASE("substitution of zero is the empty sum") {
    const PolyDense zero(3, 2);
    const RankReport rank = prank_exact(polarize(zero, 2));
    const SubstitutionReport r = substitute_decomposition(zero, rank.witness, 2);
    CHECK(r.factors.empty());
    CHECK(r.verified);
}

TEST_CASE("substitution rejects a foreign decomposition") {
    const PolyDense f = monomial(5, {1, 1});
    const RankReport other = prank_exact(polarize(monomial(5, {2, 0})));
    CHECK_THROWS_AS(substitute_decomposition(f, other.witness), PreconditionError);
}

TEST_CASE("poly JSON round trip and strictness") {
    const PolyDense f = random_homogeneous(5, 3, 3, 4);
    CHECK(poly_from_json(poly_to_json(f)) == f);
    const auto doc = nlohmann::json::parse(R"({"p":5,"n":3,"terms":[{"exp":[1,1,1],"c":-1}]})");
    CHECK(poly_from_json(doc).terms().at({1, 1, 1}) == 4);
    CHECK_THROWS_AS(poly_from_json(nlohmann::json::parse(R"({"p":4,"n":1,"terms":[]})")), InputError);
    CHECK_THROWS_AS(poly_from_json(nlohmann::json::parse(R"({"p":5,"n":1,"terms":[],"x":1})")), InputError);
    CHECK_THROWS_AS(poly_from_json(nlohmann::json::parse(R"({"p":5,"n":2,"terms":[{"exp":[1],"c":1}]})")), InputError);
    CHECK_THROWS_AS(poly_from_json(nlohmann::json::parse(R"({"p":5,"n":1,"terms":[{"exp":[1],"c":1.5}]})")), InputError);
    CHECK_THROWS_AS(poly_from_json(nlohmann::json::parse(R"([1,2])")), InputError);
}
