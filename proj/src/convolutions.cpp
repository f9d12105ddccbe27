#include "rankforge/convolutions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "rankforge/errors.hpp"
#include "rankforge/parallel.hpp"
#include "rankforge/rng.hpp"

namespace rankforge {

namespace {

__extension__ using Wide = __int128;

// Encoded vector addition on G_c, a |G_c| x |G_c| table.
std::vector<std::uint32_t> addition_table(const Shape& shape, std::size_t c) {
    const std::uint64_t g = shape.block_size(c);
    require_within(checked_mul(g, g), kTableGuard, "addition table");
    std::vector<std::uint32_t> t(g * g);
    for (std::uint64_t a = 0; a < g; ++a)
        for (std::uint64_t b = 0; b < g; ++b)
            t[a * g + b] = static_cast<std::uint32_t>(vector_add(shape.p(), shape.dim(c), a, b));
    return t;
}

void check_direction(const Shape& shape, std::size_t direction) {
    if (direction >= shape.arity()) throw DimensionError("convolution direction beyond the arity");
    require_within(checked_mul(shape.domain_size(), shape.block_size(direction)), kEnumerationGuard, "convolution");
    require_within(shape.domain_size(), kTableGuard, "convolution table");
}

Wide wide_gcd(Wide a, Wide b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        const Wide t = a % b;
        a = b;
        b = t;
    }
    return a;
}

void check_level(const Shape& shape, std::size_t level) {
    if (level > shape.arity()) throw PreconditionError("arrangement level exceeds the arity");
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
    if (a > std::numeric_limits<std::uint64_t>::max() - b) throw ResourceError("arrangement count overflows 64 bits");
    return a + b;
}

// Coordinates the choices of an arrangement range over, in preorder.
void choice_coords(std::size_t level, std::vector<std::size_t>& out) {
    if (level == 0) return;
    out.push_back(level - 1);
    choice_coords(level - 1, out);
    choice_coords(level - 1, out);
}

template <class Next>
void build(const Shape& shape, std::size_t level, std::uint64_t lengths, Next& next, std::vector<std::uint64_t>& out) {
    if (level == 0) {
        out.push_back(lengths);
        return;
    }
    const std::size_t c = level - 1;
    const std::uint64_t y = next(c);
    const std::uint64_t shifted = vector_add(shape.p(), shape.dim(c), shape.coordinate(lengths, c), y);
    build(shape, level - 1, shape.with_coordinate(lengths, c, shifted), next, out);
    build(shape, level - 1, shape.with_coordinate(lengths, c, y), next, out);
}

// Arrangements whose point at each position satisfies pred(point, position).
template <class Pred>
std::uint64_t count_with(const Shape& shape, std::size_t level, std::uint64_t lengths, std::uint64_t offset, const Pred& pred) {
    if (level == 0) return pred(lengths, offset) ? 1 : 0;
    const std::size_t c = level - 1;
    const std::uint64_t half = std::uint64_t{1} << (level - 1);
    const std::uint64_t xc = shape.coordinate(lengths, c);
    std::uint64_t total = 0;
    for (std::uint64_t y = 0; y < shape.block_size(c); ++y) {
        const std::uint64_t shifted = vector_add(shape.p(), shape.dim(c), xc, y);
        const std::uint64_t first = count_with(shape, level - 1, shape.with_coordinate(lengths, c, shifted), offset, pred);
        if (first == 0) continue;
        const std::uint64_t second = count_with(shape, level - 1, shape.with_coordinate(lengths, c, y), offset + half, pred);
        total = checked_add(total, checked_mul(first, second));
    }
    return total;
}

} // namespace

Rational RationalTable::mean() const {
    BigInt sum = 0;
    for (std::int64_t v : num) sum += v;
    return Rational(sum, BigInt(den) * BigInt(shape.domain_size()));
}

RationalTable indicator_table(const PointSet& s) {
    RationalTable t{s.shape(), {}, 1};
    t.num.reserve(s.members().size());
    for (std::uint8_t m : s.members()) t.num.push_back(m ? 1 : 0);
    return t;
}

DomainTable conv_dir(const DomainTable& f, std::size_t direction) {
    const Shape& shape = f.shape;
    check_direction(shape, direction);
    if (f.values.size() != shape.domain_size()) throw DimensionError("table does not cover the domain");
    const auto add = addition_table(shape, direction);
    const std::uint64_t g = shape.block_size(direction);
    const std::uint64_t stride = shape.stride(direction);
    DomainTable out{shape, std::vector<std::complex<double>>(shape.domain_size())};
    parallel_for(shape.domain_size(), [&](std::size_t x) {
        const std::uint64_t xi = shape.coordinate(x, direction);
        const std::uint64_t base = x - xi * stride;
        std::complex<double> acc = 0;
        for (std::uint64_t y = 0; y < g; ++y)
            acc += f.values[base + add[y * g + xi] * stride] * std::conj(f.values[base + y * stride]);
        out.values[x] = acc / static_cast<double>(g);
    });
    return out;
}

RationalTable conv_dir(const RationalTable& f, std::size_t direction) {
    const Shape& shape = f.shape;
    check_direction(shape, direction);
    if (f.num.size() != shape.domain_size()) throw DimensionError("table does not cover the domain");
    const auto add = addition_table(shape, direction);
    const std::uint64_t g = shape.block_size(direction);
    const std::uint64_t stride = shape.stride(direction);
    const Wide den = Wide(f.den) * Wide(f.den) * Wide(g);
    std::vector<Wide> sums(shape.domain_size());
    parallel_for(shape.domain_size(), [&](std::size_t x) {
        const std::uint64_t xi = shape.coordinate(x, direction);
        const std::uint64_t base = x - xi * stride;
        Wide acc = 0;
        for (std::uint64_t y = 0; y < g; ++y)
            acc += Wide(f.num[base + add[y * g + xi] * stride]) * Wide(f.num[base + y * stride]);
        sums[x] = acc;
    });
    Wide common = den;
    for (Wide v : sums) {
        if (common == 1) break;
        common = wide_gcd(common, v);
    }
    const Wide reduced = den / common;
    if (reduced > Wide(std::numeric_limits<std::int64_t>::max())) {
        throw ResourceError("convolution denominator overflows 64 bits");
    }
    RationalTable out{shape, std::vector<std::int64_t>(sums.size()), static_cast<std::uint64_t>(reduced)};
    for (std::size_t x = 0; x < sums.size(); ++x) out.num[x] = static_cast<std::int64_t>(sums[x] / common);
    return out;
}

RationalTable conv_chain(const PointSet& z, const std::vector<std::size_t>& directions) {
    RationalTable t = indicator_table(z);
    for (std::size_t d : directions) t = conv_dir(t, d);
    return t;
}

RationalTable conv_chain(const PointSet& z, std::size_t levels) {
    if (levels > z.shape().arity()) throw DimensionError("chain longer than the arity");
    std::vector<std::size_t> dirs(levels);
    for (std::size_t i = 0; i < levels; ++i) dirs[i] = i;
    return conv_chain(z, dirs);
}

std::size_t arrangement_choice_count(std::size_t level) { return (std::size_t{1} << level) - 1; }

Arrangement make_arrangement(const Shape& shape, std::size_t level, std::uint64_t lengths,
                             const std::vector<std::uint64_t>& choices) {
    check_level(shape, level);
    if (choices.size() != arrangement_choice_count(level)) throw DimensionError("wrong number of arrangement choices");
    std::size_t pos = 0;
    auto next = [&](std::size_t c) {
        const std::uint64_t y = choices[pos++];
        if (y >= shape.block_size(c)) throw DomainError("arrangement choice outside its coordinate group");
        return y;
    };
    Arrangement q{level, lengths, {}};
    build(shape, level, lengths, next, q.points);
    return q;
}

Arrangement random_arrangement(const Shape& shape, std::size_t level, std::uint64_t lengths, std::uint64_t seed) {
    check_level(shape, level);
    Rng rng(seed);
    auto next = [&](std::size_t c) { return rng.below(shape.block_size(c)); };
    Arrangement q{level, lengths, {}};
    build(shape, level, lengths, next, q.points);
    return q;
}

void for_each_arrangement(const Shape& shape, std::size_t level, std::uint64_t lengths,
                          const std::function<bool(const Arrangement&)>& visit) {
    check_level(shape, level);
    require_within(arrangement_total(shape, level), kEnumerationGuard, "arrangement enumeration");
    std::vector<std::size_t> coords;
    choice_coords(level, coords);
    std::vector<std::uint64_t> choices(coords.size(), 0);
    while (true) {
        if (!visit(make_arrangement(shape, level, lengths, choices))) return;
        std::size_t t = choices.size();
        while (t > 0) {
            --t;
            if (++choices[t] < shape.block_size(coords[t])) break;
            choices[t] = 0;
            if (t == 0) return;
        }
        if (choices.empty()) return;
    }
}

std::uint64_t arrangement_total(const Shape& shape, std::size_t level) {
    check_level(shape, level);
    std::uint64_t total = 1;
    for (std::size_t t = 0; t < level; ++t)
        total = checked_mul(total, checked_pow(shape.block_size(t), std::uint64_t{1} << (level - 1 - t)));
    return total;
}

std::uint64_t count_arrangements(const PointSet& s, std::size_t level, std::uint64_t lengths) {
    check_level(s.shape(), level);
    return count_with(s.shape(), level, lengths, 0, [&](std::uint64_t x, std::uint64_t) { return s.contains(x); });
}

ArrangementIdentityReport arrangement_identity_check(const PointSet& s, std::size_t level, std::uint64_t lengths) {
    ArrangementIdentityReport r;
    r.direct = count_arrangements(s, level, lengths);
    const RationalTable chain = conv_chain(s, level);
    r.formula = chain.at(lengths) * Rational(BigInt(arrangement_total(s.shape(), level)));
    r.holds = r.formula == Rational(BigInt(r.direct));
    return r;
}

PositionCountReport position_count_check(const Shape& shape, std::uint64_t x, std::uint64_t lengths, std::size_t level,
                                         std::size_t position) {
    check_level(shape, level);
    if (position == 0 || position > (std::size_t{1} << level)) throw PreconditionError("position outside the arrangement");
    PositionCountReport r;
    const std::uint64_t target = position - 1;
    r.direct = count_with(shape, level, lengths, 0,
                          [&](std::uint64_t point, std::uint64_t pos) { return pos != target || point == x; });
    bool tail_agrees = true;
    for (std::size_t c = level; c < shape.arity(); ++c)
        tail_agrees = tail_agrees && shape.coordinate(x, c) == shape.coordinate(lengths, c);
    if (tail_agrees) {
        r.expected = 1;
        for (std::size_t t = 0; t < level; ++t)
            r.expected = checked_mul(r.expected, checked_pow(shape.block_size(t), (std::uint64_t{1} << (level - 1 - t)) - 1));
    }
    r.holds = r.direct == r.expected;
    return r;
}

PropagationReport vanishing_propagation_check(const MultilinearMap& a, const Arrangement& q) {
    const Shape& shape = a.shape();
    auto vanishes = [&](std::uint64_t point) {
        const FVec v = a.evaluate(shape.decode_point(point));
        return std::all_of(v.begin(), v.end(), [](Residue r) { return r == 0; });
    };
    PropagationReport r;
    r.all_points_vanish = std::all_of(q.points.begin(), q.points.end(), vanishes);
    r.lengths_vanish = vanishes(q.lengths);
    r.holds = !r.all_points_vanish || r.lengths_vanish;
    return r;
}

ArrangementSuiteReport arrangement_suite(std::uint64_t checks, std::uint64_t seed) {
    ArrangementSuiteReport r;
    r.checks = checks;
    for (std::uint64_t t = 0; t < checks; ++t) {
        Rng rng(derive_seed(seed, t));
        const std::uint32_t p = rng.below(2) ? 3 : 2;
        const std::size_t k = 1 + rng.below(3);
        std::vector<std::uint32_t> dims(k);
        for (auto& d : dims) d = static_cast<std::uint32_t>(1 + rng.below(2));
        const Shape shape(p, dims);
        const std::size_t level = 1 + rng.below(k);
        const std::uint64_t size = shape.domain_size();

        PointSet s(shape);
        for (std::uint64_t x = 0; x < size; ++x)
            if (rng.below(2)) s.insert(x);
        if (!arrangement_identity_check(s, level, rng.below(size)).holds) ++r.identity_mismatches;

        const std::uint64_t lengths = rng.below(size);
        std::uint64_t x = rng.below(size);
        if (rng.below(2)) {
            for (std::size_t c = level; c < k; ++c) x = shape.with_coordinate(x, c, shape.coordinate(lengths, c));
        }
        const std::size_t position = 1 + rng.below(std::size_t{1} << level);
        if (!position_count_check(shape, x, lengths, level, position).holds) ++r.position_mismatches;

        const MultilinearMap a = random_multilinear(shape, static_cast<std::uint32_t>(1 + rng.below(2)), rng.next());
        const PointSet zero = zero_set(a);
        const std::uint64_t q_lengths = rng.below(size);
        std::optional<Arrangement> inside;
        std::uint64_t visits = 0;
        for_each_arrangement(shape, level, q_lengths, [&](const Arrangement& q) {
            ++visits;
            if (std::all_of(q.points.begin(), q.points.end(), [&](std::uint64_t pt) { return zero.contains(pt); })) {
                inside = q;
                return false;
            }
            return visits < 20000;
        });
        const Arrangement q = inside ? *inside : random_arrangement(shape, level, q_lengths, rng.next());
        const PropagationReport pr = vanishing_propagation_check(a, q);
        if (pr.all_points_vanish) ++r.propagation_nontrivial;
        if (!pr.holds) ++r.propagation_violations;
    }
    r.holds = r.identity_mismatches == 0 && r.position_mismatches == 0 && r.propagation_violations == 0;
    return r;
}

CsChainReport cs_chain_check(const PointSet& z) {
    CsChainReport r;
    RationalTable t = indicator_table(z);
    r.density = t.mean();
    r.means.push_back(r.density);
    for (std::size_t j = 0; j < z.shape().arity(); ++j) {
        t = conv_dir(t, j);
        r.means.push_back(t.mean());
        const Rational& prev = r.means[r.means.size() - 2];
        r.steps.push_back(r.means.back() >= prev * prev);
    }
    Rational power = r.density;
    for (std::size_t j = 0; j < z.shape().arity(); ++j) power *= power;
    r.final_holds = r.means.back() >= power;
    r.holds = r.final_holds && std::all_of(r.steps.begin(), r.steps.end(), [](bool b) { return b; });
    return r;
}

CsChainReport cs_chain_check(const MultilinearMap& beta) { return cs_chain_check(zero_set(beta)); }

ConvApproximationReport conv_approximation_check(const PointSet& z, std::size_t l, const std::vector<ChainTerm>& terms,
                                                 const MultiaffineMap& gamma, const std::vector<FVec>& layers,
                                                 double epsilon) {
    const Shape& shape = z.shape();
    if (l >= shape.arity()) throw DimensionError("chain direction beyond the arity");
    const CoordSet rest = shape.all() & ~(CoordSet{1} << l);
    const Shape rest_shape = shape.restrict_to(rest);
    if (!(gamma.shape() == rest_shape)) throw DimensionError("gamma must live on the remaining coordinates");
    for (const auto& t : terms) {
        if (!(t.rho.shape() == shape) || !t.rho.is_form()) throw DimensionError("rho must be scalar forms on the domain");
    }
    const RationalTable chain = conv_chain(z, l + 1);
    const PrimeField field(shape.p());

    std::unordered_set<std::uint64_t> selected;
    for (const FVec& v : layers) {
        if (v.size() != gamma.target_dim()) throw DimensionError("layer value has the wrong length");
        selected.insert(encode_vector(shape.p(), v));
    }
    std::vector<std::uint8_t> exceptional(rest_shape.domain_size(), 0);
    std::uint64_t exc_count = 0;
    for (std::uint64_t y = 0; y < rest_shape.domain_size(); ++y) {
        const FVec v = gamma.evaluate(rest_shape.decode_point(y));
        exceptional[y] = selected.count(encode_vector(shape.p(), v)) != 0;
        exc_count += exceptional[y];
    }

    std::vector<std::vector<Residue>> rho_values;
    for (const auto& t : terms) rho_values.push_back(value_table(t.rho));

    ConvApproximationReport r;
    for (std::uint64_t x = 0; x < shape.domain_size(); ++x) {
        if (exceptional[shape.project(rest, x)]) continue;
        std::complex<double> approx = 0;
        for (std::size_t i = 0; i < terms.size(); ++i) approx += terms[i].c * field.character(rho_values[i][x]);
        r.max_deviation = std::max(r.max_deviation, std::abs(to_double(chain.at(x)) - approx));
    }
    for (const auto& t : terms) r.coefficient_mass += std::abs(t.c);
    r.exceptional_density = Rational(BigInt(exc_count), BigInt(rest_shape.domain_size()));
    r.within_epsilon = r.max_deviation <= epsilon + kCharacterTolerance;
    r.exceptional_small = to_double(r.exceptional_density) <= epsilon;
    r.mass_ok = r.coefficient_mass <= 1 + kCharacterTolerance;
    r.holds = r.within_epsilon && r.exceptional_small && r.mass_ok;
    return r;
}

std::optional<std::uint64_t> find_chain_point(const RationalTable& chain, const Rational& threshold) {
    for (std::uint64_t x = 0; x < chain.num.size(); ++x)
        if (chain.at(x) >= threshold) return x;
    return std::nullopt;
}

ExtractionReport weak_extraction_check(const MultilinearMap& a, const PointSet& d) {
    if (!(a.shape() == d.shape())) throw DimensionError("D lives on a different shape");
    const PointSet zero = zero_set(a);
    const std::size_t k = a.arity();
    ExtractionReport r;
    r.contained = true;
    for (std::uint64_t x = 0; x < d.shape().domain_size(); ++x) {
        if (!d.contains(x)) continue;
        ++r.checked;
        if (count_arrangements(zero, k, x) > 0) {
            ++r.certified;
            if (!zero.contains(x)) throw VerificationError("arrangement inside {A = 0} with A nonzero at its lengths");
        }
        r.contained = r.contained && zero.contains(x);
    }
    return r;
}

} // namespace rankforge
