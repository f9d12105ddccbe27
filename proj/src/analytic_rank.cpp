#include "rankforge/analytic_rank.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "rankforge/errors.hpp"
#include "rankforge/parallel.hpp"

namespace rankforge {

namespace {

void require_form(const MultiaffineMap& f) {
    if (!f.is_form()) throw DimensionError("expected a scalar-valued map");
}

ValueHistogram histogram_impl(const MultiaffineMap& f, const PointSet* restriction) {
    require_form(f);
    const std::uint32_t p = f.p();
    std::vector<std::atomic<std::uint64_t>> shared(p);
    for (auto& c : shared) c = 0;
    for_each_value_run(f, [&](std::uint64_t, std::uint64_t first, std::span<const Residue> values) {
        if (values.size() < p) {
            for (std::size_t t = 0; t < values.size(); ++t) {
                if (restriction && !restriction->contains(first + t)) continue;
                shared[values[t]].fetch_add(1, std::memory_order_relaxed);
            }
            return;
        }
        std::vector<std::uint64_t> local(p, 0);
        for (std::size_t t = 0; t < values.size(); ++t) {
            if (restriction && !restriction->contains(first + t)) continue;
            ++local[values[t]];
        }
        for (std::uint32_t v = 0; v < p; ++v)
            if (local[v] != 0) shared[v].fetch_add(local[v], std::memory_order_relaxed);
    });
    ValueHistogram h;
    h.p = p;
    h.counts.resize(p);
    for (std::uint32_t v = 0; v < p; ++v) {
        h.counts[v] = shared[v].load();
        h.total += h.counts[v];
    }
    return h;
}

[[noreturn]] void mismatch(const std::string& what) {
    throw VerificationError("bias cross-check failed: " + what);
}

} // namespace

std::complex<double> ValueHistogram::bias() const {
    if (total == 0) return 0.0;
    const PrimeField field(p);
    std::complex<double> acc = 0;
    for (std::uint32_t t = 0; t < p; ++t) acc += static_cast<double>(counts[t]) * field.character(t);
    return acc / static_cast<double>(total);
}

ValueHistogram value_histogram(const MultiaffineMap& f) { return histogram_impl(f, nullptr); }

ValueHistogram value_histogram(const MultiaffineMap& f, const PointSet& restriction) {
    if (!(restriction.shape() == f.shape())) throw DimensionError("restriction lives on a different shape");
    return histogram_impl(f, &restriction);
}

ValueHistogram value_histogram(const MultilinearMap& f) {
    return histogram_impl(MultiaffineMap::from_multilinear(f), nullptr);
}

std::uint64_t vanishing_count(const MultiaffineMap& f) {
    std::atomic<std::uint64_t> count = 0;
    const std::uint32_t m = f.target_dim();
    for_each_value_run(f, [&](std::uint64_t, std::uint64_t, std::span<const Residue> values) {
        std::uint64_t local = 0;
        for (std::size_t t = 0; t < values.size(); t += m) {
            bool zero = true;
            for (std::uint32_t o = 0; o < m && zero; ++o) zero = values[t + o] == 0;
            local += zero;
        }
        count.fetch_add(local, std::memory_order_relaxed);
    });
    return count.load();
}

std::uint64_t vanishing_count(const MultilinearMap& f) {
    return vanishing_count(MultiaffineMap::from_multilinear(f));
}

Rational exact_bias(const MultilinearMap& alpha) {
    if (!alpha.is_form()) throw DimensionError("bias needs a scalar form");
    if (alpha.arity() == 1) return Rational(alpha.is_zero() ? 1 : 0);
    const MultilinearMap a = curry_last(alpha);
    return Rational(BigInt(vanishing_count(a)), BigInt(a.shape().domain_size()));
}

double arank(const MultilinearMap& alpha) {
    const Rational b = exact_bias(alpha);
    if (b == 0) return std::numeric_limits<double>::infinity();
    return -log_p(alpha.p(), to_double(b));
}

BiasReport bias_report(const MultilinearMap& alpha) {
    if (!alpha.is_form()) throw DimensionError("bias needs a scalar form");
    BiasReport r;
    r.histogram = value_histogram(alpha);
    r.bias = r.histogram.bias();
    const auto& c = r.histogram.counts;
    for (std::uint32_t t = 2; t < alpha.p(); ++t) {
        if (c[t] != c[1]) mismatch("nonzero values are not equidistributed");
    }
    // sum_t c_t chi(t) = c_0 - c_1 once the nonzero counts agree
    const Rational from_histogram{BigInt(c[0]) - BigInt(c[1]), BigInt(r.histogram.total)};
    if (alpha.arity() == 1) {
        r.exact_bias = Rational(alpha.is_zero() ? 1 : 0);
    } else {
        const MultilinearMap a = curry_last(alpha);
        r.vanishing_count = vanishing_count(a);
        r.exact_bias = Rational(BigInt(*r.vanishing_count), BigInt(a.shape().domain_size()));
    }
    if (*r.exact_bias != from_histogram) mismatch("histogram disagrees with the vanishing density");
    if (std::abs(r.bias - std::complex<double>(to_double(*r.exact_bias), 0.0)) > kCharacterTolerance) {
        mismatch("character sum drifted from the exact value");
    }
    r.arank = *r.exact_bias == 0 ? std::numeric_limits<double>::infinity()
                                 : -log_p(alpha.p(), to_double(*r.exact_bias));
    return r;
}

BiasReport bias_report(const MultiaffineMap& f) {
    require_form(f);
    if (f.is_multilinear()) return bias_report(f.top_part());
    BiasReport r;
    r.histogram = value_histogram(f);
    r.bias = r.histogram.bias();
    return r;
}

std::complex<double> bias(const MultiaffineMap& f) { return value_histogram(f).bias(); }

BiasHomogReport bias_homog_check(const MultiaffineMap& f) {
    require_form(f);
    BiasHomogReport r;
    r.abs_bias = std::abs(bias(f));
    r.top_bias = exact_bias(f.top_part());
    r.holds = r.abs_bias <= to_double(r.top_bias) + kCharacterTolerance;
    return r;
}

DomainTable character_table(const MultiaffineMap& f) {
    require_form(f);
    const PrimeField field(f.p());
    const auto values = value_table(f);
    DomainTable t{f.shape(), {}};
    t.values.reserve(values.size());
    for (Residue v : values) t.values.push_back(field.character(v));
    return t;
}

DomainTable character_table(const MultilinearMap& f) {
    return character_table(MultiaffineMap::from_multilinear(f));
}

namespace {

std::complex<double> box_average_impl(const std::vector<const DomainTable*>& family) {
    if (family.empty()) throw DimensionError("empty family");
    const Shape& shape = family[0]->shape;
    const std::size_t k = shape.arity();
    if (family.size() != (std::size_t{1} << k)) throw DimensionError("family needs one table per subset");
    for (const DomainTable* t : family) {
        if (!(t->shape == shape) || t->values.size() != shape.domain_size()) {
            throw DimensionError("family tables must share one full domain");
        }
    }
    const std::uint64_t n = shape.domain_size();
    require_within(checked_mul(n, n), kPairGuard, "box norm average");
    // offset[i][point] = coordinate i of point, scaled by its stride
    std::vector<std::vector<std::int64_t>> offset(k, std::vector<std::int64_t>(n));
    for (std::size_t i = 0; i < k; ++i)
        for (std::uint64_t x = 0; x < n; ++x)
            offset[i][x] = static_cast<std::int64_t>(shape.coordinate(x, i) * shape.stride(i));
    std::vector<std::complex<double>> partial(n);
    const std::size_t masks = family.size();
    parallel_for(n, [&](std::size_t x) {
        std::vector<std::int64_t> index(masks);
        std::complex<double> acc = 0;
        for (std::uint64_t y = 0; y < n; ++y) {
            index[0] = static_cast<std::int64_t>(y);
            std::complex<double> prod = family[0]->values[y];
            for (std::size_t mask = 1; mask < masks; ++mask) {
                const std::size_t bit = static_cast<std::size_t>(std::countr_zero(mask));
                index[mask] = index[mask & (mask - 1)] + offset[bit][x] - offset[bit][y];
                const std::complex<double> v = family[mask]->values[static_cast<std::size_t>(index[mask])];
                prod *= (std::popcount(mask) % 2) ? std::conj(v) : v;
            }
            acc += prod;
        }
        partial[x] = acc;
    });
    std::complex<double> total = 0;
    for (const auto& v : partial) total += v;
    return total / (static_cast<double>(n) * static_cast<double>(n));
}

} // namespace

std::complex<double> box_average(const std::vector<DomainTable>& family) {
    std::vector<const DomainTable*> ptrs;
    for (const auto& t : family) ptrs.push_back(&t);
    return box_average_impl(ptrs);
}

double box_norm(const DomainTable& f) {
    const std::size_t k = f.shape.arity();
    const std::vector<const DomainTable*> ptrs(std::size_t{1} << k, &f);
    const std::complex<double> avg = box_average_impl(ptrs);
    if (std::abs(avg.imag()) > kCharacterTolerance || avg.real() < -kCharacterTolerance) {
        throw VerificationError("box norm inner average is not real non-negative");
    }
    return std::pow(std::max(avg.real(), 0.0), 1.0 / static_cast<double>(std::size_t{1} << k));
}

GcsReport gcs_check(const std::vector<DomainTable>& family) {
    GcsReport r;
    r.lhs = std::abs(box_average(family));
    r.rhs = 1.0;
    for (const auto& t : family) r.rhs *= box_norm(t);
    r.holds = r.lhs <= r.rhs + kCharacterTolerance;
    return r;
}

} // namespace rankforge
