#include "rankforge/partition_rank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rankforge/analytic_rank.hpp"
#include "rankforge/errors.hpp"
#include "rankforge/parallel.hpp"

namespace rankforge {

namespace {

// Largest number of subspaces listed for a single (side, dimension) pair.
constexpr std::uint64_t kSubspaceGuard = std::uint64_t{1} << 20;

struct Split {
    CoordSet side = 0;
    std::vector<std::size_t> row;  // monomial index on the side
    std::vector<std::size_t> col;  // monomial index on the complement
    std::size_t rows = 0;
    std::size_t cols = 0;
};

Split split_monomials(const Shape& shape, CoordSet side) {
    Split s;
    s.side = side;
    s.rows = shape.monomial_count(side);
    s.cols = shape.monomial_count(shape.all() & ~side);
    const std::size_t total = shape.monomial_count(shape.all());
    s.row.resize(total);
    s.col.resize(total);
    std::vector<std::uint32_t> idx(shape.arity(), 0);
    for (std::size_t f = 0; f < total; ++f) {
        std::size_t r = 0, c = 0;
        for (std::size_t i = 0; i < shape.arity(); ++i) {
            if (contains(side, i)) r = r * shape.dim(i) + idx[i];
            else c = c * shape.dim(i) + idx[i];
        }
        s.row[f] = r;
        s.col[f] = c;
        for (std::size_t i = shape.arity(); i-- > 0;) {
            if (++idx[i] < shape.dim(i)) break;
            idx[i] = 0;
        }
    }
    return s;
}

void require_proper(const Shape& shape, CoordSet subset) {
    if (subset == 0 || (subset & shape.all()) == shape.all() || (subset & ~shape.all()) != 0) {
        throw PreconditionError("bipartition side must be a nonempty proper subset");
    }
}

void require_form_of_arity2(const MultilinearMap& alpha) {
    if (!alpha.is_form()) throw DimensionError("partition rank needs a scalar form");
    if (alpha.arity() < 2) throw ArityError("partition rank needs arity at least 2");
}

MultilinearMap form_on(const Shape& shape, std::vector<Residue> c) { return MultilinearMap(shape, 1, std::move(c)); }

// Rank factorization of the flattening, beta normalized to leading 1.
std::vector<PartitionSummand> factor_flattening(const MultilinearMap& alpha, CoordSet side) {
    const Shape& shape = alpha.shape();
    const PrimeField field(alpha.p());
    const Matrix m = flatten(alpha, side);
    const EchelonForm ech = row_reduce(m);
    const Shape inner = shape.restrict_to(side);
    const Shape outer = shape.restrict_to(shape.all() & ~side);
    std::vector<PartitionSummand> out;
    for (std::size_t t = 0; t < ech.rank(); ++t) {
        std::vector<Residue> beta(m.rows()), gamma(m.cols());
        for (std::size_t a = 0; a < m.rows(); ++a) beta[a] = m(a, ech.pivot_columns[t]);
        for (std::size_t b = 0; b < m.cols(); ++b) gamma[b] = ech.reduced(t, b);
        const Residue lead = *std::find_if(beta.begin(), beta.end(), [](Residue v) { return v != 0; });
        const Residue inv = field.inv(lead);
        for (auto& v : beta) v = field.mul(v, inv);
        for (auto& v : gamma) v = field.mul(v, lead);
        out.push_back({side, form_on(inner, std::move(beta)), form_on(outer, std::move(gamma))});
    }
    return out;
}

void verify_witness(const MultilinearMap& alpha, const PartitionDecomposition& d) {
    if (!(d.reconstruct() == alpha)) throw VerificationError("partition decomposition does not reconstruct the form");
}

// Subspaces of F_p^n of dimension d, each as its reduced echelon basis.
std::uint64_t subspace_count(std::uint32_t p, std::size_t n, std::size_t d) {
    // q-binomial by the recursion C(n, d) = C(n-1, d-1) + p^d C(n-1, d)
    std::vector<std::vector<std::uint64_t>> c(n + 1, std::vector<std::uint64_t>(d + 1, 0));
    for (std::size_t a = 0; a <= n; ++a) {
        c[a][0] = 1;
        for (std::size_t b = 1; b <= std::min(a, d); ++b) {
            const std::uint64_t left = c[a - 1][b - 1];
            const std::uint64_t right = b <= a - 1 ? c[a - 1][b] : 0;
            const long double approx =
                static_cast<long double>(left) + static_cast<long double>(right) * std::pow(static_cast<long double>(p), b);
            if (approx > static_cast<long double>(kSubspaceGuard)) return kSubspaceGuard + 1;
            c[a][b] = left + checked_mul(right, checked_pow(p, b));
        }
    }
    return c[n][d];
}

std::vector<std::vector<FVec>> list_subspaces(std::uint32_t p, std::size_t n, std::size_t d) {
    std::vector<std::vector<FVec>> out;
    std::vector<std::size_t> piv(d);
    for (std::size_t i = 0; i < d; ++i) piv[i] = i;
    while (true) {
        // free slots: (row i, column j) with j > piv[i] and j not a pivot
        std::vector<std::pair<std::size_t, std::size_t>> slots;
        std::vector<bool> is_piv(n, false);
        for (auto c : piv) is_piv[c] = true;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = piv[i] + 1; j < n; ++j)
                if (!is_piv[j]) slots.emplace_back(i, j);
        std::vector<Residue> digits(slots.size(), 0);
        while (true) {
            std::vector<FVec> basis(d, FVec(n, 0));
            for (std::size_t i = 0; i < d; ++i) basis[i][piv[i]] = 1;
            for (std::size_t s = 0; s < slots.size(); ++s) basis[slots[s].first][slots[s].second] = digits[s];
            out.push_back(std::move(basis));
            std::size_t s = slots.size();
            while (s > 0 && ++digits[s - 1] == p) digits[--s] = 0;
            if (s == 0) break;
        }
        // next pivot combination
        std::size_t i = d;
        while (i > 0 && piv[i - 1] == n - d + i - 1) --i;
        if (i == 0) break;
        ++piv[i - 1];
        for (std::size_t j = i; j < d; ++j) piv[j] = piv[j - 1] + 1;
    }
    return out;
}

class Search {
public:
    Search(const MultilinearMap& alpha, const PrankOptions& options, std::uint64_t& nodes)
        : alpha_(alpha), options_(options), nodes_(nodes) {
        const Shape& shape = alpha.shape();
        for (CoordSet t = 1; t < shape.all(); t += 2) {
            const CoordSet comp = shape.all() & ~t;
            const CoordSet side = shape.monomial_count(t) <= shape.monomial_count(comp) ? t : comp;
            types_.push_back(split_monomials(shape, side));
        }
        lists_.resize(types_.size());
        for (std::size_t t = 0; t < types_.size(); ++t) lists_[t].resize(types_[t].rows + 1);
    }

    enum class Outcome { found, absent, exhausted };

    Outcome run(std::size_t r, PartitionDecomposition& witness) {
        std::vector<std::size_t> parts(types_.size(), 0);
        return compositions(r, 0, parts, witness);
    }

private:
    Outcome compositions(std::size_t left, std::size_t t, std::vector<std::size_t>& parts,
                         PartitionDecomposition& witness) {
        if (t == types_.size()) {
            if (left != 0) return Outcome::absent;
            return try_composition(parts, witness);
        }
        const std::size_t cap = std::min(left, types_[t].rows);
        for (std::size_t d = cap + 1; d-- > 0;) {
            parts[t] = d;
            const Outcome o = compositions(left - d, t + 1, parts, witness);
            if (o != Outcome::absent) return o;
        }
        parts[t] = 0;
        return Outcome::absent;
    }

    const std::vector<std::vector<FVec>>* subspaces(std::size_t t, std::size_t d) {
        auto& cache = lists_[t];
        if (!cache[d]) {
            if (subspace_count(alpha_.p(), types_[t].rows, d) > kSubspaceGuard) return nullptr;
            cache[d] = list_subspaces(alpha_.p(), types_[t].rows, d);
        }
        return &*cache[d];
    }

    // Solves alpha = sum over chosen bases u of u (x) g_u for the g_u.
    std::optional<FVec> member(const std::vector<std::size_t>& used, const std::vector<const std::vector<FVec>*>& bases) {
        const std::size_t total = alpha_.coeffs().size();
        std::size_t cols = 0;
        for (std::size_t u = 0; u < used.size(); ++u) cols += bases[u]->size() * types_[used[u]].cols;
        Matrix m(alpha_.p(), total, cols);
        std::size_t offset = 0;
        for (std::size_t u = 0; u < used.size(); ++u) {
            const Split& s = types_[used[u]];
            for (const FVec& vec : *bases[u]) {
                for (std::size_t f = 0; f < total; ++f) m(f, offset + s.col[f]) = vec[s.row[f]];
                offset += s.cols;
            }
        }
        return solve(m, alpha_.coeffs());
    }

    Outcome try_composition(const std::vector<std::size_t>& parts, PartitionDecomposition& witness) {
        std::vector<std::size_t> used;
        std::vector<const std::vector<std::vector<FVec>>*> lists;
        std::uint64_t candidates = 1;
        for (std::size_t t = 0; t < types_.size(); ++t) {
            if (parts[t] == 0) continue;
            const auto* l = subspaces(t, parts[t]);
            if (l == nullptr) return Outcome::exhausted;
            used.push_back(t);
            lists.push_back(l);
            if (__builtin_mul_overflow(candidates, l->size(), &candidates)) return Outcome::exhausted;
        }
        auto decode = [&](std::uint64_t index) {
            std::vector<const std::vector<FVec>*> bases(used.size());
            for (std::size_t u = used.size(); u-- > 0;) {
                bases[u] = &(*lists[u])[index % lists[u]->size()];
                index /= lists[u]->size();
            }
            return bases;
        };
        const std::uint64_t chunk = 256 * worker_count();
        for (std::uint64_t begin = 0; begin < candidates; begin += chunk) {
            if (nodes_ >= options_.budget_nodes) return Outcome::exhausted;
            const std::uint64_t end = std::min({candidates, begin + chunk, begin + (options_.budget_nodes - nodes_)});
            std::vector<std::optional<FVec>> results(end - begin);
            parallel_for(end - begin, [&](std::size_t j) { results[j] = member(used, decode(begin + j)); });
            for (std::size_t j = 0; j < results.size(); ++j) {
                if (!results[j]) continue;
                nodes_ += j + 1;
                witness = assemble(used, decode(begin + j), *results[j]);
                return Outcome::found;
            }
            nodes_ += end - begin;
        }
        return Outcome::absent;
    }

    PartitionDecomposition assemble(const std::vector<std::size_t>& used, const std::vector<const std::vector<FVec>*>& bases,
                                    const FVec& solution) const {
        const Shape& shape = alpha_.shape();
        PartitionDecomposition d{shape, {}};
        std::size_t offset = 0;
        for (std::size_t u = 0; u < used.size(); ++u) {
            const Split& s = types_[used[u]];
            const Shape inner = shape.restrict_to(s.side);
            const Shape outer = shape.restrict_to(shape.all() & ~s.side);
            for (const FVec& vec : *bases[u]) {
                std::vector<Residue> gamma(solution.begin() + static_cast<std::ptrdiff_t>(offset),
                                           solution.begin() + static_cast<std::ptrdiff_t>(offset + s.cols));
                offset += s.cols;
                MultilinearMap g = form_on(outer, std::move(gamma));
                if (g.is_zero()) continue;
                d.summands.push_back({s.side, form_on(inner, vec), std::move(g)});
            }
        }
        return d;
    }

    const MultilinearMap& alpha_;
    const PrankOptions& options_;
    std::uint64_t& nodes_;
    std::vector<Split> types_;
    std::vector<std::vector<std::optional<std::vector<std::vector<FVec>>>>> lists_;
};

} // namespace

MultilinearMap summand_form(const Shape& shape, const PartitionSummand& s) {
    require_proper(shape, s.subset);
    const CoordSet comp = shape.all() & ~s.subset;
    if (!(s.beta.shape() == shape.restrict_to(s.subset)) || !(s.gamma.shape() == shape.restrict_to(comp)) ||
        !s.beta.is_form() || !s.gamma.is_form()) {
        throw DimensionError("summand factors do not match the bipartition");
    }
    const Split split = split_monomials(shape, s.subset);
    std::vector<Residue> c(split.row.size());
    for (std::size_t f = 0; f < c.size(); ++f) {
        c[f] = static_cast<Residue>(std::uint64_t{s.beta.coeffs()[split.row[f]]} * s.gamma.coeffs()[split.col[f]] %
                                    shape.p());
    }
    return form_on(shape, std::move(c));
}

MultilinearMap PartitionDecomposition::reconstruct() const {
    MultilinearMap sum(shape, 1);
    for (const auto& s : summands) sum = sum + summand_form(shape, s);
    return sum;
}

Matrix flatten(const MultilinearMap& alpha, CoordSet subset) {
    if (!alpha.is_form()) throw DimensionError("flattening needs a scalar form");
    require_proper(alpha.shape(), subset);
    const Split s = split_monomials(alpha.shape(), subset);
    Matrix m(alpha.p(), s.rows, s.cols);
    for (std::size_t f = 0; f < s.row.size(); ++f) m(s.row[f], s.col[f]) = alpha.coeffs()[f];
    return m;
}

std::optional<PartitionSummand> partition_rank_one(const MultilinearMap& alpha) {
    require_form_of_arity2(alpha);
    if (alpha.is_zero()) return std::nullopt;
    const Shape& shape = alpha.shape();
    for (CoordSet t = 1; t < shape.all(); t += 2) {
        if (matrix_rank(flatten(alpha, t)) == 1) return factor_flattening(alpha, t).front();
    }
    return std::nullopt;
}

std::size_t lovett_lower_bound(const MultilinearMap& alpha) {
    require_form_of_arity2(alpha);
    const MultilinearMap a = curry_last(alpha);
    const BigInt count = vanishing_count(a);
    const BigInt head = a.shape().domain_size();
    std::size_t r = 0;
    BigInt scaled = count;
    while (scaled < head) {
        scaled *= alpha.p();
        ++r;
    }
    return r;
}

RankReport prank_exact(const MultilinearMap& alpha, const PrankOptions& options) {
    require_form_of_arity2(alpha);
    const Shape& shape = alpha.shape();
    RankReport rep;
    rep.witness.shape = shape;
    rep.lovett_lower = lovett_lower_bound(alpha);
    if (alpha.is_zero()) return rep;

    std::size_t best = std::numeric_limits<std::size_t>::max();
    CoordSet best_side = 0;
    for (CoordSet t = 1; t < shape.all(); t += 2) {
        const std::size_t rk = matrix_rank(flatten(alpha, t));
        if (rk < best) {
            best = rk;
            best_side = t;
        }
    }
    rep.flattening_bound = best;
    rep.hi = best;
    rep.witness.summands = factor_flattening(alpha, best_side);
    verify_witness(alpha, rep.witness);
    if (rep.lovett_lower > rep.hi) throw VerificationError("analytic rank exceeds an explicit partition rank witness");

    Search search(alpha, options, rep.nodes);
    for (std::size_t r = std::max<std::size_t>(rep.lovett_lower, 1); r < rep.hi; ++r) {
        if (r > options.r_max) {
            rep.lo = r;
            return rep;
        }
        PartitionDecomposition found{shape, {}};
        const auto outcome = search.run(r, found);
        if (outcome == Search::Outcome::found) {
            verify_witness(alpha, found);
            rep.lo = rep.hi = found.size();
            rep.witness = std::move(found);
            if (rep.lo < rep.lovett_lower) throw VerificationError("partition rank below the Lovett bound");
            return rep;
        }
        if (outcome == Search::Outcome::exhausted) {
            rep.lo = r;
            return rep;
        }
    }
    rep.lo = rep.hi;
    return rep;
}

StrongDecomposition bilinear_strong_decomposition(const MultilinearMap& alpha, const Rational& c) {
    if (!alpha.is_form()) throw DimensionError("decomposition needs a scalar form");
    if (alpha.arity() != 2) throw ArityError("the bilinear decomposition needs arity 2");
    if (c <= 0 || c > 1) throw PreconditionError("bias threshold must lie in (0, 1]");
    const Shape& shape = alpha.shape();
    const std::uint32_t n1 = shape.dim(0), n2 = shape.dim(1);
    Matrix coeff(alpha.p(), n1, n2);
    for (std::uint32_t a = 0; a < n1; ++a)
        for (std::uint32_t b = 0; b < n2; ++b) coeff(a, b) = alpha.coeffs()[a * n2 + b];
    const EchelonForm ech = row_reduce(coeff);
    StrongDecomposition out;
    out.decomposition.shape = shape;
    out.rank = ech.rank();
    for (std::size_t i = 0; i < ech.rank(); ++i) {
        std::vector<Residue> beta(n1), v(n2);
        for (std::uint32_t a = 0; a < n1; ++a) beta[a] = coeff(a, ech.pivot_columns[i]);
        for (std::uint32_t b = 0; b < n2; ++b) v[b] = ech.reduced(i, b);
        out.decomposition.summands.push_back(
            {0b01, form_on(shape.restrict_to(0b01), std::move(beta)), form_on(shape.restrict_to(0b10), std::move(v))});
    }
    verify_witness(alpha, out.decomposition);
    out.bias = exact_bias(alpha);
    out.bound_holds = out.bias < c || c * Rational(big_pow(alpha.p(), out.rank)) <= 1;
    return out;
}

} // namespace rankforge
