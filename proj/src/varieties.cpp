#include "rankforge/varieties.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "rankforge/analytic_rank.hpp"
#include "rankforge/errors.hpp"
#include "rankforge/parallel.hpp"
#include "rankforge/rng.hpp"

namespace rankforge {

namespace {

std::string vector_text(const FVec& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s + ")";
}

void check_layer(std::uint32_t p, std::size_t m, const FVec& layer) {
    if (layer.size() != m) throw DimensionError("layer value has the wrong length");
    for (Residue r : layer) {
        if (r >= p) throw DomainError("layer value is not a residue vector");
    }
}

// Maps on one shape stacked into a single map whose target concatenates theirs.
MultiaffineMap stack(const std::vector<const MultiaffineMap*>& maps) {
    const Shape& shape = maps.front()->shape();
    std::uint32_t total = 0;
    for (const MultiaffineMap* f : maps) {
        if (!(f->shape() == shape)) throw DimensionError("stacked maps must share a shape");
        total += f->target_dim();
    }
    const std::size_t blocks = maps.front()->homogenized().size() / maps.front()->target_dim();
    std::vector<Residue> coeffs(blocks * total);
    std::uint32_t offset = 0;
    for (const MultiaffineMap* f : maps) {
        const auto src = f->homogenized();
        const std::uint32_t m = f->target_dim();
        for (std::size_t b = 0; b < blocks; ++b)
            for (std::uint32_t o = 0; o < m; ++o) coeffs[b * total + offset + o] = src[b * m + o];
        offset += m;
    }
    return MultiaffineMap::from_homogenized(shape, total, std::move(coeffs));
}

bool block_zero(std::span<const Residue> v) {
    return std::all_of(v.begin(), v.end(), [](Residue r) { return r == 0; });
}

Rational fraction(std::uint64_t num, std::uint64_t den) { return Rational(BigInt(num), BigInt(den)); }

PointSet layer_points(const MultiaffineMap& f, const FVec& layer) {
    require_within(f.shape().domain_size(), kTableGuard, "point set");
    std::vector<std::uint8_t> members(f.shape().domain_size(), 0);
    const std::uint32_t m = f.target_dim();
    for_each_value_run(f, [&](std::uint64_t, std::uint64_t first, std::span<const Residue> values) {
        for (std::size_t t = 0; t * m < values.size(); ++t) {
            members[first + t] = std::equal(layer.begin(), layer.end(), values.begin() + t * m);
        }
    });
    return PointSet(f.shape(), std::move(members));
}

std::uint64_t layer_count(const MultiaffineMap& f, const FVec& layer) {
    std::atomic<std::uint64_t> count = 0;
    const std::uint32_t m = f.target_dim();
    for_each_value_run(f, [&](std::uint64_t, std::uint64_t, std::span<const Residue> values) {
        std::uint64_t local = 0;
        for (std::size_t t = 0; t < values.size(); t += m) local += std::equal(layer.begin(), layer.end(), values.begin() + t);
        count.fetch_add(local, std::memory_order_relaxed);
    });
    return count.load();
}

struct ZeroCounts {
    std::uint64_t a_zero = 0;
    std::uint64_t phi_zero = 0;
    std::uint64_t a_only = 0;
};

// Zero counts of a and phi, and points where a vanishes but phi does not.
ZeroCounts zero_counts(const MultiaffineMap& a, const MultiaffineMap& phi) {
    const MultiaffineMap joint = stack({&a, &phi});
    const std::uint32_t ma = a.target_dim();
    const std::uint32_t mt = joint.target_dim();
    std::atomic<std::uint64_t> az = 0, pz = 0, ao = 0;
    for_each_value_run(joint, [&](std::uint64_t, std::uint64_t, std::span<const Residue> values) {
        std::uint64_t la = 0, lp = 0, lo = 0;
        for (std::size_t t = 0; t < values.size(); t += mt) {
            const bool za = block_zero(values.subspan(t, ma));
            const bool zp = block_zero(values.subspan(t + ma, mt - ma));
            la += za;
            lp += zp;
            lo += za && !zp;
        }
        az.fetch_add(la, std::memory_order_relaxed);
        pz.fetch_add(lp, std::memory_order_relaxed);
        ao.fetch_add(lo, std::memory_order_relaxed);
    });
    return {az.load(), pz.load(), ao.load()};
}

Matrix random_matrix(std::uint32_t p, std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Matrix h(p, rows, cols);
    Rng rng(seed);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) h(r, c) = static_cast<Residue>(rng.below(p));
    return h;
}

} // namespace

Variety::Variety(Shape shape) : shape_(std::move(shape)) {}

Variety::Variety(MultiaffineMap map, FVec layer) : shape_(map.shape()), layer_(std::move(layer)) {
    check_layer(map.p(), map.target_dim(), layer_);
    map_ = std::move(map);
}

bool Variety::contains(std::span<const FVec> x) const {
    shape_.check_point(x);
    return !map_ || map_->evaluate(x) == layer_;
}

PointSet Variety::points() const {
    if (!map_) {
        require_within(shape_.domain_size(), kTableGuard, "point set");
        return PointSet(shape_, std::vector<std::uint8_t>(shape_.domain_size(), 1));
    }
    return layer_points(*map_, layer_);
}

namespace {

std::uint64_t variety_size(const Variety& v) {
    require_within(v.shape().domain_size(), kEnumerationGuard, "domain enumeration");
    return v.map() ? layer_count(*v.map(), v.layer()) : v.shape().domain_size();
}

} // namespace

Rational density(const Variety& v) { return fraction(variety_size(v), v.shape().domain_size()); }

DensityReport density_bound_check(const Variety& v) {
    DensityReport r;
    r.size = variety_size(v);
    r.density = fraction(r.size, v.shape().domain_size());
    r.bound = Rational(BigInt(1), big_pow(v.shape().p(), v.shape().arity() * v.codim()));
    r.holds = r.size == 0 || r.density >= r.bound;
    return r;
}

BohrReport bohr_external(const MultiaffineMap& a, std::size_t s, std::uint64_t seed) {
    if (s == 0) throw PreconditionError("bohr approximation needs s >= 1");
    const Matrix h = random_matrix(a.p(), s, a.target_dim(), seed);
    BohrReport r{a.linear_image(h)};
    const ZeroCounts c = zero_counts(a, r.phi);
    r.a_zero = c.a_zero;
    r.phi_zero = c.phi_zero;
    r.contained = c.a_only == 0;
    r.exceptional = r.phi_zero - (r.a_zero - c.a_only);
    r.linearity_preserved = true;
    for (std::size_t i = 0; i < a.arity(); ++i) {
        if (a.is_linear_in(i) && !r.phi.is_linear_in(i)) r.linearity_preserved = false;
    }
    return r;
}

std::size_t bohr_sim_dimension(std::uint32_t p, std::size_t r, const Rational& epsilon) {
    if (epsilon <= 0 || epsilon > 1) throw PreconditionError("epsilon must lie in (0, 1]");
    std::size_t t = 0;
    Rational scaled = epsilon;
    while (scaled < 1) {
        scaled *= p;
        ++t;
    }
    return r + t;
}

BohrSimReport bohr_external_sim(const std::vector<MultiaffineMap>& a, const Rational& epsilon, std::uint64_t seed) {
    if (a.empty()) throw PreconditionError("simultaneous approximation needs at least one map");
    const Shape& shape = a.front().shape();
    const std::uint32_t p = shape.p();
    const std::uint32_t m = a.front().target_dim();
    for (const auto& f : a) {
        if (!(f.shape() == shape) || f.target_dim() != m) throw DimensionError("maps must share shape and target");
    }
    const std::size_t r = a.size();
    const std::size_t k = shape.arity();
    BohrSimReport rep;
    rep.s = bohr_sim_dimension(p, r, epsilon);

    const Shape aux_shape = shape.with_appended(static_cast<std::uint32_t>(r));
    const std::size_t blocks = a.front().homogenized().size() / m;
    require_within(checked_mul(checked_mul(blocks, r + 1), m), kTableGuard, "auxiliary map");
    std::vector<Residue> coeffs(blocks * (r + 1) * m, 0);
    for (std::size_t base = 0; base < blocks; ++base)
        for (std::size_t j = 0; j < r; ++j)
            for (std::uint32_t o = 0; o < m; ++o)
                coeffs[(base * (r + 1) + j) * m + o] = a[j].homogenized()[base * m + o];
    const MultiaffineMap big = MultiaffineMap::from_homogenized(aux_shape, m, std::move(coeffs));
    const MultiaffineMap psi = big.linear_image(random_matrix(p, rep.s, m, seed));

    const CoordSet aux = CoordSet{1} << k;
    for (std::size_t i = 0; i < r; ++i) {
        FVec e(r, 0);
        e[i] = 1;
        rep.phi.push_back(slice(psi, aux, std::span<const FVec>(&e, 1)));
    }

    const std::uint64_t combos = checked_pow(p, r);
    require_within(combos, kTraversalGuard, "layer combinations");
    rep.contained = true;
    for (std::uint64_t code = 0; code < combos; ++code) {
        LambdaReport lr;
        lr.lambda = decode_vector(p, r, code);
        const MultiaffineMap la = slice(big, aux, std::span<const FVec>(&lr.lambda, 1));
        const MultiaffineMap lp = slice(psi, aux, std::span<const FVec>(&lr.lambda, 1));
        const ZeroCounts c = zero_counts(la, lp);
        lr.a_zero = c.a_zero;
        lr.phi_zero = c.phi_zero;
        lr.contained = c.a_only == 0;
        lr.exceptional = lr.phi_zero - (lr.a_zero - c.a_only);
        rep.contained = rep.contained && lr.contained;
        rep.per_lambda.push_back(std::move(lr));
    }
    return rep;
}

Rational approximation_error(const LayerFamily& family, const PointSet& s, ApproximationMode mode) {
    const MultiaffineMap& beta = family.map;
    if (!(s.shape() == beta.shape())) throw DimensionError("point set lives on a different shape");
    const std::uint32_t p = beta.p();
    const std::uint32_t m = beta.target_dim();
    std::unordered_set<std::uint64_t> selected;
    for (const FVec& layer : family.layers) {
        check_layer(p, m, layer);
        selected.insert(encode_vector(p, layer));
    }
    const std::vector<Residue> values = value_table(beta);
    const std::uint64_t n = beta.shape().domain_size();
    std::uint64_t missed = 0;
    for (std::uint64_t x = 0; x < n; ++x) {
        const std::span<const Residue> v(values.data() + x * m, m);
        const bool in_union = selected.count(encode_vector(p, v)) != 0;
        const bool in_s = s.contains(x);
        if (in_union == in_s) continue;
        const FVec layer(v.begin(), v.end());
        if (mode == ApproximationMode::internal && in_union) {
            throw ContainmentError("selected layer " + vector_text(layer) + " is not contained in S");
        }
        if (mode == ApproximationMode::external && in_s) {
            throw ContainmentError("S meets unselected layer " + vector_text(layer));
        }
        ++missed;
    }
    return fraction(missed, n);
}

namespace {

// Members of S with, per coordinate, the line each member lies on. A line
// is a maximal set of members that agree outside one coordinate.
struct LineGraph {
    std::vector<std::uint64_t> members;
    std::vector<std::vector<std::uint32_t>> line_of;
    std::vector<std::vector<std::uint32_t>> line_start;
    std::vector<std::vector<std::uint32_t>> line_members;
};

LineGraph build_lines(const PointSet& s) {
    const Shape& shape = s.shape();
    LineGraph g;
    for (std::uint64_t x = 0; x < shape.domain_size(); ++x)
        if (s.contains(x)) g.members.push_back(x);
    const std::size_t k = shape.arity();
    const std::size_t n = g.members.size();
    g.line_of.assign(k, std::vector<std::uint32_t>(n));
    g.line_start.resize(k);
    g.line_members.resize(k);
    std::vector<std::pair<std::uint64_t, std::uint32_t>> keyed(n);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::uint32_t u = 0; u < n; ++u) {
            const std::uint64_t x = g.members[u];
            keyed[u] = {x - shape.coordinate(x, i) * shape.stride(i), u};
        }
        std::sort(keyed.begin(), keyed.end());
        auto& start = g.line_start[i];
        auto& list = g.line_members[i];
        list.resize(n);
        for (std::uint32_t t = 0; t < n; ++t) {
            if (t == 0 || keyed[t].first != keyed[t - 1].first) start.push_back(t);
            g.line_of[i][keyed[t].second] = static_cast<std::uint32_t>(start.size() - 1);
            list[t] = keyed[t].second;
        }
        start.push_back(static_cast<std::uint32_t>(n));
    }
    return g;
}

constexpr std::uint32_t kUnreached = std::numeric_limits<std::uint32_t>::max();

struct BfsScratch {
    std::vector<std::uint32_t> dist;
    std::vector<std::vector<std::uint8_t>> expanded;
    std::vector<std::uint32_t> queue;
};

// Distances from source; each line is expanded once since every member of
// it is within one step of the first member reached.
std::uint32_t bfs(const LineGraph& g, std::uint32_t source, BfsScratch& sc, std::uint32_t* farthest = nullptr) {
    const std::size_t n = g.members.size();
    const std::size_t k = g.line_of.size();
    sc.dist.assign(n, kUnreached);
    sc.expanded.resize(k);
    for (std::size_t i = 0; i < k; ++i) sc.expanded[i].assign(g.line_start[i].size() - 1, 0);
    sc.queue.clear();
    sc.queue.push_back(source);
    sc.dist[source] = 0;
    std::uint32_t ecc = 0;
    std::uint32_t far = source;
    for (std::size_t head = 0; head < sc.queue.size(); ++head) {
        const std::uint32_t u = sc.queue[head];
        const std::uint32_t du = sc.dist[u];
        if (du > ecc || (du == ecc && u < far)) {
            ecc = du;
            far = u;
        }
        for (std::size_t i = 0; i < k; ++i) {
            const std::uint32_t line = g.line_of[i][u];
            if (sc.expanded[i][line]) continue;
            sc.expanded[i][line] = 1;
            for (std::uint32_t t = g.line_start[i][line]; t < g.line_start[i][line + 1]; ++t) {
                const std::uint32_t w = g.line_members[i][t];
                if (sc.dist[w] == kUnreached) {
                    sc.dist[w] = du + 1;
                    sc.queue.push_back(w);
                }
            }
        }
    }
    if (farthest) *farthest = far;
    return ecc;
}

} // namespace

ConnectivityReport connectivity(const PointSet& s, bool with_diameter) {
    require_within(s.shape().domain_size(), kTraversalGuard, "graph traversal");
    const LineGraph g = build_lines(s);
    const std::size_t n = g.members.size();
    ConnectivityReport r;
    r.size = n;
    if (n == 0) return r;

    BfsScratch sc;
    std::vector<std::uint8_t> seen(n, 0);
    std::uint32_t first_ecc = 0;
    std::uint32_t first_far = 0;
    for (std::uint32_t u = 0; u < n; ++u) {
        if (seen[u]) continue;
        ++r.components;
        const std::uint32_t ecc = bfs(g, u, sc, r.components == 1 ? &first_far : nullptr);
        ++r.bfs_runs;
        if (r.components == 1) first_ecc = ecc;
        for (std::uint32_t w : sc.queue) seen[w] = 1;
    }
    r.connected = r.components == 1;
    if (!r.connected || !with_diameter) return r;

    if (n <= kExactDiameterLimit) {
        std::atomic<std::uint32_t> best = first_ecc;
        parallel_for(n, [&](std::size_t u) {
            BfsScratch local;
            const std::uint32_t ecc = bfs(g, static_cast<std::uint32_t>(u), local);
            std::uint32_t cur = best.load();
            while (ecc > cur && !best.compare_exchange_weak(cur, ecc)) {
            }
        });
        r.bfs_runs += n;
        r.diameter_lower = r.diameter_upper = best.load();
        r.diameter_exact = true;
        return r;
    }

    std::uint64_t lower = first_ecc;
    std::uint64_t upper = std::uint64_t{2} * first_ecc;
    std::vector<std::uint32_t> sources{first_far};
    Rng rng(0x9a3f17c2d5e4b601ULL);
    for (int t = 0; t < 8; ++t) sources.push_back(static_cast<std::uint32_t>(rng.below(n)));
    for (std::uint32_t src : sources) {
        const std::uint64_t ecc = bfs(g, src, sc);
        ++r.bfs_runs;
        lower = std::max(lower, ecc);
        upper = std::min(upper, 2 * ecc);
    }
    r.diameter_lower = lower;
    r.diameter_upper = upper;
    r.diameter_exact = lower == upper;
    return r;
}

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::violated: return "violated";
    case Verdict::inconclusive: return "inconclusive";
    case Verdict::not_applicable: return "not_applicable";
    }
    return "unknown";
}

Rational nonzero_conn_eta(std::uint32_t p, std::size_t k, std::size_t r) {
    return Rational(BigInt(1), big_pow(2, 2 * k) * big_pow(p, (k + 1) * (3 * r + 2)));
}

PointSet common_zero_set(const Shape& shape, const std::vector<IndexedForm>& forms) {
    require_within(shape.domain_size(), kTableGuard, "point set");
    std::vector<std::uint8_t> members(shape.domain_size(), 1);
    for (const IndexedForm& f : forms) {
        if (f.subset == 0 || (f.subset & ~shape.all()) != 0) throw PreconditionError("form needs a nonempty index set within the arity");
        if (!(f.form.shape() == shape.restrict_to(f.subset))) throw DimensionError("form does not live on its index set");
        const MultiaffineMap e = MultiaffineMap::embed(shape, f.subset, f.form);
        const std::uint32_t m = e.target_dim();
        for_each_value_run(e, [&](std::uint64_t, std::uint64_t first, std::span<const Residue> values) {
            for (std::size_t t = 0; t * m < values.size(); ++t)
                if (!block_zero(values.subspan(t * m, m))) members[first + t] = 0;
        });
    }
    return PointSet(shape, std::move(members));
}

NonzeroConnReport nonzero_conn_check(const MultilinearMap& rho, const std::vector<IndexedForm>& gammas) {
    if (!rho.is_form()) throw DimensionError("rho must be a scalar form");
    const Shape& shape = rho.shape();
    const std::size_t k = shape.arity();
    const std::uint32_t p = shape.p();
    std::vector<const MultilinearMap*> full;
    for (const IndexedForm& g : gammas) {
        if (g.subset == 0) throw PreconditionError("index sets must be nonempty");
        if (!g.form.is_form()) throw DimensionError("gamma must be scalar forms");
        if (g.subset == shape.all()) full.push_back(&g.form);
    }
    NonzeroConnReport rep;
    rep.eta = nonzero_conn_eta(p, k, gammas.size());
    rep.diameter_bound = (2 * k + 1) * ((std::uint64_t{1} << k) - 1);

    const std::uint64_t combos = checked_pow(p, full.size());
    require_within(combos, kTraversalGuard, "coefficient combinations");
    rep.max_bias = 0;
    for (std::uint64_t code = 0; code < combos; ++code) {
        const FVec lambda = decode_vector(p, full.size(), code);
        MultilinearMap f = rho;
        for (std::size_t i = 0; i < full.size(); ++i) {
            if (lambda[i] != 0) f = f - full[i]->scaled(lambda[i]);
        }
        rep.max_bias = std::max(rep.max_bias, exact_bias(f));
    }
    rep.hypothesis_satisfied = rep.max_bias <= rep.eta;

    PointSet target = common_zero_set(shape, gammas);
    const PointSet rho_zero = zero_set(rho);
    for (std::uint64_t x = 0; x < shape.domain_size(); ++x)
        if (rho_zero.contains(x)) target.erase(x);
    rep.graph = connectivity(target);

    if (!rep.hypothesis_satisfied) {
        rep.verdict = Verdict::not_applicable;
    } else if (!rep.graph.connected || *rep.graph.diameter_lower > rep.diameter_bound) {
        rep.verdict = Verdict::violated;
    } else if (*rep.graph.diameter_upper <= rep.diameter_bound) {
        rep.verdict = Verdict::holds;
    } else {
        rep.verdict = Verdict::inconclusive;
    }
    return rep;
}

std::optional<FVec> find_common_nonvanisher(std::uint32_t p, const FVec& v1, const FVec& v2, const std::vector<FVec>& us) {
    const std::size_t n = v1.size();
    if (v2.size() != n) throw DimensionError("vectors must share one length");
    for (const FVec& u : us)
        if (u.size() != n) throw DimensionError("vectors must share one length");
    if (in_span(p, us, v1) || in_span(p, us, v2)) return std::nullopt;
    const PrimeField field(p);
    std::vector<FVec> basis;
    if (us.empty()) {
        for (std::size_t i = 0; i < n; ++i) {
            basis.emplace_back(n, 0);
            basis.back()[i] = 1;
        }
    } else {
        basis = kernel_basis(Matrix::from_rows(p, n, us));
    }
    auto first_nonvanishing = [&](const FVec& v) {
        for (const FVec& b : basis)
            if (dot(field, v, b) != 0) return b;
        throw VerificationError("no kernel vector detects a vector outside the span");
    };
    const FVec z1 = first_nonvanishing(v1);
    if (dot(field, v2, z1) != 0) return z1;
    const FVec z2 = first_nonvanishing(v2);
    if (dot(field, v1, z2) != 0) return z2;
    FVec z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = field.add(z1[i], z2[i]);
    return z;
}

SolvabilityReport solvability_check(std::uint32_t p, std::size_t n, const std::vector<FVec>& xs, const FVec& lambda) {
    const std::size_t r = xs.size();
    if (lambda.size() != r) throw DimensionError("one target value per vector");
    for (const FVec& x : xs)
        if (x.size() != n) throw DimensionError("vectors must have length n");
    check_layer(p, r, lambda);
    SolvabilityReport rep;
    rep.y = r == 0 ? std::optional<FVec>(FVec(n, 0)) : solve(Matrix::from_rows(p, n, xs), lambda);

    const PrimeField field(p);
    const std::uint64_t combos = checked_pow(p, r);
    require_within(combos, kTraversalGuard, "dual enumeration");
    for (std::uint64_t code = 1; code < combos && !rep.mu; ++code) {
        const FVec mu = decode_vector(p, r, code);
        if (dot(field, mu, lambda) == 0) continue;
        FVec sum(n, 0);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < n; ++j) sum[j] = field.add(sum[j], field.mul(mu[i], xs[i][j]));
        if (block_zero(sum)) rep.mu = mu;
    }
    if (rep.y.has_value() == rep.mu.has_value()) {
        throw VerificationError("solvability and its dual condition disagree");
    }
    rep.exists = rep.y.has_value();
    return rep;
}

namespace {

struct Constraint {
    CoordSet subset;
    MultilinearMap form;
    Residue value;
};

PointSet constraint_set(const Shape& shape, const std::vector<Constraint>& cs) {
    std::vector<std::uint8_t> members(shape.domain_size(), 1);
    for (const Constraint& c : cs) {
        const MultiaffineMap e = MultiaffineMap::embed(shape, c.subset, c.form);
        for_each_value_run(e, [&](std::uint64_t, std::uint64_t first, std::span<const Residue> values) {
            for (std::size_t t = 0; t < values.size(); ++t)
                if (values[t] != c.value) members[first + t] = 0;
        });
    }
    return PointSet(shape, std::move(members));
}

std::optional<std::uint64_t> least_point(const PointSet& s) {
    const auto m = s.members();
    const auto it = std::find(m.begin(), m.end(), std::uint8_t{1});
    if (it == m.end()) return std::nullopt;
    return static_cast<std::uint64_t>(it - m.begin());
}

bool subset_of(const PointSet& a, const PointSet& b) {
    for (std::uint64_t x = 0; x < a.shape().domain_size(); ++x)
        if (a.contains(x) && !b.contains(x)) return false;
    return true;
}

std::vector<FVec> restricted_point(const std::vector<FVec>& x, CoordSet s) {
    std::vector<FVec> out;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (contains(s, i)) out.push_back(x[i]);
    return out;
}

} // namespace

MultilinearizationReport multilinearize_variety(const Variety& d, const MultilinearMap& a) {
    const Shape& shape = d.shape();
    if (!(a.shape() == shape)) throw DimensionError("A must live on the variety's shape");
    require_within(shape.domain_size(), kTableGuard, "point set");
    const std::size_t k = shape.arity();
    const PointSet dset = d.points();
    const auto start = least_point(dset);
    if (!start) throw PreconditionError("variety is empty");
    const PointSet a_zero = zero_set(a);
    if (!subset_of(dset, a_zero)) throw ContainmentError("variety is not contained in {A = 0}");

    std::vector<Constraint> cs;
    if (d.map()) {
        const std::vector<FVec> v = shape.decode_point(*start);
        for (std::uint32_t j = 0; j < d.codim(); ++j) {
            for (const auto& [subset, part] : multilinear_parts(d.map()->component(j))) {
                if (subset == 0) continue;
                const std::vector<FVec> vi = restricted_point(v, subset);
                cs.push_back({subset, part, part.evaluate_form(vi)});
            }
        }
    }

    for (std::size_t c = 0; c < k; ++c) {
        const auto point = least_point(constraint_set(shape, cs));
        if (!point) throw VerificationError("multilinearization produced an empty variety");
        const FVec vc = shape.decode_point(*point)[c];
        std::vector<Constraint> next;
        for (Constraint& con : cs) {
            if (!contains(con.subset, c)) {
                next.push_back(std::move(con));
                continue;
            }
            const CoordSet rest = con.subset & ~(CoordSet{1} << c);
            if (rest != 0) {
                const std::size_t local = set_size(con.subset & ((CoordSet{1} << c) - 1));
                MultilinearMap sliced = slice(con.form, CoordSet{1} << local, std::span<const FVec>(&vc, 1));
                if (!sliced.is_zero()) next.push_back({rest, std::move(sliced), con.value});
            }
            next.push_back({con.subset, std::move(con.form), 0});
        }
        cs = std::move(next);
    }

    MultilinearizationReport rep;
    rep.bound = (std::size_t{1} << (2 * k)) * d.codim();
    for (Constraint& con : cs) {
        if (con.value != 0) throw VerificationError("multilinearization left an inhomogeneous constraint");
        rep.forms.push_back({con.subset, std::move(con.form)});
    }
    const PointSet out = common_zero_set(shape, rep.forms);
    rep.nonempty = !out.empty();
    rep.contained = subset_of(out, a_zero);
    if (!rep.contained || !rep.nonempty || rep.forms.size() > rep.bound) {
        throw VerificationError("multilinearized variety fails its guarantees");
    }
    return rep;
}

std::vector<MultilinearMap> forms_vanishing_on(const PointSet& s) {
    const Shape& shape = s.shape();
    const std::uint64_t monomials = shape.monomial_count(shape.all());
    const std::uint64_t rows = s.size();
    require_within(checked_mul(std::max<std::uint64_t>(rows, 1), monomials), kTableGuard, "monomial evaluation matrix");
    const PrimeField field(shape.p());
    std::vector<FVec> evals;
    for (std::uint64_t x = 0; x < shape.domain_size(); ++x) {
        if (!s.contains(x)) continue;
        FVec row{1};
        for (const FVec& xi : shape.decode_point(x)) {
            FVec next;
            next.reserve(row.size() * xi.size());
            for (Residue a : row)
                for (Residue b : xi) next.push_back(field.mul(a, b));
            row = std::move(next);
        }
        evals.push_back(std::move(row));
    }
    std::vector<FVec> basis;
    if (evals.empty()) {
        for (std::uint64_t j = 0; j < monomials; ++j) {
            basis.emplace_back(monomials, 0);
            basis.back()[j] = 1;
        }
    } else {
        basis = kernel_basis(Matrix::from_rows(shape.p(), monomials, evals));
    }
    std::vector<MultilinearMap> out;
    for (FVec& b : basis) out.emplace_back(shape, 1, std::move(b));
    return out;
}

} // namespace rankforge
