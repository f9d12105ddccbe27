#include "rankforge/forms.hpp"

#include <string>

#include "rankforge/errors.hpp"
#include "rankforge/parallel.hpp"
#include "rankforge/rng.hpp"

namespace rankforge {

namespace {

std::uint64_t product(std::span<const std::size_t> xs) {
    std::uint64_t out = 1;
    for (std::size_t x : xs) out = checked_mul(out, x);
    return out;
}

std::vector<std::size_t> linear_extents(const Shape& shape, std::uint32_t m) {
    std::vector<std::size_t> ext(shape.dims().begin(), shape.dims().end());
    ext.push_back(m);
    return ext;
}

std::vector<std::size_t> affine_extents(const Shape& shape, std::uint32_t m) {
    std::vector<std::size_t> ext;
    for (std::uint32_t n : shape.dims()) ext.push_back(n + 1);
    ext.push_back(m);
    return ext;
}

// Multi-index of a flat row-major position.
void unflatten(std::size_t flat, std::span<const std::size_t> ext, std::vector<std::uint32_t>& idx) {
    idx.resize(ext.size());
    for (std::size_t a = ext.size(); a-- > 0;) {
        idx[a] = static_cast<std::uint32_t>(flat % ext[a]);
        flat /= ext[a];
    }
}

// Contracts axis `axis` of a row-major tensor against v.
std::vector<Residue> contract_axis(std::uint32_t p, std::span<const Residue> c, std::vector<std::size_t>& ext,
                                   std::size_t axis, std::span<const Residue> v) {
    std::size_t outer = 1;
    for (std::size_t a = 0; a < axis; ++a) outer *= ext[a];
    const std::size_t len = ext[axis];
    std::size_t inner = 1;
    for (std::size_t a = axis + 1; a < ext.size(); ++a) inner *= ext[a];
    std::vector<std::uint64_t> acc(outer * inner, 0);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t j = 0; j < len; ++j) {
            const std::uint64_t w = v[j];
            if (w == 0) continue;
            const Residue* src = c.data() + (o * len + j) * inner;
            std::uint64_t* dst = acc.data() + o * inner;
            for (std::size_t t = 0; t < inner; ++t) dst[t] = (dst[t] + w * src[t]) % p;
        }
    }
    ext.erase(ext.begin() + static_cast<std::ptrdiff_t>(axis));
    return {acc.begin(), acc.end()};
}

FVec homogenize(std::span<const Residue> x) {
    FVec h(x.begin(), x.end());
    h.push_back(1);
    return h;
}

void check_entries(std::uint32_t p, std::span<const Residue> coeffs) {
    for (Residue r : coeffs) {
        if (r >= p) throw DomainError("coefficient " + std::to_string(r) + " is not a residue mod " + std::to_string(p));
    }
}

void check_target(std::uint32_t m) {
    if (m == 0) throw PreconditionError("target dimension must be at least 1");
}

// out <- [sum_j v_j blocks[j] (+ blocks[n]) for v in F_p^n], each entry a
// block of `width` residues, v in index order.
void span_table(std::uint32_t p, std::size_t n, const Residue* blocks, std::size_t width, bool affine,
                std::vector<Residue>& out, std::vector<Residue>& scratch) {
    out.assign(width, 0);
    if (affine) std::copy(blocks + n * width, blocks + (n + 1) * width, out.begin());
    for (std::size_t j = 0; j < n; ++j) {
        const Residue* b = blocks + j * width;
        const std::size_t count = out.size() / width;
        scratch.resize(out.size() * p);
        for (std::size_t e = 0; e < count; ++e) {
            Residue* dst = scratch.data() + e * p * width;
            std::copy(out.data() + e * width, out.data() + (e + 1) * width, dst);
            for (std::uint32_t d = 1; d < p; ++d) {
                Residue* prev = dst + (d - 1) * width;
                Residue* cur = dst + d * width;
                for (std::size_t t = 0; t < width; ++t) {
                    const Residue s = prev[t] + b[t];
                    cur[t] = s >= p ? s - p : s;
                }
            }
        }
        out.swap(scratch);
    }
}

struct LaneWalker {
    const Shape& shape;
    std::vector<std::size_t> widths;
    std::vector<std::vector<Residue>> tables;
    std::vector<Residue> scratch;
    const ValueRunVisitor& visit;
    std::uint64_t lane = 0;

    LaneWalker(const Shape& s, std::vector<std::size_t> w, const ValueRunVisitor& v)
        : shape(s), widths(std::move(w)), tables(s.arity()), visit(v) {}

    void walk(const Residue* tensor, std::size_t level, std::uint64_t base) {
        span_table(shape.p(), shape.dim(level), tensor, widths[level], true, tables[level], scratch);
        const std::uint64_t count = shape.block_size(level);
        if (level + 1 == shape.arity()) {
            visit(lane, base * count, tables[level]);
            return;
        }
        const std::vector<Residue>& table = tables[level];
        for (std::uint64_t t = 0; t < count; ++t) walk(table.data() + t * widths[level], level + 1, base * count + t);
    }
};

} // namespace

// ---------------------------------------------------------------------------

MultilinearMap::MultilinearMap(Shape shape, std::uint32_t target_dim)
    : shape_(std::move(shape)), target_dim_(target_dim) {
    check_target(target_dim_);
    const std::uint64_t size = checked_mul(shape_.monomial_count(shape_.all()), target_dim_);
    require_within(size, kTableGuard, "coefficient tensor");
    coeffs_.assign(size, 0);
}

MultilinearMap::MultilinearMap(Shape shape, std::uint32_t target_dim, std::vector<Residue> coeffs)
    : MultilinearMap(std::move(shape), target_dim) {
    if (coeffs.size() != coeffs_.size()) {
        throw DimensionError("expected " + std::to_string(coeffs_.size()) + " coefficients, got " +
                             std::to_string(coeffs.size()));
    }
    check_entries(shape_.p(), coeffs);
    coeffs_ = std::move(coeffs);
}

std::size_t MultilinearMap::flat_index(std::span<const std::uint32_t> index, std::uint32_t out) const {
    if (index.size() != arity()) throw DimensionError("index arity mismatch");
    if (out >= target_dim_) throw DimensionError("output index out of range");
    std::size_t flat = 0;
    for (std::size_t i = 0; i < arity(); ++i) {
        if (index[i] >= shape_.dim(i)) throw DimensionError("index out of range");
        flat = flat * shape_.dim(i) + index[i];
    }
    return flat * target_dim_ + out;
}

void MultilinearMap::set_coeff(std::span<const std::uint32_t> index, std::uint32_t out, Residue value) {
    set_coeff_at(flat_index(index, out), value);
}

void MultilinearMap::set_coeff_at(std::size_t flat, Residue value) {
    if (value >= p()) throw DomainError("coefficient is not a residue");
    coeffs_.at(flat) = value;
}

bool MultilinearMap::is_zero() const noexcept {
    for (Residue r : coeffs_)
        if (r != 0) return false;
    return true;
}

FVec MultilinearMap::evaluate(std::span<const FVec> x) const {
    shape_.check_point(x);
    std::vector<std::size_t> ext = linear_extents(shape_, target_dim_);
    std::vector<Residue> cur = coeffs_;
    for (std::size_t i = 0; i < arity(); ++i) cur = contract_axis(p(), cur, ext, 0, x[i]);
    return cur;
}

Residue MultilinearMap::evaluate_form(std::span<const FVec> x) const {
    if (!is_form()) throw DimensionError("map is not scalar-valued");
    return evaluate(x)[0];
}

MultilinearMap MultilinearMap::component(std::uint32_t out) const {
    if (out >= target_dim_) throw DimensionError("output index out of range");
    MultilinearMap r(shape_, 1);
    for (std::size_t j = 0; j < r.coeffs_.size(); ++j) r.coeffs_[j] = coeffs_[j * target_dim_ + out];
    return r;
}

MultilinearMap MultilinearMap::scaled(Residue c) const {
    MultilinearMap r = *this;
    for (Residue& v : r.coeffs_) v = static_cast<Residue>(static_cast<std::uint64_t>(v) * (c % p()) % p());
    return r;
}

MultilinearMap MultilinearMap::operator+(const MultilinearMap& other) const {
    if (!(shape_ == other.shape_) || target_dim_ != other.target_dim_) throw DimensionError("shape mismatch in sum");
    MultilinearMap r = *this;
    for (std::size_t j = 0; j < coeffs_.size(); ++j) r.coeffs_[j] = (coeffs_[j] + other.coeffs_[j]) % p();
    return r;
}

MultilinearMap MultilinearMap::operator-(const MultilinearMap& other) const {
    if (!(shape_ == other.shape_) || target_dim_ != other.target_dim_) throw DimensionError("shape mismatch in difference");
    MultilinearMap r = *this;
    for (std::size_t j = 0; j < coeffs_.size(); ++j) r.coeffs_[j] = (coeffs_[j] + p() - other.coeffs_[j]) % p();
    return r;
}

// ---------------------------------------------------------------------------

MultiaffineMap::MultiaffineMap(Shape shape, std::uint32_t target_dim)
    : shape_(std::move(shape)), target_dim_(target_dim) {
    check_target(target_dim_);
    const std::uint64_t size = product(affine_extents(shape_, target_dim_));
    require_within(size, kTableGuard, "coefficient tensor");
    coeffs_.assign(size, 0);
}

MultiaffineMap MultiaffineMap::from_homogenized(Shape shape, std::uint32_t target_dim, std::vector<Residue> coeffs) {
    MultiaffineMap f(std::move(shape), target_dim);
    if (coeffs.size() != f.coeffs_.size()) throw DimensionError("homogenized coefficient count mismatch");
    check_entries(f.p(), coeffs);
    f.coeffs_ = std::move(coeffs);
    return f;
}

MultiaffineMap MultiaffineMap::from_multilinear(const MultilinearMap& f) {
    return embed(f.shape(), f.shape().all(), f);
}

MultiaffineMap MultiaffineMap::constant(Shape shape, const FVec& value) {
    const Shape empty = shape.restrict_to(0);
    const auto m = static_cast<std::uint32_t>(value.size());
    return embed(std::move(shape), 0, MultilinearMap(empty, m, value));
}

MultiaffineMap MultiaffineMap::embed(Shape shape, CoordSet s, const MultilinearMap& part) {
    MultiaffineMap f(std::move(shape), part.target_dim());
    f.set_part(s, part);
    return f;
}

std::size_t MultiaffineMap::homogenized_index(CoordSet s, std::span<const std::uint32_t> part_index,
                                              std::uint32_t out) const {
    std::size_t flat = 0;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < arity(); ++i) {
        const std::uint32_t n = shape_.dim(i);
        const std::uint32_t j = contains(s, i) ? part_index[pos++] : n;
        flat = flat * (n + 1) + j;
    }
    return flat * target_dim_ + out;
}

MultilinearMap MultiaffineMap::part(CoordSet s) const {
    if ((s & ~shape_.all()) != 0) throw DimensionError("subset mentions a coordinate beyond the arity");
    const Shape sub = shape_.restrict_to(s);
    const std::vector<std::size_t> ext = linear_extents(sub, target_dim_);
    const std::size_t size = product(ext);
    std::vector<Residue> c(size);
    std::vector<std::uint32_t> idx;
    for (std::size_t flat = 0; flat < size; ++flat) {
        unflatten(flat, ext, idx);
        c[flat] = coeffs_[homogenized_index(s, std::span(idx).first(sub.arity()), idx.back())];
    }
    return MultilinearMap(sub, target_dim_, std::move(c));
}

void MultiaffineMap::set_part(CoordSet s, const MultilinearMap& part) {
    if ((s & ~shape_.all()) != 0) throw DimensionError("subset mentions a coordinate beyond the arity");
    const Shape sub = shape_.restrict_to(s);
    if (!(part.shape() == sub) || part.target_dim() != target_dim_) {
        throw DimensionError("part does not live on the restricted shape");
    }
    const std::vector<std::size_t> ext = linear_extents(sub, target_dim_);
    std::vector<std::uint32_t> idx;
    for (std::size_t flat = 0; flat < part.coeffs().size(); ++flat) {
        unflatten(flat, ext, idx);
        coeffs_[homogenized_index(s, std::span(idx).first(sub.arity()), idx.back())] = part.coeffs()[flat];
    }
}

bool MultiaffineMap::is_zero() const noexcept {
    for (Residue r : coeffs_)
        if (r != 0) return false;
    return true;
}

bool MultiaffineMap::is_multilinear() const noexcept {
    const std::vector<std::size_t> ext = affine_extents(shape_, target_dim_);
    std::vector<std::uint32_t> idx;
    for (std::size_t flat = 0; flat < coeffs_.size(); ++flat) {
        if (coeffs_[flat] == 0) continue;
        unflatten(flat, ext, idx);
        for (std::size_t i = 0; i < arity(); ++i)
            if (idx[i] == shape_.dim(i)) return false;
    }
    return true;
}

bool MultiaffineMap::is_linear_in(std::size_t coord) const noexcept {
    const std::vector<std::size_t> ext = affine_extents(shape_, target_dim_);
    std::vector<std::uint32_t> idx;
    for (std::size_t flat = 0; flat < coeffs_.size(); ++flat) {
        if (coeffs_[flat] == 0) continue;
        unflatten(flat, ext, idx);
        if (idx[coord] == shape_.dim(coord)) return false;
    }
    return true;
}

FVec MultiaffineMap::evaluate(std::span<const FVec> x) const {
    shape_.check_point(x);
    std::vector<std::size_t> ext = affine_extents(shape_, target_dim_);
    std::vector<Residue> cur = coeffs_;
    for (std::size_t i = 0; i < arity(); ++i) cur = contract_axis(p(), cur, ext, 0, homogenize(x[i]));
    return cur;
}

Residue MultiaffineMap::evaluate_form(std::span<const FVec> x) const {
    if (!is_form()) throw DimensionError("map is not scalar-valued");
    return evaluate(x)[0];
}

MultiaffineMap MultiaffineMap::component(std::uint32_t out) const {
    if (out >= target_dim_) throw DimensionError("output index out of range");
    Matrix h(p(), 1, target_dim_);
    h(0, out) = 1;
    return linear_image(h);
}

MultiaffineMap MultiaffineMap::linear_image(const Matrix& h) const {
    if (h.cols() != target_dim_ || h.p() != p()) throw DimensionError("matrix does not act on the target space");
    const auto rows = static_cast<std::uint32_t>(h.rows());
    MultiaffineMap r(shape_, rows);
    const std::size_t blocks = coeffs_.size() / target_dim_;
    for (std::size_t b = 0; b < blocks; ++b) {
        const Residue* src = coeffs_.data() + b * target_dim_;
        for (std::uint32_t row = 0; row < rows; ++row) {
            std::uint64_t acc = 0;
            for (std::uint32_t o = 0; o < target_dim_; ++o) acc = (acc + std::uint64_t{h(row, o)} * src[o]) % p();
            r.coeffs_[b * rows + row] = static_cast<Residue>(acc);
        }
    }
    return r;
}

MultiaffineMap MultiaffineMap::scaled(Residue c) const {
    MultiaffineMap r = *this;
    for (Residue& v : r.coeffs_) v = static_cast<Residue>(static_cast<std::uint64_t>(v) * (c % p()) % p());
    return r;
}

MultiaffineMap MultiaffineMap::operator+(const MultiaffineMap& other) const {
    if (!(shape_ == other.shape_) || target_dim_ != other.target_dim_) throw DimensionError("shape mismatch in sum");
    MultiaffineMap r = *this;
    for (std::size_t j = 0; j < coeffs_.size(); ++j) r.coeffs_[j] = (coeffs_[j] + other.coeffs_[j]) % p();
    return r;
}

MultiaffineMap MultiaffineMap::operator-(const MultiaffineMap& other) const {
    if (!(shape_ == other.shape_) || target_dim_ != other.target_dim_) throw DimensionError("shape mismatch in difference");
    MultiaffineMap r = *this;
    for (std::size_t j = 0; j < coeffs_.size(); ++j) r.coeffs_[j] = (coeffs_[j] + p() - other.coeffs_[j]) % p();
    return r;
}

// ---------------------------------------------------------------------------

MultilinearMap curry_last(const MultilinearMap& alpha) {
    if (alpha.arity() < 2) throw ArityError("currying needs arity at least 2");
    if (!alpha.is_form()) throw DimensionError("currying needs a scalar form");
    const std::size_t k = alpha.arity();
    const Shape head = alpha.shape().restrict_to(full_set(k - 1));
    const std::vector<Residue> c(alpha.coeffs().begin(), alpha.coeffs().end());
    return MultilinearMap(head, alpha.shape().dim(k - 1), c);
}

namespace {

void check_slice(const Shape& shape, CoordSet fixed, std::span<const FVec> values) {
    if ((fixed & ~shape.all()) != 0) throw DimensionError("slice mentions a coordinate beyond the arity");
    if (fixed == shape.all()) throw PreconditionError("slice must leave at least one coordinate free");
    if (values.size() != set_size(fixed)) throw DimensionError("slice value count mismatch");
    std::size_t pos = 0;
    for (std::size_t i = 0; i < shape.arity(); ++i) {
        if (!contains(fixed, i)) continue;
        const FVec& v = values[pos++];
        if (v.size() != shape.dim(i)) throw DimensionError("slice value has the wrong length");
        for (Residue r : v)
            if (r >= shape.p()) throw DomainError("slice value is not a residue vector");
    }
}

} // namespace

MultilinearMap slice(const MultilinearMap& f, CoordSet fixed, std::span<const FVec> values) {
    check_slice(f.shape(), fixed, values);
    std::vector<std::size_t> ext = linear_extents(f.shape(), f.target_dim());
    std::vector<Residue> cur(f.coeffs().begin(), f.coeffs().end());
    std::size_t pos = values.size();
    for (std::size_t i = f.arity(); i-- > 0;) {
        if (contains(fixed, i)) cur = contract_axis(f.p(), cur, ext, i, values[--pos]);
    }
    return MultilinearMap(f.shape().restrict_to(f.shape().all() & ~fixed), f.target_dim(), std::move(cur));
}

MultiaffineMap slice(const MultiaffineMap& f, CoordSet fixed, std::span<const FVec> values) {
    check_slice(f.shape(), fixed, values);
    std::vector<std::size_t> ext = affine_extents(f.shape(), f.target_dim());
    std::vector<Residue> cur(f.homogenized().begin(), f.homogenized().end());
    std::size_t pos = values.size();
    for (std::size_t i = f.arity(); i-- > 0;) {
        if (contains(fixed, i)) cur = contract_axis(f.p(), cur, ext, i, homogenize(values[--pos]));
    }
    return MultiaffineMap::from_homogenized(f.shape().restrict_to(f.shape().all() & ~fixed), f.target_dim(),
                                            std::move(cur));
}

std::map<CoordSet, MultilinearMap> multilinear_parts(const MultiaffineMap& f) {
    std::map<CoordSet, MultilinearMap> parts;
    const std::vector<std::size_t> ext = affine_extents(f.shape(), f.target_dim());
    const auto c = f.homogenized();
    std::vector<std::uint32_t> idx;
    for (std::size_t flat = 0; flat < c.size(); ++flat) {
        if (c[flat] == 0) continue;
        unflatten(flat, ext, idx);
        CoordSet s = 0;
        for (std::size_t i = 0; i < f.arity(); ++i)
            if (idx[i] < f.shape().dim(i)) s |= CoordSet{1} << i;
        if (parts.find(s) == parts.end()) parts.emplace(s, f.part(s));
    }
    return parts;
}

MultiaffineMap rebuild(const Shape& shape, std::uint32_t target_dim, const std::map<CoordSet, MultilinearMap>& parts) {
    MultiaffineMap f(shape, target_dim);
    for (const auto& [s, part] : parts) f.set_part(s, part);
    return f;
}

MultilinearMap random_multilinear(const Shape& shape, std::uint32_t target_dim, std::uint64_t seed) {
    MultilinearMap f(shape, target_dim);
    Rng rng(seed);
    std::vector<Residue> c(f.coeffs().size());
    for (Residue& r : c) r = static_cast<Residue>(rng.below(shape.p()));
    return MultilinearMap(shape, target_dim, std::move(c));
}

MultiaffineMap random_multiaffine(const Shape& shape, std::uint32_t target_dim, std::uint64_t seed) {
    MultiaffineMap f(shape, target_dim);
    Rng rng(seed);
    std::vector<Residue> c(f.homogenized().size());
    for (Residue& r : c) r = static_cast<Residue>(rng.below(shape.p()));
    return MultiaffineMap::from_homogenized(shape, target_dim, std::move(c));
}

// ---------------------------------------------------------------------------

void for_each_value_run(const MultiaffineMap& f, const ValueRunVisitor& visit) {
    const Shape& shape = f.shape();
    if (shape.arity() == 0) throw ArityError("enumeration needs arity at least 1");
    require_within(shape.domain_size(), kEnumerationGuard, "domain enumeration");
    const std::size_t k = shape.arity();
    const std::uint32_t m = f.target_dim();
    require_within(checked_mul(shape.block_size(k - 1), m), kTableGuard, "innermost value run");
    std::vector<std::size_t> widths(k);
    std::size_t w = m;
    for (std::size_t i = k; i-- > 0;) {
        widths[i] = w;
        w *= shape.dim(i) + 1;
    }
    std::vector<Residue> lead;
    std::vector<Residue> scratch;
    span_table(shape.p(), shape.dim(0), f.homogenized().data(), widths[0], true, lead, scratch);
    const std::uint64_t lanes = shape.block_size(0);
    if (k == 1) {
        parallel_for(lanes, [&](std::size_t e) { visit(e, e, std::span(lead).subspan(e * m, m)); });
        return;
    }
    parallel_for(lanes, [&](std::size_t e) {
        LaneWalker walker(shape, widths, visit);
        walker.lane = e;
        walker.walk(lead.data() + e * widths[0], 1, e);
    });
}

std::vector<Residue> value_table(const MultiaffineMap& f) {
    const std::uint64_t size = checked_mul(f.shape().domain_size(), f.target_dim());
    require_within(size, kTableGuard, "value table");
    std::vector<Residue> out(size);
    const std::uint32_t m = f.target_dim();
    for_each_value_run(f, [&](std::uint64_t, std::uint64_t first, std::span<const Residue> values) {
        std::copy(values.begin(), values.end(), out.begin() + static_cast<std::ptrdiff_t>(first * m));
    });
    return out;
}

std::vector<Residue> value_table(const MultilinearMap& f) {
    return value_table(MultiaffineMap::from_multilinear(f));
}

PointSet zero_set(const MultiaffineMap& f) {
    require_within(f.shape().domain_size(), kTableGuard, "point set");
    std::vector<std::uint8_t> members(f.shape().domain_size(), 0);
    const std::uint32_t m = f.target_dim();
    for_each_value_run(f, [&](std::uint64_t, std::uint64_t first, std::span<const Residue> values) {
        const std::size_t count = values.size() / m;
        for (std::size_t t = 0; t < count; ++t) {
            bool zero = true;
            for (std::uint32_t o = 0; o < m && zero; ++o) zero = values[t * m + o] == 0;
            members[first + t] = zero ? 1 : 0;
        }
    });
    return PointSet(f.shape(), std::move(members));
}

PointSet zero_set(const MultilinearMap& f) {
    return zero_set(MultiaffineMap::from_multilinear(f));
}

} // namespace rankforge
