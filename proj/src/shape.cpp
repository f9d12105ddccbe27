#include "rankforge/shape.hpp"

#include <string>

#include "rankforge/errors.hpp"

namespace rankforge {

void require_within(std::uint64_t needed, std::uint64_t guard, std::string_view what) {
    if (needed > guard) {
        throw ResourceError(std::string(what) + " requires " + std::to_string(needed) +
                            " units, above the guard of " + std::to_string(guard));
    }
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    std::uint64_t out = 0;
    if (__builtin_mul_overflow(a, b, &out)) throw ResourceError("64-bit counter overflow");
    return out;
}

std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp) {
    std::uint64_t out = 1;
    for (std::uint64_t i = 0; i < exp; ++i) out = checked_mul(out, base);
    return out;
}

std::uint64_t encode_vector(std::uint32_t p, std::span<const Residue> v) {
    std::uint64_t index = 0;
    for (Residue r : v) index = index * p + r;
    return index;
}

FVec decode_vector(std::uint32_t p, std::size_t n, std::uint64_t index) {
    FVec v(n);
    for (std::size_t j = n; j-- > 0;) {
        v[j] = static_cast<Residue>(index % p);
        index /= p;
    }
    return v;
}

std::uint64_t vector_add(std::uint32_t p, std::size_t n, std::uint64_t a, std::uint64_t b) {
    std::uint64_t out = 0;
    std::uint64_t place = 1;
    for (std::size_t j = 0; j < n; ++j) {
        const std::uint64_t d = (a % p + b % p) % p;
        out += d * place;
        place *= p;
        a /= p;
        b /= p;
    }
    return out;
}

std::uint64_t vector_sub(std::uint32_t p, std::size_t n, std::uint64_t a, std::uint64_t b) {
    std::uint64_t out = 0;
    std::uint64_t place = 1;
    for (std::size_t j = 0; j < n; ++j) {
        const std::uint64_t d = (a % p + p - b % p) % p;
        out += d * place;
        place *= p;
        a /= p;
        b /= p;
    }
    return out;
}

Shape::Shape(std::uint32_t p, std::vector<std::uint32_t> dims) : p_(p), dims_(std::move(dims)) {
    if (!is_prime(p_)) throw DomainError("modulus " + std::to_string(p_) + " is not prime");
    if (dims_.size() > 24) throw DimensionError("arity above 24 is not supported");
    block_sizes_.resize(dims_.size());
    strides_.resize(dims_.size());
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        if (dims_[i] == 0) throw DimensionError("coordinate " + std::to_string(i + 1) + " has dimension 0");
        if (dims_[i] > 64) throw ResourceError("coordinate dimension above 64");
        block_sizes_[i] = checked_pow(p_, dims_[i]);
    }
    domain_size_ = 1;
    for (std::size_t i = dims_.size(); i-- > 0;) {
        strides_[i] = domain_size_;
        domain_size_ = checked_mul(domain_size_, block_sizes_[i]);
    }
}

std::uint64_t Shape::domain_size(CoordSet s) const {
    std::uint64_t size = 1;
    for (std::size_t i = 0; i < arity(); ++i) {
        if (rankforge::contains(s, i)) size = checked_mul(size, block_sizes_[i]);
    }
    return size;
}

std::uint64_t Shape::monomial_count(CoordSet s) const {
    std::uint64_t count = 1;
    for (std::size_t i = 0; i < arity(); ++i) {
        if (rankforge::contains(s, i)) count = checked_mul(count, dims_[i]);
    }
    return count;
}

Shape Shape::restrict_to(CoordSet s) const {
    std::vector<std::uint32_t> dims;
    for (std::size_t i = 0; i < arity(); ++i) {
        if (rankforge::contains(s, i)) dims.push_back(dims_[i]);
    }
    return Shape(p_, std::move(dims));
}

Shape Shape::with_appended(std::uint32_t n) const {
    auto dims = dims_;
    dims.push_back(n);
    return Shape(p_, std::move(dims));
}

std::vector<std::uint64_t> Shape::coordinates(std::uint64_t point) const {
    std::vector<std::uint64_t> coords(arity());
    for (std::size_t i = 0; i < arity(); ++i) coords[i] = coordinate(point, i);
    return coords;
}

std::uint64_t Shape::point(std::span<const std::uint64_t> coords) const {
    std::uint64_t out = 0;
    for (std::size_t i = 0; i < arity(); ++i) out += coords[i] * strides_[i];
    return out;
}

std::vector<FVec> Shape::decode_point(std::uint64_t point) const {
    std::vector<FVec> x(arity());
    for (std::size_t i = 0; i < arity(); ++i) x[i] = decode_vector(p_, dims_[i], coordinate(point, i));
    return x;
}

void Shape::check_point(std::span<const FVec> x) const {
    if (x.size() != arity()) {
        throw DimensionError("point has " + std::to_string(x.size()) + " coordinates, expected " +
                             std::to_string(arity()));
    }
    for (std::size_t i = 0; i < arity(); ++i) {
        if (x[i].size() != dims_[i]) {
            throw DimensionError("coordinate " + std::to_string(i + 1) + " has length " +
                                 std::to_string(x[i].size()) + ", expected " + std::to_string(dims_[i]));
        }
        for (Residue r : x[i]) {
            if (r >= p_) throw DimensionError("entry " + std::to_string(r) + " is not a residue mod p");
        }
    }
}

std::uint64_t Shape::encode_point(std::span<const FVec> x) const {
    check_point(x);
    std::uint64_t out = 0;
    for (std::size_t i = 0; i < arity(); ++i) out += encode_vector(p_, x[i]) * strides_[i];
    return out;
}

std::uint64_t Shape::merge(CoordSet s, std::uint64_t inside, std::uint64_t outside) const {
    // Walk coordinates from last to first, peeling digits off each sub-point.
    std::uint64_t out = 0;
    for (std::size_t i = arity(); i-- > 0;) {
        std::uint64_t& source = rankforge::contains(s, i) ? inside : outside;
        out += (source % block_sizes_[i]) * strides_[i];
        source /= block_sizes_[i];
    }
    return out;
}

std::uint64_t Shape::project(CoordSet s, std::uint64_t point) const {
    std::uint64_t out = 0;
    for (std::size_t i = 0; i < arity(); ++i) {
        if (rankforge::contains(s, i)) out = out * block_sizes_[i] + coordinate(point, i);
    }
    return out;
}

PointSet::PointSet(Shape shape) : shape_(std::move(shape)) {
    require_within(shape_.domain_size(), kTableGuard, "point set");
    members_.assign(shape_.domain_size(), 0);
}

PointSet::PointSet(Shape shape, std::vector<std::uint8_t> members)
    : shape_(std::move(shape)), members_(std::move(members)) {
    if (members_.size() != shape_.domain_size()) throw DimensionError("membership table size mismatch");
}

std::uint64_t PointSet::size() const {
    std::uint64_t n = 0;
    for (auto m : members_) n += m != 0;
    return n;
}

PointSet PointSet::complement() const {
    PointSet out(shape_);
    for (std::size_t i = 0; i < members_.size(); ++i) out.members_[i] = members_[i] ? 0 : 1;
    return out;
}

} // namespace rankforge
