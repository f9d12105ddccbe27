#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "rankforge/field.hpp"

namespace rankforge {

// Subset of the coordinate indices {0, ..., k-1}; bit i is coordinate i.
// Coordinates are 0-based in the API and 1-based in files and on the CLI.
using CoordSet = std::uint32_t;

constexpr bool contains(CoordSet s, std::size_t i) noexcept { return ((s >> i) & 1u) != 0; }
constexpr std::size_t set_size(CoordSet s) noexcept { return static_cast<std::size_t>(std::popcount(s)); }
constexpr CoordSet full_set(std::size_t k) noexcept { return k >= 32 ? ~CoordSet{0} : (CoordSet{1} << k) - 1; }

// Largest domain any full enumeration may walk.
inline constexpr std::uint64_t kEnumerationGuard = std::uint64_t{1} << 32;
// Largest number of entries in any materialized table.
inline constexpr std::uint64_t kTableGuard = std::uint64_t{1} << 27;
// Largest domain for graph traversal.
inline constexpr std::uint64_t kTraversalGuard = std::uint64_t{1} << 22;

// Throws ResourceError when needed > guard.
void require_within(std::uint64_t needed, std::uint64_t guard, std::string_view what);

// base^exp and a*b, throwing ResourceError on 64-bit overflow.
std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp);
std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b);

// Vectors of F_p^n are numbered in base p with entry 0 most significant, so
// index order is lexicographic order.
std::uint64_t encode_vector(std::uint32_t p, std::span<const Residue> v);
FVec decode_vector(std::uint32_t p, std::size_t n, std::uint64_t index);
std::uint64_t vector_add(std::uint32_t p, std::size_t n, std::uint64_t a, std::uint64_t b);
std::uint64_t vector_sub(std::uint32_t p, std::size_t n, std::uint64_t a, std::uint64_t b);

// The product G_1 x ... x G_k with G_i = F_p^{n_i}.
//
// Points are numbered row-major over (x_1, ..., x_k): x_1 varies slowest.
// The coordinate element x_i is itself numbered by encode_vector.
class Shape {
public:
    Shape() = default;
    // Arity zero is allowed only as the shape of a constant part.
    Shape(std::uint32_t p, std::vector<std::uint32_t> dims);

    std::uint32_t p() const noexcept { return p_; }
    std::size_t arity() const noexcept { return dims_.size(); }
    const std::vector<std::uint32_t>& dims() const noexcept { return dims_; }
    std::uint32_t dim(std::size_t i) const { return dims_.at(i); }
    CoordSet all() const noexcept { return full_set(arity()); }

    // |G_i|
    std::uint64_t block_size(std::size_t i) const { return block_sizes_.at(i); }
    // |G_[k]|; construction throws ResourceError if it overflows 64 bits.
    std::uint64_t domain_size() const noexcept { return domain_size_; }
    std::uint64_t stride(std::size_t i) const { return strides_.at(i); }

    // |G_S| for a subset of coordinates.
    std::uint64_t domain_size(CoordSet s) const;
    // Number of coefficients of a multilinear form on G_S.
    std::uint64_t monomial_count(CoordSet s) const;

    Shape restrict_to(CoordSet s) const;
    Shape with_appended(std::uint32_t n) const;

    std::uint64_t coordinate(std::uint64_t point, std::size_t i) const {
        return (point / strides_[i]) % block_sizes_[i];
    }
    std::uint64_t with_coordinate(std::uint64_t point, std::size_t i, std::uint64_t value) const {
        return point - coordinate(point, i) * strides_[i] + value * strides_[i];
    }
    std::vector<std::uint64_t> coordinates(std::uint64_t point) const;
    std::uint64_t point(std::span<const std::uint64_t> coords) const;

    std::vector<FVec> decode_point(std::uint64_t point) const;
    std::uint64_t encode_point(std::span<const FVec> x) const;
    // Throws DimensionError unless x has arity() entries of the right lengths.
    void check_point(std::span<const FVec> x) const;

    // Point of G_[k] built from a point of G_S and a point of G_{[k]\S}.
    std::uint64_t merge(CoordSet s, std::uint64_t inside, std::uint64_t outside) const;
    // Projection of a point onto G_S.
    std::uint64_t project(CoordSet s, std::uint64_t point) const;

    bool operator==(const Shape& other) const noexcept { return p_ == other.p_ && dims_ == other.dims_; }

private:
    std::uint32_t p_ = 2;
    std::vector<std::uint32_t> dims_;
    std::vector<std::uint64_t> block_sizes_;
    std::vector<std::uint64_t> strides_;
    std::uint64_t domain_size_ = 1;
};

// A subset of G_[k] stored as a membership byte per point.
class PointSet {
public:
    PointSet() = default;
    explicit PointSet(Shape shape);
    PointSet(Shape shape, std::vector<std::uint8_t> members);

    const Shape& shape() const noexcept { return shape_; }
    bool contains(std::uint64_t point) const { return members_[point] != 0; }
    void insert(std::uint64_t point) { members_[point] = 1; }
    void erase(std::uint64_t point) { members_[point] = 0; }
    std::uint64_t size() const;
    bool empty() const { return size() == 0; }
    std::span<const std::uint8_t> members() const noexcept { return members_; }
    PointSet complement() const;

private:
    Shape shape_;
    std::vector<std::uint8_t> members_;
};

} // namespace rankforge
