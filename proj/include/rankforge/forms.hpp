#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "rankforge/field.hpp"
#include "rankforge/linalg.hpp"
#include "rankforge/shape.hpp"

namespace rankforge {

// A multilinear map G_1 x ... x G_k -> F_p^m stored as a dense coefficient
// tensor, row-major over (j_1, ..., j_k, out):
//
//   value(x)_out = sum_j coeff(j, out) * x_1[j_1] * ... * x_k[j_k]
//
// A map with target_dim() == 1 is a multilinear form.
class MultilinearMap {
public:
    MultilinearMap() = default;
    MultilinearMap(Shape shape, std::uint32_t target_dim);
    MultilinearMap(Shape shape, std::uint32_t target_dim, std::vector<Residue> coeffs);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t arity() const noexcept { return shape_.arity(); }
    std::uint32_t p() const noexcept { return shape_.p(); }
    std::uint32_t target_dim() const noexcept { return target_dim_; }
    bool is_form() const noexcept { return target_dim_ == 1; }

    std::span<const Residue> coeffs() const noexcept { return coeffs_; }
    std::size_t flat_index(std::span<const std::uint32_t> index, std::uint32_t out = 0) const;
    Residue coeff(std::span<const std::uint32_t> index, std::uint32_t out = 0) const {
        return coeffs_[flat_index(index, out)];
    }
    void set_coeff(std::span<const std::uint32_t> index, std::uint32_t out, Residue value);
    Residue coeff_at(std::size_t flat) const { return coeffs_.at(flat); }
    void set_coeff_at(std::size_t flat, Residue value);

    bool is_zero() const noexcept;

    FVec evaluate(std::span<const FVec> x) const;
    // Scalar value of a form; throws DimensionError for target_dim() != 1.
    Residue evaluate_form(std::span<const FVec> x) const;

    MultilinearMap component(std::uint32_t out) const;
    MultilinearMap scaled(Residue c) const;
    MultilinearMap operator+(const MultilinearMap& other) const;
    MultilinearMap operator-(const MultilinearMap& other) const;

    bool operator==(const MultilinearMap& other) const = default;

private:
    Shape shape_;
    std::uint32_t target_dim_ = 1;
    std::vector<Residue> coeffs_;
};

using MultilinearForm = MultilinearMap;

// A multiaffine map, value(x) = sum over I subset [k] of part_I(x_I).
//
// Stored homogenized: a multilinear tensor over extents (n_1+1, ..., n_k+1, m)
// evaluated at (x_1, 1), ..., (x_k, 1). The part on I is the block with
// index j_i < n_i for i in I and j_i = n_i for i outside I, which makes the
// decomposition into parts unique.
class MultiaffineMap {
public:
    MultiaffineMap() = default;
    MultiaffineMap(Shape shape, std::uint32_t target_dim);

    static MultiaffineMap from_multilinear(const MultilinearMap& f);
    static MultiaffineMap constant(Shape shape, const FVec& value);
    // The map x -> part(x_S); part lives on shape.restrict_to(s).
    static MultiaffineMap embed(Shape shape, CoordSet s, const MultilinearMap& part);
    // Coefficients over extents (n_1+1, ..., n_k+1, m), row-major.
    static MultiaffineMap from_homogenized(Shape shape, std::uint32_t target_dim, std::vector<Residue> coeffs);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t arity() const noexcept { return shape_.arity(); }
    std::uint32_t p() const noexcept { return shape_.p(); }
    std::uint32_t target_dim() const noexcept { return target_dim_; }
    bool is_form() const noexcept { return target_dim_ == 1; }

    MultilinearMap part(CoordSet s) const;
    void set_part(CoordSet s, const MultilinearMap& part);
    MultilinearMap top_part() const { return part(shape_.all()); }

    bool is_zero() const noexcept;
    bool is_multilinear() const noexcept;
    // True when every nonzero part contains coordinate `coord`.
    bool is_linear_in(std::size_t coord) const noexcept;

    FVec evaluate(std::span<const FVec> x) const;
    Residue evaluate_form(std::span<const FVec> x) const;

    MultiaffineMap component(std::uint32_t out) const;
    // x -> h * value(x); h must have target_dim() columns.
    MultiaffineMap linear_image(const Matrix& h) const;
    MultiaffineMap scaled(Residue c) const;
    MultiaffineMap operator+(const MultiaffineMap& other) const;
    MultiaffineMap operator-(const MultiaffineMap& other) const;

    std::span<const Residue> homogenized() const noexcept { return coeffs_; }

    bool operator==(const MultiaffineMap& other) const = default;

private:
    std::size_t homogenized_index(CoordSet s, std::span<const std::uint32_t> part_index, std::uint32_t out) const;

    Shape shape_;
    std::uint32_t target_dim_ = 1;
    std::vector<Residue> coeffs_;
};

// A multilinear form on G_S for a subset S of the coordinates; the form
// lives on shape.restrict_to(subset).
struct IndexedForm {
    CoordSet subset = 0;
    MultilinearMap form;
};

// A: G_[k-1] -> G_k with alpha(x) = A(x_[k-1]) . x_k. Throws ArityError for k = 1.
MultilinearMap curry_last(const MultilinearMap& alpha);

// Partial evaluation at the coordinates in `fixed`; `values` lists x_i for
// i in `fixed` in increasing coordinate order. Throws PreconditionError if
// `fixed` is every coordinate.
MultilinearMap slice(const MultilinearMap& f, CoordSet fixed, std::span<const FVec> values);
MultiaffineMap slice(const MultiaffineMap& f, CoordSet fixed, std::span<const FVec> values);

// Nonzero multilinear parts, keyed by subset.
std::map<CoordSet, MultilinearMap> multilinear_parts(const MultiaffineMap& f);
MultiaffineMap rebuild(const Shape& shape, std::uint32_t target_dim, const std::map<CoordSet, MultilinearMap>& parts);

// Coefficients i.i.d. uniform over F_p, drawn in flat order from Rng(seed).
MultilinearMap random_multilinear(const Shape& shape, std::uint32_t target_dim, std::uint64_t seed);
MultiaffineMap random_multiaffine(const Shape& shape, std::uint32_t target_dim, std::uint64_t seed);

// Values at every point of G_[k], point-major with target_dim entries per
// point. Rows with different x_1 are computed on separate workers.
std::vector<Residue> value_table(const MultilinearMap& f);
std::vector<Residue> value_table(const MultiaffineMap& f);

// Calls visit(lane, first_point, values) for consecutive runs of points in
// index order within each lane; lane is the index of x_1 and distinct lanes
// may run concurrently on different workers.
using ValueRunVisitor = std::function<void(std::uint64_t lane, std::uint64_t first_point, std::span<const Residue> values)>;
void for_each_value_run(const MultiaffineMap& f, const ValueRunVisitor& visit);

// Points where every output coordinate vanishes.
PointSet zero_set(const MultiaffineMap& f);
PointSet zero_set(const MultilinearMap& f);

} // namespace rankforge
