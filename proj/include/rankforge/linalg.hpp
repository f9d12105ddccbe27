#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rankforge/field.hpp"

namespace rankforge {

// Dense row-major matrix over F_p.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::uint32_t p, std::size_t rows, std::size_t cols);
    static Matrix from_rows(std::uint32_t p, std::size_t cols, const std::vector<FVec>& rows);

    std::uint32_t p() const noexcept { return p_; }
    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    Residue& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    Residue operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::span<const Residue> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<Residue> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

    Matrix transposed() const;
    FVec apply(std::span<const Residue> x) const;  // M x

    bool operator==(const Matrix&) const = default;

private:
    std::uint32_t p_ = 2;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Residue> data_;
};

// Reduced row echelon form. Pivot rows come first, each with leading entry 1.
struct EchelonForm {
    Matrix reduced;
    std::vector<std::size_t> pivot_columns;

    std::size_t rank() const noexcept { return pivot_columns.size(); }
};

EchelonForm row_reduce(Matrix m);
std::size_t matrix_rank(const Matrix& m);

// Basis of {z : M z = 0}, one vector per free column, in column order.
std::vector<FVec> kernel_basis(const Matrix& m);

// Some y with M y = rhs (free variables set to 0), or nullopt.
std::optional<FVec> solve(const Matrix& m, std::span<const Residue> rhs);

// Whether v lies in the span of the given vectors.
bool in_span(std::uint32_t p, const std::vector<FVec>& vectors, std::span<const Residue> v);

} // namespace rankforge
