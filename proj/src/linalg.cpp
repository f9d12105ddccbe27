#include "rankforge/linalg.hpp"

#include <string>
#include <utility>

#include "rankforge/errors.hpp"

namespace rankforge {

namespace {

struct ModArith {
    std::uint32_t p;
    Residue neg(Residue a) const { return a == 0 ? 0 : p - a; }
    Residue mul(Residue a, Residue b) const { return static_cast<Residue>(std::uint64_t{a} * b % p); }
    Residue sub(Residue a, Residue b) const { return a >= b ? a - b : a + p - b; }
    Residue inv(Residue a) const {
        std::int64_t t = 0, nt = 1, r = p, nr = a;
        while (nr != 0) {
            const std::int64_t q = r / nr;
            t = std::exchange(nt, t - q * nt);
            r = std::exchange(nr, r - q * nr);
        }
        return static_cast<Residue>(t < 0 ? t + p : t);
    }
};

} // namespace

Matrix::Matrix(std::uint32_t p, std::size_t rows, std::size_t cols)
    : p_(p), rows_(rows), cols_(cols), data_(rows * cols, 0) {}

Matrix Matrix::from_rows(std::uint32_t p, std::size_t cols, const std::vector<FVec>& rows) {
    Matrix m(p, rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) throw DimensionError("matrix row has wrong length");
        std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
    }
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(p_, cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

FVec Matrix::apply(std::span<const Residue> x) const {
    if (x.size() != cols_) throw DimensionError("matrix-vector size mismatch");
    FVec out(rows_, 0);
    for (std::size_t r = 0; r < rows_; ++r) {
        std::uint64_t acc = 0;
        for (std::size_t c = 0; c < cols_; ++c) acc += static_cast<std::uint64_t>((*this)(r, c)) * x[c] % p_;
        out[r] = static_cast<Residue>(acc % p_);
    }
    return out;
}

EchelonForm row_reduce(Matrix m) {
    const ModArith field{m.p()};
    EchelonForm out;
    std::size_t lead = 0;
    for (std::size_t c = 0; c < m.cols() && lead < m.rows(); ++c) {
        std::size_t pivot = lead;
        while (pivot < m.rows() && m(pivot, c) == 0) ++pivot;
        if (pivot == m.rows()) continue;
        if (pivot != lead) {
            for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(pivot, j), m(lead, j));
        }
        const Residue scale = field.inv(m(lead, c));
        for (std::size_t j = c; j < m.cols(); ++j) m(lead, j) = field.mul(m(lead, j), scale);
        for (std::size_t r = 0; r < m.rows(); ++r) {
            if (r == lead || m(r, c) == 0) continue;
            const Residue factor = m(r, c);
            for (std::size_t j = c; j < m.cols(); ++j) m(r, j) = field.sub(m(r, j), field.mul(factor, m(lead, j)));
        }
        out.pivot_columns.push_back(c);
        ++lead;
    }
    out.reduced = std::move(m);
    return out;
}

std::size_t matrix_rank(const Matrix& m) { return row_reduce(m).rank(); }

std::vector<FVec> kernel_basis(const Matrix& m) {
    const ModArith field{m.p()};
    const EchelonForm ech = row_reduce(m);
    std::vector<bool> is_pivot(m.cols(), false);
    for (auto c : ech.pivot_columns) is_pivot[c] = true;
    std::vector<FVec> basis;
    for (std::size_t free = 0; free < m.cols(); ++free) {
        if (is_pivot[free]) continue;
        FVec z(m.cols(), 0);
        z[free] = 1;
        for (std::size_t r = 0; r < ech.rank(); ++r) z[ech.pivot_columns[r]] = field.neg(ech.reduced(r, free));
        basis.push_back(std::move(z));
    }
    return basis;
}

std::optional<FVec> solve(const Matrix& m, std::span<const Residue> rhs) {
    if (rhs.size() != m.rows()) throw DimensionError("right-hand side has wrong length");
    Matrix augmented(m.p(), m.rows(), m.cols() + 1);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) augmented(r, c) = m(r, c);
        augmented(r, m.cols()) = rhs[r] % m.p();
    }
    const EchelonForm ech = row_reduce(std::move(augmented));
    if (!ech.pivot_columns.empty() && ech.pivot_columns.back() == m.cols()) return std::nullopt;
    FVec y(m.cols(), 0);
    for (std::size_t r = 0; r < ech.rank(); ++r) y[ech.pivot_columns[r]] = ech.reduced(r, m.cols());
    return y;
}

bool in_span(std::uint32_t p, const std::vector<FVec>& vectors, std::span<const Residue> v) {
    if (vectors.empty()) {
        for (Residue r : v) {
            if (r % p != 0) return false;
        }
        return true;
    }
    // columns of the system are the spanning vectors
    Matrix m(p, v.size(), vectors.size());
    for (std::size_t c = 0; c < vectors.size(); ++c) {
        if (vectors[c].size() != v.size()) throw DimensionError("span test with mismatched lengths");
        for (std::size_t r = 0; r < v.size(); ++r) m(r, c) = vectors[c][r];
    }
    return solve(m, v).has_value();
}

} // namespace rankforge
