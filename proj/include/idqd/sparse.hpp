#pragma once

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <span>
#include <thread>
#include <vector>

#include "common.hpp"

namespace idqd {

//---------------------------------------------------------------------------//
/*!
 * Compressed-row sparse matrix with sorted column indices per row.
 */
class CsrMatrix
{
  public:
    CsrMatrix() = default;

    CsrMatrix(std::size_t rows, std::size_t cols, std::vector<Index> row_ptr,
              std::vector<Index> col_idx)
        : rows_(rows),
          cols_(cols),
          row_ptr_(std::move(row_ptr)),
          col_(std::move(col_idx)),
          val_(col_.size(), 0.0)
    {
        if (row_ptr_.size() != rows_ + 1 || row_ptr_.back() != col_.size())
        {
            throw std::invalid_argument("inconsistent CSR row pointers");
        }
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return col_.size(); }

    std::span<Index const> row_ptr() const noexcept { return row_ptr_; }
    std::span<Index const> col_idx() const noexcept { return col_; }
    std::span<double const> values() const noexcept { return val_; }
    std::span<double> values() noexcept { return val_; }

    std::span<Index const> row_cols(Index i) const noexcept
    {
        return {col_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }
    std::span<double const> row_values(Index i) const noexcept
    {
        return {val_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }

    //! Position of (i, j) in the value array, or nnz() if not stored.
    std::size_t position(Index i, Index j) const noexcept
    {
        auto b = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
        auto e = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
        auto it = std::lower_bound(b, e, j);
        if (it == e || *it != j) return nnz();
        return static_cast<std::size_t>(it - col_.begin());
    }

    double at(Index i, Index j) const noexcept
    {
        auto p = position(i, j);
        return p == nnz() ? 0.0 : val_[p];
    }

    //! y = A x, rows split across threads (each row is summed by one thread).
    void multiply(std::span<double const> x, std::span<double> y, unsigned threads = 1) const
    {
        auto rows_range = [&](std::size_t r0, std::size_t r1) {
            for (std::size_t i = r0; i < r1; ++i)
            {
                double s = 0.0;
                for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += val_[p] * x[col_[p]];
                y[i] = s;
            }
        };
        if (threads <= 1 || rows_ < 4096)
        {
            rows_range(0, rows_);
            return;
        }
        std::vector<std::jthread> pool;
        std::size_t const chunk = (rows_ + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t)
        {
            std::size_t const r0 = std::min(rows_, t * chunk);
            std::size_t const r1 = std::min(rows_, r0 + chunk);
            pool.emplace_back(rows_range, r0, r1);
        }
    }

    std::vector<double> multiply(std::span<double const> x) const
    {
        std::vector<double> y(rows_);
        multiply(x, y);
        return y;
    }

    //! Row-major dense copy; meant for small test matrices.
    std::vector<double> to_dense() const
    {
        std::vector<double> d(rows_ * cols_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i)
            for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) d[i * cols_ + col_[p]] = val_[p];
        return d;
    }

    double max_abs() const noexcept
    {
        double m = 0.0;
        for (double v : val_) m = std::max(m, std::abs(v));
        return m;
    }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Index> row_ptr_{0};
    std::vector<Index> col_;
    std::vector<double> val_;
};

//! Build a CSR matrix from a dense row-major array, dropping exact zeros.
inline CsrMatrix csr_from_dense(std::size_t n, std::span<double const> dense)
{
    std::vector<Index> rp{0};
    std::vector<Index> ci;
    std::vector<double> v;
    for (std::size_t i = 0; i < n; ++i)
    {
        for (std::size_t j = 0; j < n; ++j)
        {
            if (dense[i * n + j] != 0.0)
            {
                ci.push_back(j);
                v.push_back(dense[i * n + j]);
            }
        }
        rp.push_back(ci.size());
    }
    CsrMatrix m(n, n, std::move(rp), std::move(ci));
    std::copy(v.begin(), v.end(), m.values().begin());
    return m;
}

//! Matrix Market coordinate (triplet) form, 1-based indices.
inline void write_matrix_market(std::ostream& os, CsrMatrix const& a, std::string const& comment = {})
{
    char buf[96];
    os << "%%MatrixMarket matrix coordinate real general\n";
    if (!comment.empty()) os << "% " << comment << "\n";
    os << a.rows() << " " << a.cols() << " " << a.nnz() << "\n";
    for (std::size_t i = 0; i < a.rows(); ++i)
    {
        auto cols = a.row_cols(i);
        auto vals = a.row_values(i);
        for (std::size_t p = 0; p < cols.size(); ++p)
        {
            std::snprintf(buf, sizeof buf, "%zu %zu %.17g\n", i + 1, cols[p] + 1, vals[p]);
            os << buf;
        }
    }
}

//! Matrix Market dense array form for a column vector.
inline void write_matrix_market(std::ostream& os, std::span<double const> v, std::string const& comment = {})
{
    char buf[48];
    os << "%%MatrixMarket matrix array real general\n";
    if (!comment.empty()) os << "% " << comment << "\n";
    os << v.size() << " 1\n";
    for (double x : v)
    {
        std::snprintf(buf, sizeof buf, "%.17g\n", x);
        os << buf;
    }
}

}  // namespace idqd
