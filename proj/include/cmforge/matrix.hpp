#pragma once

#include "cmforge/arith.hpp"

#include <initializer_list>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace cmforge {

template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows_(r), cols_(c), a_(r * c, T(0)) {}
    Matrix(std::size_t r, std::size_t c, std::vector<T> entries) : rows_(r), cols_(c), a_(std::move(entries)) {
        if (a_.size() != r * c) throw PreconditionError("matrix entry count does not match shape");
    }
    Matrix(std::initializer_list<std::initializer_list<long long>> init) {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        for (const auto& row : init) {
            if (row.size() != cols_) throw PreconditionError("ragged matrix literal");
            for (long long v : row) a_.push_back(T(v));
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }
    static Matrix from_rows(const std::vector<std::vector<T>>& rows, std::size_t cols_if_empty = 0) {
        Matrix m(rows.size(), rows.empty() ? cols_if_empty : rows[0].size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_) throw PreconditionError("ragged matrix rows");
            for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
        }
        return m;
    }
    static Matrix column(const std::vector<T>& v) {
        Matrix m(v.size(), 1);
        for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
        return m;
    }
    static Matrix row_vector(const std::vector<T>& v) {
        Matrix m(1, v.size());
        for (std::size_t i = 0; i < v.size(); ++i) m(0, i) = v[i];
        return m;
    }
    static Matrix diagonal(const std::vector<T>& d) {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    T& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    std::vector<T> row(std::size_t i) const {
        return std::vector<T>(a_.begin() + i * cols_, a_.begin() + (i + 1) * cols_);
    }
    std::vector<T> col(std::size_t j) const {
        std::vector<T> v(rows_);
        for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
        return v;
    }
    void set_row(std::size_t i, const std::vector<T>& v) {
        for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) = v[j];
    }
    std::vector<std::vector<T>> to_rows() const {
        std::vector<std::vector<T>> out;
        for (std::size_t i = 0; i < rows_; ++i) out.push_back(row(i));
        return out;
    }

    void swap_rows(std::size_t i, std::size_t k) {
        if (i == k) return;
        for (std::size_t j = 0; j < cols_; ++j) std::swap((*this)(i, j), (*this)(k, j));
    }
    void swap_cols(std::size_t j, std::size_t k) {
        if (j == k) return;
        for (std::size_t i = 0; i < rows_; ++i) std::swap((*this)(i, j), (*this)(i, k));
    }
    // row_i += q * row_k
    void add_row(std::size_t i, std::size_t k, const T& q) {
        if (q == 0) return;
        for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) += q * (*this)(k, j);
    }
    void add_col(std::size_t j, std::size_t k, const T& q) {
        if (q == 0) return;
        for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) += q * (*this)(i, k);
    }
    void negate_row(std::size_t i) {
        for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) = -(*this)(i, j);
    }
    void negate_col(std::size_t j) {
        for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = -(*this)(i, j);
    }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
        Matrix b(nr, nc);
        for (std::size_t i = 0; i < nr; ++i)
            for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
        return b;
    }

    bool is_zero() const {
        for (const auto& x : a_)
            if (x != 0) return false;
        return true;
    }
    bool is_square() const { return rows_ == cols_; }
    bool is_identity() const { return is_square() && *this == identity(rows_); }

    friend bool operator==(const Matrix& x, const Matrix& y) {
        return x.rows_ == y.rows_ && x.cols_ == y.cols_ && x.a_ == y.a_;
    }
    friend bool operator!=(const Matrix& x, const Matrix& y) { return !(x == y); }

    friend Matrix operator+(const Matrix& x, const Matrix& y) {
        check_same(x, y);
        Matrix r = x;
        for (std::size_t k = 0; k < r.a_.size(); ++k) r.a_[k] += y.a_[k];
        return r;
    }
    friend Matrix operator-(const Matrix& x, const Matrix& y) {
        check_same(x, y);
        Matrix r = x;
        for (std::size_t k = 0; k < r.a_.size(); ++k) r.a_[k] -= y.a_[k];
        return r;
    }
    friend Matrix operator-(const Matrix& x) {
        Matrix r = x;
        for (auto& v : r.a_) v = -v;
        return r;
    }
    friend Matrix operator*(const Matrix& x, const Matrix& y) {
        if (x.cols_ != y.rows_) throw PreconditionError("matrix product shape mismatch");
        Matrix r(x.rows_, y.cols_);
        for (std::size_t i = 0; i < x.rows_; ++i)
            for (std::size_t k = 0; k < x.cols_; ++k) {
                const T& xik = x(i, k);
                if (xik == 0) continue;
                for (std::size_t j = 0; j < y.cols_; ++j) r(i, j) += xik * y(k, j);
            }
        return r;
    }
    friend Matrix operator*(const T& s, const Matrix& x) {
        Matrix r = x;
        for (auto& v : r.a_) v *= s;
        return r;
    }
    std::vector<T> apply(const std::vector<T>& v) const {
        if (v.size() != cols_) throw PreconditionError("matrix-vector shape mismatch");
        std::vector<T> r(rows_, T(0));
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r[i] += (*this)(i, j) * v[j];
        return r;
    }
    // row vector times matrix
    std::vector<T> left_apply(const std::vector<T>& v) const {
        if (v.size() != rows_) throw PreconditionError("vector-matrix shape mismatch");
        std::vector<T> r(cols_, T(0));
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r[j] += v[i] * (*this)(i, j);
        return r;
    }

    std::string to_string() const {
        std::ostringstream os;
        os << "[";
        for (std::size_t i = 0; i < rows_; ++i) {
            os << (i ? ",[" : "[");
            for (std::size_t j = 0; j < cols_; ++j) os << (j ? "," : "") << cmforge::to_string((*this)(i, j));
            os << "]";
        }
        os << "]";
        return os.str();
    }

private:
    static void check_same(const Matrix& x, const Matrix& y) {
        if (x.rows_ != y.rows_ || x.cols_ != y.cols_) throw PreconditionError("matrix shape mismatch");
    }
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<T> a_;
};

using IntMatrix = Matrix<Int>;
using RatMatrix = Matrix<Rat>;

template <class T>
Matrix<T> vstack(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.rows() == 0) return b;
    if (b.rows() == 0) return a;
    if (a.cols() != b.cols()) throw PreconditionError("vstack column mismatch");
    Matrix<T> r(a.rows() + b.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) r.set_row(i, a.row(i));
    for (std::size_t i = 0; i < b.rows(); ++i) r.set_row(a.rows() + i, b.row(i));
    return r;
}

template <class T>
Matrix<T> hstack(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.rows() != b.rows()) throw PreconditionError("hstack row mismatch");
    Matrix<T> r(a.rows(), a.cols() + b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = a(i, j);
        for (std::size_t j = 0; j < b.cols(); ++j) r(i, a.cols() + j) = b(i, j);
    }
    return r;
}

template <class T>
Matrix<T> block_diag(const std::vector<Matrix<T>>& blocks) {
    std::size_t R = 0, C = 0;
    for (const auto& b : blocks) {
        R += b.rows();
        C += b.cols();
    }
    Matrix<T> r(R, C);
    std::size_t r0 = 0, c0 = 0;
    for (const auto& b : blocks) {
        for (std::size_t i = 0; i < b.rows(); ++i)
            for (std::size_t j = 0; j < b.cols(); ++j) r(r0 + i, c0 + j) = b(i, j);
        r0 += b.rows();
        c0 += b.cols();
    }
    return r;
}

inline RatMatrix to_rat(const IntMatrix& m) {
    RatMatrix r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = Rat(m(i, j));
    return r;
}

inline bool is_integral(const RatMatrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (!is_integral(m(i, j))) return false;
    return true;
}

inline IntMatrix to_int(const RatMatrix& m) {
    IntMatrix r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (!is_integral(m(i, j))) throw InvariantError("matrix entry is not integral: " + to_string(m(i, j)));
            r(i, j) = num(m(i, j));
        }
    return r;
}

// Smallest positive d with d*m integral.
inline Int common_denominator(const RatMatrix& m) {
    Int d = 1;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) d = lcm_int(d, den(m(i, j)));
    return d;
}

}  // namespace cmforge
