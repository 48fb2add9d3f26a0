#include "cmforge/lattice.hpp"

#include <algorithm>
#include <sstream>

namespace cmforge {

namespace {

// Smallest |entry| among nonzero entries of M[t.., t..]; ties broken row-major.
bool find_pivot(const IntMatrix& D, std::size_t t, std::size_t& pi, std::size_t& pj) {
    bool found = false;
    Int best;
    for (std::size_t i = t; i < D.rows(); ++i)
        for (std::size_t j = t; j < D.cols(); ++j) {
            if (D(i, j) == 0) continue;
            Int a = abs_int(D(i, j));
            if (!found || a < best) {
                best = a;
                pi = i;
                pj = j;
                found = true;
            }
        }
    return found;
}

}  // namespace

SNFResult smith_normal_form(const IntMatrix& M) {
    const std::size_t r = M.rows(), c = M.cols();
    IntMatrix D = M, U = IntMatrix::identity(r), V = IntMatrix::identity(c);
    const std::size_t n = std::min(r, c);
    for (std::size_t t = 0; t < n; ++t) {
        std::size_t pi = 0, pj = 0;
        if (!find_pivot(D, t, pi, pj)) break;
        for (;;) {
            D.swap_rows(t, pi);
            U.swap_rows(t, pi);
            D.swap_cols(t, pj);
            V.swap_cols(t, pj);
            bool clean = true;
            for (std::size_t i = t + 1; i < r; ++i) {
                if (D(i, t) == 0) continue;
                Int q = D(i, t) / D(t, t);
                D.add_row(i, t, -q);
                U.add_row(i, t, -q);
                if (D(i, t) != 0) clean = false;
            }
            for (std::size_t j = t + 1; j < c; ++j) {
                if (D(t, j) == 0) continue;
                Int q = D(t, j) / D(t, t);
                D.add_col(j, t, -q);
                V.add_col(j, t, -q);
                if (D(t, j) != 0) clean = false;
            }
            if (clean) {
                // pivot must divide the remaining block
                bool divides = true;
                for (std::size_t i = t + 1; i < r && divides; ++i)
                    for (std::size_t j = t + 1; j < c; ++j)
                        if (D(i, j) % D(t, t) != 0) {
                            D.add_row(t, i, Int(1));
                            U.add_row(t, i, Int(1));
                            divides = false;
                            break;
                        }
                if (divides) break;
            }
            find_pivot(D, t, pi, pj);
        }
        if (D(t, t) < 0) {
            D.negate_row(t);
            U.negate_row(t);
        }
    }
    return {U, D, V};
}

HNFResult hermite_normal_form(const IntMatrix& M) {
    const std::size_t r = M.rows(), c = M.cols();
    IntMatrix H = M, U = IntMatrix::identity(r);
    std::size_t piv = 0;
    for (std::size_t j = 0; j < c && piv < r; ++j) {
        for (;;) {
            std::size_t best = r;
            for (std::size_t i = piv; i < r; ++i)
                if (H(i, j) != 0 && (best == r || abs_int(H(i, j)) < abs_int(H(best, j)))) best = i;
            if (best == r) break;
            H.swap_rows(piv, best);
            U.swap_rows(piv, best);
            bool done = true;
            for (std::size_t i = piv + 1; i < r; ++i) {
                if (H(i, j) == 0) continue;
                Int q = H(i, j) / H(piv, j);
                H.add_row(i, piv, -q);
                U.add_row(i, piv, -q);
                if (H(i, j) != 0) done = false;
            }
            if (done) break;
        }
        if (H(piv, j) == 0) continue;
        if (H(piv, j) < 0) {
            H.negate_row(piv);
            U.negate_row(piv);
        }
        for (std::size_t i = 0; i < piv; ++i) {
            Int q = floor_div(H(i, j), H(piv, j));
            H.add_row(i, piv, -q);
            U.add_row(i, piv, -q);
        }
        ++piv;
    }
    return {H, U, piv};
}

std::size_t FGAbelianGroup::free_rank() const {
    return static_cast<std::size_t>(std::count(invariant_factors.begin(), invariant_factors.end(), Int(0)));
}

std::vector<Int> FGAbelianGroup::torsion() const {
    std::vector<Int> t;
    for (const auto& d : invariant_factors)
        if (d != 0) t.push_back(d);
    return t;
}

std::string FGAbelianGroup::to_string() const {
    if (trivial()) return "0";
    std::ostringstream os;
    for (std::size_t i = 0; i < invariant_factors.size(); ++i) {
        if (i) os << " x ";
        if (invariant_factors[i] == 0)
            os << "Z";
        else
            os << "Z/" << invariant_factors[i].str();
    }
    return os.str();
}

FGAbelianGroup cokernel(const IntMatrix& M) {
    FGAbelianGroup g;
    auto snf = smith_normal_form(M);
    const std::size_t k = std::min(M.rows(), M.cols());
    std::vector<Int> zeros;
    for (std::size_t i = 0; i < M.cols(); ++i) {
        Int d = i < k ? abs_int(snf.D(i, i)) : Int(0);
        if (d == 1) continue;
        if (d == 0)
            zeros.push_back(0);
        else
            g.invariant_factors.push_back(d);
    }
    g.invariant_factors.insert(g.invariant_factors.end(), zeros.begin(), zeros.end());
    return g;
}

IntMatrix row_basis(const IntMatrix& M) {
    auto h = hermite_normal_form(M);
    return h.H.block(0, 0, h.rank, M.cols());
}

IntMatrix kernel_lattice(const IntMatrix& M) {
    auto h = hermite_normal_form(M);
    IntMatrix K = h.U.block(h.rank, 0, M.rows() - h.rank, M.rows());
    return row_basis(K);
}

IntMatrix lattice_intersection(const IntMatrix& A, const IntMatrix& B) {
    if (A.cols() != B.cols()) throw PreconditionError("lattice_intersection: ambient rank mismatch");
    const std::size_t n = A.cols();
    if (A.rows() == 0 || B.rows() == 0) return IntMatrix(0, n);
    IntMatrix S = vstack(A, B);
    IntMatrix K = kernel_lattice(S);
    IntMatrix Y = K.block(0, 0, K.rows(), A.rows());
    return row_basis(Y * A);
}

IntMatrix solution_sublattice(const std::vector<IntMatrix>& conditions, std::size_t ambient_rank) {
    IntMatrix stacked(0, ambient_rank);
    for (const auto& O : conditions) {
        if (O.cols() != ambient_rank) throw PreconditionError("solution_sublattice: operator does not act on the ambient lattice");
        stacked = vstack(stacked, O);
    }
    if (stacked.rows() == 0) return IntMatrix::identity(ambient_rank);
    return kernel_lattice(stacked.transpose());
}

std::size_t matrix_rank(const IntMatrix& M) { return hermite_normal_form(M).rank; }

Int determinant(const IntMatrix& M) {
    if (!M.is_square()) throw PreconditionError("determinant of non-square matrix");
    const std::size_t n = M.rows();
    if (n == 0) return 1;
    IntMatrix A = M;
    Int sign = 1, prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (A(k, k) == 0) {
            std::size_t s = k + 1;
            while (s < n && A(s, k) == 0) ++s;
            if (s == n) return 0;
            A.swap_rows(k, s);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j) A(i, j) = (A(i, j) * A(k, k) - A(i, k) * A(k, j)) / prev;
        prev = A(k, k);
    }
    return sign * A(n - 1, n - 1);
}

Rat determinant(const RatMatrix& M) {
    if (!M.is_square()) throw PreconditionError("determinant of non-square matrix");
    RatMatrix A = M;
    const std::size_t n = A.rows();
    Rat det = 1;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        while (p < n && A(p, k) == 0) ++p;
        if (p == n) return 0;
        if (p != k) {
            A.swap_rows(p, k);
            det = -det;
        }
        det *= A(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            if (A(i, k) == 0) continue;
            Rat f = A(i, k) / A(k, k);
            A.add_row(i, k, -f);
        }
    }
    return det;
}

bool is_unimodular(const IntMatrix& M) { return M.is_square() && abs_int(determinant(M)) == 1; }

bool is_saturated(const IntMatrix& rows) { return cokernel(rows).torsion_free(); }

std::optional<std::vector<Int>> lattice_coordinates(const IntMatrix& basis, const std::vector<Int>& v) {
    if (v.size() != basis.cols()) throw PreconditionError("lattice_coordinates: dimension mismatch");
    auto h = hermite_normal_form(basis);
    std::vector<Int> w = v;
    std::vector<Int> d(h.rank, 0);
    std::size_t col = 0;
    for (std::size_t k = 0; k < h.rank; ++k) {
        while (h.H(k, col) == 0) ++col;
        if (w[col] % h.H(k, col) != 0) return std::nullopt;
        d[k] = w[col] / h.H(k, col);
        for (std::size_t j = 0; j < w.size(); ++j) w[j] -= d[k] * h.H(k, j);
    }
    for (const auto& x : w)
        if (x != 0) return std::nullopt;
    std::vector<Int> c(basis.rows(), 0);
    for (std::size_t k = 0; k < h.rank; ++k)
        for (std::size_t i = 0; i < basis.rows(); ++i) c[i] += d[k] * h.U(k, i);
    return c;
}

namespace {

// In-place RREF; returns pivot columns.
std::vector<std::size_t> rref(RatMatrix& A, std::size_t ncols) {
    std::vector<std::size_t> piv;
    std::size_t r = 0;
    for (std::size_t j = 0; j < ncols && r < A.rows(); ++j) {
        std::size_t p = r;
        while (p < A.rows() && A(p, j) == 0) ++p;
        if (p == A.rows()) continue;
        A.swap_rows(p, r);
        Rat inv = Rat(1) / A(r, j);
        for (std::size_t k = 0; k < A.cols(); ++k) A(r, k) *= inv;
        for (std::size_t i = 0; i < A.rows(); ++i)
            if (i != r && A(i, j) != 0) A.add_row(i, r, -A(i, j));
        piv.push_back(j);
        ++r;
    }
    return piv;
}

}  // namespace

RatSolution solve_rational(const RatMatrix& A, const std::vector<Rat>& b) {
    if (b.size() != A.rows()) throw PreconditionError("solve_rational: shape mismatch");
    const std::size_t n = A.cols();
    RatMatrix Aug = hstack(A, RatMatrix::column(b));
    auto piv = rref(Aug, n);
    RatSolution s;
    for (std::size_t i = piv.size(); i < Aug.rows(); ++i)
        if (Aug(i, n) != 0) return s;
    s.consistent = true;
    s.particular.assign(n, Rat(0));
    for (std::size_t k = 0; k < piv.size(); ++k) s.particular[piv[k]] = Aug(k, n);
    std::vector<bool> is_piv(n, false);
    for (auto p : piv) is_piv[p] = true;
    for (std::size_t f = 0; f < n; ++f) {
        if (is_piv[f]) continue;
        std::vector<Rat> v(n, Rat(0));
        v[f] = 1;
        for (std::size_t k = 0; k < piv.size(); ++k) v[piv[k]] = -Aug(k, f);
        s.nullspace.push_back(v);
    }
    return s;
}

std::optional<RatMatrix> solve_unique(const RatMatrix& A, const RatMatrix& B) {
    if (A.rows() != B.rows()) throw PreconditionError("solve_unique: shape mismatch");
    const std::size_t n = A.cols();
    RatMatrix Aug = hstack(A, B);
    auto piv = rref(Aug, n);
    if (piv.size() < n) throw InvariantError("solve_unique: solution is not unique");
    for (std::size_t i = n; i < Aug.rows(); ++i)
        for (std::size_t j = n; j < Aug.cols(); ++j)
            if (Aug(i, j) != 0) return std::nullopt;
    return Aug.block(0, n, n, B.cols());
}

std::optional<RatMatrix> inverse(const RatMatrix& M) {
    if (!M.is_square()) throw PreconditionError("inverse of non-square matrix");
    const std::size_t n = M.rows();
    RatMatrix Aug = hstack(M, RatMatrix::identity(n));
    auto piv = rref(Aug, n);
    if (piv.size() < n) return std::nullopt;
    return Aug.block(0, n, n, n);
}

IntMatrix inverse_unimodular(const IntMatrix& M) {
    auto inv = inverse(to_rat(M));
    if (!inv) throw PreconditionError("matrix is singular");
    return to_int(*inv);
}

IntMatrix right_inverse(const IntMatrix& P) {
    auto snf = smith_normal_form(P);
    const std::size_t k = P.rows();
    if (P.cols() < k) throw PreconditionError("right_inverse: map cannot be surjective");
    for (std::size_t i = 0; i < k; ++i)
        if (snf.D(i, i) != 1) throw PreconditionError("right_inverse: map is not surjective onto the integer lattice");
    IntMatrix Dt(P.cols(), k);
    for (std::size_t i = 0; i < k; ++i) Dt(i, i) = 1;
    return snf.V * Dt * snf.U;
}

Int content(const std::vector<Int>& v) {
    Int g = 0;
    for (const auto& x : v) g = gcd_int(g, x);
    return g;
}

}  // namespace cmforge
