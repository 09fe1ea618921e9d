// Dense complex linear algebra at the fixed small dimensions used by the
// qubit-qutrit model (2, 3, 6, 9, 18, 27).
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coexist/error.hpp"

namespace coexist {

using cplx = std::complex<double>;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-12;
inline constexpr double kImaginaryResidueTol = 1e-10;

/// Row-major dense complex matrix.
class ComplexMatrix {
public:
    ComplexMatrix() = default;

    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), entries_(rows * cols, cplx{0.0, 0.0}) {
        if (rows == 0 || cols == 0)
            throw Error(ErrorCode::DimensionMismatch, "matrix dimensions must be positive");
    }

    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
        : rows_(rows), cols_(cols), entries_(std::move(entries)) {
        if (rows == 0 || cols == 0)
            throw Error(ErrorCode::DimensionMismatch, "matrix dimensions must be positive");
        if (entries_.size() != rows * cols)
            throw Error(ErrorCode::DimensionMismatch,
                        "entries length " + std::to_string(entries_.size()) + " != " +
                            std::to_string(rows) + "x" + std::to_string(cols));
    }

    /// Square matrix from nested rows, e.g. {{1, 0}, {0, -1}}.
    ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        if (rows_ == 0 || cols_ == 0)
            throw Error(ErrorCode::DimensionMismatch, "matrix dimensions must be positive");
        entries_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_)
                throw Error(ErrorCode::DimensionMismatch, "ragged matrix literal");
            entries_.insert(entries_.end(), r.begin(), r.end());
        }
    }

    static ComplexMatrix identity(std::size_t dim) {
        ComplexMatrix m(dim, dim);
        for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }

    static ComplexMatrix diagonal(std::span<const cplx> diag) {
        ComplexMatrix m(diag.size(), diag.size());
        for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
        return m;
    }

    static ComplexMatrix diagonal(std::initializer_list<cplx> diag) {
        return diagonal(std::span<const cplx>(diag.begin(), diag.size()));
    }

    static ComplexMatrix column(std::span<const cplx> v) {
        return ComplexMatrix(v.size(), 1, std::vector<cplx>(v.begin(), v.end()));
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool is_square() const noexcept { return rows_ == cols_; }
    std::span<const cplx> entries() const noexcept { return entries_; }

    cplx& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

    ComplexMatrix adjoint() const {
        ComplexMatrix out(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
        return out;
    }

    double trace_real() const {
        double t = 0.0;
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i).real();
        return t;
    }

    cplx trace() const {
        cplx t{0.0, 0.0};
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
        return t;
    }

    ComplexMatrix& operator+=(const ComplexMatrix& o) {
        require_same_shape(o);
        for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += o.entries_[i];
        return *this;
    }
    ComplexMatrix& operator-=(const ComplexMatrix& o) {
        require_same_shape(o);
        for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] -= o.entries_[i];
        return *this;
    }
    ComplexMatrix& operator*=(cplx s) {
        for (auto& e : entries_) e *= s;
        return *this;
    }

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
    friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }
    friend ComplexMatrix operator-(ComplexMatrix a) { return a *= -1.0; }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.cols_ != b.rows_)
            throw Error(ErrorCode::DimensionMismatch, "matrix product: inner dimensions differ");
        ComplexMatrix out(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const cplx aik = a(i, k);
                if (aik == cplx{}) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
            }
        return out;
    }

    std::vector<cplx> apply(std::span<const cplx> v) const {
        if (v.size() != cols_)
            throw Error(ErrorCode::DimensionMismatch, "matrix-vector: dimension mismatch");
        std::vector<cplx> out(rows_, cplx{0.0, 0.0});
        for (std::size_t r = 0; r < rows_; ++r) {
            cplx acc{0.0, 0.0};
            for (std::size_t c = 0; c < cols_; ++c) acc += (*this)(r, c) * v[c];
            out[r] = acc;
        }
        return out;
    }

    bool operator==(const ComplexMatrix&) const = default;

private:
    void require_same_shape(const ComplexMatrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw Error(ErrorCode::DimensionMismatch, "matrix shapes differ");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> entries_;
};

/// Largest entrywise modulus of a - b.
inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw Error(ErrorCode::DimensionMismatch, "max_abs_diff: shapes differ");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.entries().size(); ++i)
        worst = std::max(worst, std::abs(a.entries()[i] - b.entries()[i]));
    return worst;
}

/// Kronecker product; `a` indexes the major block, `b` the minor one.
inline ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t ar = 0; ar < a.rows(); ++ar)
        for (std::size_t ac = 0; ac < a.cols(); ++ac) {
            const cplx s = a(ar, ac);
            for (std::size_t br = 0; br < b.rows(); ++br)
                for (std::size_t bc = 0; bc < b.cols(); ++bc)
                    out(ar * b.rows() + br, ac * b.cols() + bc) = s * b(br, bc);
        }
    return out;
}

inline bool is_hermitian(const ComplexMatrix& m, double tol = kHermitianTol) {
    if (!m.is_square()) return false;
    return max_abs_diff(m, m.adjoint()) <= tol;
}

inline bool is_unitary(const ComplexMatrix& m, double tol = kUnitaryTol) {
    if (!m.is_square()) return false;
    return max_abs_diff(m * m.adjoint(), ComplexMatrix::identity(m.rows())) <= tol;
}

inline double norm_squared(std::span<const cplx> v) {
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return s;
}

inline cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
    if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "inner: size mismatch");
    cplx s{0.0, 0.0};
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

/// Pure state of the qubit (Alice) x qutrit (Bob) system. Amplitude c_jk
/// sits at index 3j + k.
class JointState {
public:
    static constexpr std::size_t kDim = 6;
    static constexpr double kNormTol = 1e-9;

    JointState() : amps_{cplx{1.0, 0.0}} {}

    /// Throws NotNormalized unless the amplitudes have unit norm within 1e-9.
    explicit JointState(const std::array<cplx, kDim>& amps) : amps_(amps) {
        const double n2 = norm_squared(amps_);
        if (std::abs(n2 - 1.0) > kNormTol)
            throw Error(ErrorCode::NotNormalized,
                        "joint state norm^2 = " + std::to_string(n2));
    }

    static JointState from_vector(std::span<const cplx> v) {
        if (v.size() != kDim)
            throw Error(ErrorCode::DimensionMismatch, "joint state needs 6 amplitudes");
        std::array<cplx, kDim> a{};
        std::copy(v.begin(), v.end(), a.begin());
        return JointState(a);
    }

    /// Rescales arbitrary nonzero amplitudes onto the unit sphere.
    static JointState normalized(std::array<cplx, kDim> amps) {
        const double n = std::sqrt(norm_squared(amps));
        if (n == 0.0) throw Error(ErrorCode::NotNormalized, "zero vector");
        for (auto& a : amps) a /= n;
        return JointState(amps);
    }

    static JointState basis(std::size_t alice, std::size_t bob) {
        if (alice > 1 || bob > 2) throw Error(ErrorCode::IndexOutOfRange, "basis index");
        std::array<cplx, kDim> a{};
        a[3 * alice + bob] = 1.0;
        return JointState(a);
    }

    const cplx& amp(std::size_t alice, std::size_t bob) const { return amps_[3 * alice + bob]; }
    const std::array<cplx, kDim>& amplitudes() const noexcept { return amps_; }
    std::span<const cplx> span() const noexcept { return amps_; }

private:
    std::array<cplx, kDim> amps_;
};

/// <psi|op|psi> for Hermitian op; throws if op is not Hermitian or the
/// result carries an imaginary part above 1e-10.
inline double expectation(std::span<const cplx> psi, const ComplexMatrix& op) {
    if (!op.is_square() || op.rows() != psi.size())
        throw Error(ErrorCode::DimensionMismatch,
                    "expectation: operator " + std::to_string(op.rows()) + "x" +
                        std::to_string(op.cols()) + " vs state " + std::to_string(psi.size()));
    if (!is_hermitian(op)) throw Error(ErrorCode::NotHermitian, "expectation: operator not Hermitian");
    const auto opsi = op.apply(psi);
    const cplx v = inner(psi, opsi);
    if (std::abs(v.imag()) > kImaginaryResidueTol)
        throw Error(ErrorCode::ImaginaryResidue,
                    "expectation: imaginary residue " + std::to_string(v.imag()));
    return v.real();
}

inline double expectation(const JointState& psi, const ComplexMatrix& op) {
    return expectation(psi.span(), op);
}

}  // namespace coexist
