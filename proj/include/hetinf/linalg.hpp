#ifndef HETINF_LINALG_HPP
#define HETINF_LINALG_HPP

#include <functional>
#include <vector>

#include "hetinf/error.hpp"

namespace hetinf {

/// Dense row-major matrix.  Sized for collocation borders, monodromy blocks
/// and similar small systems; nothing here is blocked or tiled.
struct Matrix {
    int rows = 0, cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

double norm_inf(const Matrix& m);  // max absolute row sum

/// LU factorization with partial pivoting.  A pivot below
/// 1e-14 * |A|_inf is reported as Singular.
class LuFactor {
  public:
    explicit LuFactor(Matrix A);

    void solve_inplace(std::vector<double>& b) const;          // single rhs
    std::vector<double> solve(std::vector<double> b) const;
    void solve_cols(Matrix& B) const;                          // rhs per column

    int n() const { return lu_.rows; }

  private:
    Matrix lu_;
    std::vector<int> piv_;
};

std::vector<double> lu_solve(const Matrix& A, std::vector<double> b);

/// Banded matrix in LAPACK-style storage with kl extra super-diagonal rows
/// reserved for pivoting fill.  Entry (i, j) is representable when
/// -kl <= j - i <= ku + kl.
class BandMatrix {
  public:
    BandMatrix() = default;
    BandMatrix(int n, int kl, int ku);

    void clear();
    double& at(int i, int j);          // must be inside the widened band
    void add(int i, int j, double v) { at(i, j) += v; }

    int n() const { return n_; }
    int kl() const { return kl_; }
    int ku() const { return ku_; }

    /// y += A*x using only the declared (unwidened) band.
    void accumulate_matvec(const double* x, double* y) const;

  private:
    friend class BandLU;
    int n_ = 0, kl_ = 0, ku_ = 0, stride_ = 0;
    std::vector<double> ab_;  // (2*kl + ku + 1) x n, row-compressed diagonals
};

/// In-place banded LU with row partial pivoting (the textbook band variant of
/// Gaussian elimination).  Same singularity threshold as the dense path.
class BandLU {
  public:
    explicit BandLU(BandMatrix A);
    void solve_inplace(double* b) const;

  private:
    BandMatrix m_;
    std::vector<int> piv_;
};

/// Bordered solve helper:
///   [A B] [x]   [f]
///   [C D] [y] = [g]
/// by block elimination on a prefactored core A.  Used by the collocation
/// engine; exposed for the unit tests.
struct BorderedCore {
    const BandLU* lu;     // factorization of A
    const Matrix* B;      // n x p
    const Matrix* C;      // p x n
    const Matrix* D;      // p x p
};
void bordered_solve(const BorderedCore& sys, std::vector<double>& f, std::vector<double>& g);

/// Damped Newton on a small dense system.  Residual measured in the max norm;
/// each rejected step halves the damping down to 1/64.
struct NewtonOptions {
    double tol = 1e-10;
    int max_iter = 15;
    double min_damping = 1.0 / 64.0;
};
struct NewtonResult {
    bool converged = false;
    int iterations = 0;
    std::vector<double> residual_history;
};
NewtonResult newton_dense(const std::function<std::vector<double>(const std::vector<double>&)>& F,
                          const std::function<Matrix(const std::vector<double>&)>& J,
                          std::vector<double>& x, const NewtonOptions& opt = {});

}  // namespace hetinf

#endif
