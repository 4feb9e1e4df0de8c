#include "hetinf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hetinf {

double norm_inf(const Matrix& m) {
    double best = 0.0;
    for (int i = 0; i < m.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < m.cols; ++j) s += std::fabs(m(i, j));
        best = std::max(best, s);
    }
    return best;
}

LuFactor::LuFactor(Matrix A) : lu_(std::move(A)), piv_(lu_.rows) {
    if (lu_.rows != lu_.cols)
        throw Error(Errc::Singular, "lu_factor needs a square matrix");
    const int n = lu_.rows;
    const double tiny = 1e-14 * std::max(norm_inf(lu_), 1e-300);
    for (int k = 0; k < n; ++k) {
        int ip = k;
        double best = std::fabs(lu_(k, k));
        for (int i = k + 1; i < n; ++i) {
            const double v = std::fabs(lu_(i, k));
            if (v > best) { best = v; ip = i; }
        }
        if (best < tiny)
            throw Error(Errc::Singular, "pivot below threshold at column " + std::to_string(k));
        piv_[k] = ip;
        if (ip != k)
            for (int j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(ip, j));
        const double d = 1.0 / lu_(k, k);
        for (int i = k + 1; i < n; ++i) {
            const double m = lu_(i, k) * d;
            lu_(i, k) = m;
            if (m != 0.0)
                for (int j = k + 1; j < n; ++j) lu_(i, j) -= m * lu_(k, j);
        }
    }
}

void LuFactor::solve_inplace(std::vector<double>& b) const {
    const int n = lu_.rows;
    for (int k = 0; k < n; ++k) {
        if (piv_[k] != k) std::swap(b[k], b[piv_[k]]);
        for (int i = k + 1; i < n; ++i) b[i] -= lu_(i, k) * b[k];
    }
    for (int k = n - 1; k >= 0; --k) {
        for (int j = k + 1; j < n; ++j) b[k] -= lu_(k, j) * b[j];
        b[k] /= lu_(k, k);
    }
}

std::vector<double> LuFactor::solve(std::vector<double> b) const {
    solve_inplace(b);
    return b;
}

void LuFactor::solve_cols(Matrix& B) const {
    std::vector<double> col(B.rows);
    for (int j = 0; j < B.cols; ++j) {
        for (int i = 0; i < B.rows; ++i) col[i] = B(i, j);
        solve_inplace(col);
        for (int i = 0; i < B.rows; ++i) B(i, j) = col[i];
    }
}

std::vector<double> lu_solve(const Matrix& A, std::vector<double> b) {
    return LuFactor(A).solve(std::move(b));
}

BandMatrix::BandMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), stride_(n),
      ab_(static_cast<size_t>(2 * kl + ku + 1) * n, 0.0) {}

void BandMatrix::clear() { std::fill(ab_.begin(), ab_.end(), 0.0); }

double& BandMatrix::at(int i, int j) {
    // storage row kl + ku + i - j, widened band
    return ab_[static_cast<size_t>(kl_ + ku_ + i - j) * stride_ + j];
}

void BandMatrix::accumulate_matvec(const double* x, double* y) const {
    for (int i = 0; i < n_; ++i) {
        const int j0 = std::max(0, i - kl_);
        const int j1 = std::min(n_ - 1, i + ku_);
        double s = 0.0;
        for (int j = j0; j <= j1; ++j)
            s += ab_[static_cast<size_t>(kl_ + ku_ + i - j) * stride_ + j] * x[j];
        y[i] += s;
    }
}

BandLU::BandLU(BandMatrix A) : m_(std::move(A)), piv_(m_.n_) {
    const int n = m_.n_, kl = m_.kl_, ku = m_.ku_;
    const int kuw = kl + ku;  // widened upper bandwidth after pivoting
    // reuse the dense threshold convention on the band's largest entry
    double amax = 0.0;
    for (double v : m_.ab_) amax = std::max(amax, std::fabs(v));
    const double tiny = 1e-14 * std::max(amax, 1e-300);

    auto entry = [&](int i, int j) -> double& {
        return m_.ab_[static_cast<size_t>(kuw + i - j) * m_.stride_ + j];
    };

    for (int k = 0; k < n; ++k) {
        const int imax = std::min(n - 1, k + kl);
        int ip = k;
        double best = std::fabs(entry(k, k));
        for (int i = k + 1; i <= imax; ++i) {
            const double v = std::fabs(entry(i, k));
            if (v > best) { best = v; ip = i; }
        }
        if (best < tiny)
            throw Error(Errc::Singular, "band pivot below threshold at column " + std::to_string(k));
        piv_[k] = ip;
        const int jmax = std::min(n - 1, k + kuw);
        if (ip != k)
            for (int j = k; j <= jmax; ++j) std::swap(entry(k, j), entry(ip, j));
        const double d = 1.0 / entry(k, k);
        for (int i = k + 1; i <= imax; ++i) {
            const double m = entry(i, k) * d;
            entry(i, k) = m;
            if (m != 0.0)
                for (int j = k + 1; j <= jmax; ++j) entry(i, j) -= m * entry(k, j);
        }
    }
}

void BandLU::solve_inplace(double* b) const {
    const int n = m_.n_, kl = m_.kl_, ku = m_.ku_;
    const int kuw = kl + ku;
    auto entry = [&](int i, int j) -> double {
        return m_.ab_[static_cast<size_t>(kuw + i - j) * m_.stride_ + j];
    };
    for (int k = 0; k < n; ++k) {
        if (piv_[k] != k) std::swap(b[k], b[piv_[k]]);
        const int imax = std::min(n - 1, k + kl);
        for (int i = k + 1; i <= imax; ++i) b[i] -= entry(i, k) * b[k];
    }
    for (int k = n - 1; k >= 0; --k) {
        const int jmax = std::min(n - 1, k + kuw);
        for (int j = k + 1; j <= jmax; ++j) b[k] -= entry(k, j) * b[j];
        b[k] /= entry(k, k);
    }
}

void bordered_solve(const BorderedCore& sys, std::vector<double>& f, std::vector<double>& g) {
    const int n = sys.B->rows, p = sys.B->cols;
    // Y = A^-1 B, v = A^-1 f
    Matrix Y = *sys.B;
    std::vector<double> col(n);
    for (int j = 0; j < p; ++j) {
        for (int i = 0; i < n; ++i) col[i] = Y(i, j);
        sys.lu->solve_inplace(col.data());
        for (int i = 0; i < n; ++i) Y(i, j) = col[i];
    }
    sys.lu->solve_inplace(f.data());
    // Schur complement S = D - C Y, rhs g - C v
    Matrix S(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) {
            double s = (*sys.D)(i, j);
            for (int k = 0; k < n; ++k) s -= (*sys.C)(i, k) * Y(k, j);
            S(i, j) = s;
        }
    std::vector<double> rhs(p);
    for (int i = 0; i < p; ++i) {
        double s = g[i];
        for (int k = 0; k < n; ++k) s -= (*sys.C)(i, k) * f[k];
        rhs[i] = s;
    }
    std::vector<double> y = LuFactor(std::move(S)).solve(std::move(rhs));
    for (int i = 0; i < n; ++i) {
        double s = f[i];
        for (int j = 0; j < p; ++j) s -= Y(i, j) * y[j];
        f[i] = s;
    }
    g = y;
}

NewtonResult newton_dense(const std::function<std::vector<double>(const std::vector<double>&)>& F,
                          const std::function<Matrix(const std::vector<double>&)>& J,
                          std::vector<double>& x, const NewtonOptions& opt) {
    NewtonResult res;
    auto rinf = [](const std::vector<double>& r) {
        double m = 0.0;
        for (double v : r) {
            if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
            m = std::max(m, std::fabs(v));
        }
        return m;
    };
    std::vector<double> r = F(x);
    double rn = rinf(r);
    res.residual_history.push_back(rn);
    for (int it = 0; it < opt.max_iter; ++it) {
        if (rn <= opt.tol) {
            res.converged = true;
            res.iterations = it;
            return res;
        }
        std::vector<double> dx;
        try {
            dx = LuFactor(J(x)).solve(r);
        } catch (const Error& e) {
            if (e.code() == Errc::Singular)
                throw Error(Errc::SingularJacobian, "newton_dense: " + std::string(e.what()));
            throw;
        }
        double damp = 1.0;
        std::vector<double> xt(x.size());
        while (true) {
            for (size_t i = 0; i < x.size(); ++i) xt[i] = x[i] - damp * dx[i];
            std::vector<double> rt = F(xt);
            const double rtn = rinf(rt);
            if (rtn < rn || damp <= opt.min_damping) {
                x = xt;
                r = std::move(rt);
                rn = rtn;
                break;
            }
            damp *= 0.5;
        }
        res.residual_history.push_back(rn);
    }
    res.converged = rn <= opt.tol;
    res.iterations = opt.max_iter;
    return res;
}

}  // namespace hetinf
