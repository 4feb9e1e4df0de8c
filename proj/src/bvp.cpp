#include "hetinf/bvp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hetinf {

std::vector<double> lagrange_vals(const std::vector<double>& nodes, double s) {
    const int n = static_cast<int>(nodes.size());
    std::vector<double> out(n, 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            out[i] *= (s - nodes[j]) / (nodes[i] - nodes[j]);
        }
    return out;
}

std::vector<double> lagrange_ders(const std::vector<double>& nodes, double s) {
    const int n = static_cast<int>(nodes.size());
    std::vector<double> out(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double denom = 1.0;
        for (int j = 0; j < n; ++j)
            if (j != i) denom *= nodes[i] - nodes[j];
        double sum = 0.0;
        for (int k = 0; k < n; ++k) {
            if (k == i) continue;
            double prod = 1.0;
            for (int j = 0; j < n; ++j)
                if (j != i && j != k) prod *= s - nodes[j];
            sum += prod;
        }
        out[i] = sum / denom;
    }
    return out;
}

int Mesh::interval_of(double t) const {
    const auto it = std::upper_bound(tm.begin(), tm.end(), t);
    return std::clamp(static_cast<int>(it - tm.begin()) - 1, 0, ntst - 1);
}

Mesh make_mesh(int ntst, int ncol) {
    if (ntst < 1)
        throw Error(Errc::ConfigInvalid, "make_mesh: ntst must be positive");
    Mesh m;
    m.ntst = ntst;
    m.ncol = ncol;
    m.tm.resize(ntst + 1);
    for (int j = 0; j <= ntst; ++j) m.tm[j] = static_cast<double>(j) / ntst;
    const GaussRule rule = gauss_nodes(ncol);  // validates 2 <= ncol <= 7
    m.zeta = rule.nodes;
    m.wgauss = rule.weights;
    std::vector<double> ref(ncol + 1);
    for (int i = 0; i <= ncol; ++i) ref[i] = static_cast<double>(i) / ncol;
    m.bval = Matrix(ncol, ncol + 1);
    m.bder = Matrix(ncol, ncol + 1);
    for (int k = 0; k < ncol; ++k) {
        const auto v = lagrange_vals(ref, m.zeta[k]);
        const auto d = lagrange_ders(ref, m.zeta[k]);
        for (int i = 0; i <= ncol; ++i) {
            m.bval(k, i) = v[i];
            m.bder(k, i) = d[i];
        }
    }
    return m;
}

BvpLayout layout_of(const BvpProblem& prob) {
    BvpLayout lay;
    int off = 0;
    for (const auto& seg : prob.segs) {
        lay.seg_off.push_back(off);
        lay.seg_nfine.push_back(seg.mesh.nfine());
        off += 3 * (seg.mesh.nfine() + 1);
        lay.n_core_eq += 3 * seg.mesh.nfine() + 3;
    }
    lay.p_off = off;
    lay.n_scalars = prob.n_scalars;
    lay.n_total = off + prob.n_scalars;
    return lay;
}

namespace {

Vec3 node_of(const std::vector<double>& x, const BvpLayout& lay, int s, int g) {
    const int o = lay.ix_node(s, g, 0);
    return {x[o], x[o + 1], x[o + 2]};
}

std::vector<double> scalars_of(const std::vector<double>& x, const BvpLayout& lay) {
    return std::vector<double>(x.begin() + lay.p_off, x.end());
}

// collocation state and reference-scale derivative at gauss node k of interval j
void colloc_state(const Mesh& mesh, const std::vector<double>& x, int seg_off, int j, int k,
                  Vec3& u, Vec3& du) {
    u = {0, 0, 0};
    du = {0, 0, 0};
    for (int i = 0; i <= mesh.ncol; ++i) {
        const int o = seg_off + 3 * (j * mesh.ncol + i);
        const double bv = mesh.bval(k, i), bd = mesh.bder(k, i);
        for (int c = 0; c < 3; ++c) {
            u[c] += bv * x[o + c];
            du[c] += bd * x[o + c];
        }
    }
}

Mat3 fd_anchor_dx(const AnchorDef& a, const Vec3& v, const std::vector<double>& p) {
    Mat3 J{};
    for (int c = 0; c < 3; ++c) {
        const double h = 1e-7 * std::max(1.0, std::fabs(v[c]));
        Vec3 vp = v, vm = v;
        vp[c] += h;
        vm[c] -= h;
        const Vec3 gp = a.g(vp, p), gm = a.g(vm, p);
        for (int r = 0; r < 3; ++r) J[r][c] = (gp[r] - gm[r]) / (2.0 * h);
    }
    return J;
}

void fd_anchor_dp(const AnchorDef& a, const Vec3& v, const std::vector<double>& p, Matrix& out) {
    std::vector<double> q = p;
    for (int k = 0; k < static_cast<int>(p.size()); ++k) {
        const double h = 1e-7 * std::max(1.0, std::fabs(p[k]));
        q[k] = p[k] + h;
        const Vec3 gp = a.g(v, q);
        q[k] = p[k] - h;
        const Vec3 gm = a.g(v, q);
        q[k] = p[k];
        for (int r = 0; r < 3; ++r) out(r, k) = (gp[r] - gm[r]) / (2.0 * h);
    }
}

struct RowSet {
    const std::vector<BorderRowDef>* main;
    const std::vector<BorderRowDef>* extra;

    int size() const {
        return static_cast<int>(main->size()) + (extra ? static_cast<int>(extra->size()) : 0);
    }
    const BorderRowDef& operator[](int i) const {
        const int nm = static_cast<int>(main->size());
        return i < nm ? (*main)[i] : (*extra)[i - nm];
    }
};

}  // namespace

void bvp_residual(const BvpProblem& prob, const BvpLayout& lay, const std::vector<double>& x,
                  std::vector<double>& out, const std::vector<BorderRowDef>* extra) {
    const RowSet rows{&prob.rows, extra};
    out.assign(lay.n_core_eq + rows.size(), 0.0);
    const std::vector<double> p = scalars_of(x, lay);

    int row = 0;
    for (size_t s = 0; s < prob.segs.size(); ++s) {
        const SegmentSpec& seg = prob.segs[s];
        const Mesh& mesh = seg.mesh;
        const double T = seg.dyn.t_scalar >= 0 ? p[seg.dyn.t_scalar] : 1.0;
        const int nf = mesh.nfine();

        auto put_anchor = [&]() {
            const Vec3 end =
                seg.anchor.side == AnchorSide::Left ? node_of(x, lay, s, 0) : node_of(x, lay, s, nf);
            const Vec3 g = seg.anchor.g(end, p);
            out[row] = g[0];
            out[row + 1] = g[1];
            out[row + 2] = g[2];
            row += 3;
        };

        if (seg.anchor.side == AnchorSide::Left) put_anchor();
        for (int j = 0; j < mesh.ntst; ++j) {
            const double h = mesh.h(j);
            for (int k = 0; k < mesh.ncol; ++k) {
                Vec3 u, du;
                colloc_state(mesh, x, lay.seg_off[s], j, k, u, du);
                const double t = mesh.tm[j] + mesh.zeta[k] * h;
                const Vec3 f = seg.dyn.f(t, u, p);
                for (int c = 0; c < 3; ++c) out[row + c] = du[c] - h * T * f[c];
                row += 3;
            }
        }
        if (seg.anchor.side == AnchorSide::Right) put_anchor();
    }

    BvpView view(&lay, x.data());
    for (int i = 0; i < rows.size(); ++i) out[row + i] = rows[i].r(view);
}

namespace {

struct SegJac {
    BandMatrix A;  // core block, 3*nfine+3 square
    Matrix B;      // core rows x scalars
};

// Assemble the banded core and scalar columns of one segment.  Local row
// ordering matches bvp_residual.
SegJac assemble_segment(const SegmentSpec& seg, const BvpLayout& lay, int s,
                        const std::vector<double>& x, const std::vector<double>& p) {
    const Mesh& mesh = seg.mesh;
    const int C = mesh.ncol, nf = mesh.nfine();
    const int n = 3 * nf + 3;
    const int P = static_cast<int>(p.size());
    const double T = seg.dyn.t_scalar >= 0 ? p[seg.dyn.t_scalar] : 1.0;
    const bool left = seg.anchor.side == AnchorSide::Left;

    // collocation rows reach 3*C+2 columns to one side and 3*C-1 to the other,
    // depending on where the anchor block sits
    const int kl = left ? 3 * C + 2 : 3 * C - 1;
    const int ku = left ? 3 * C - 1 : 3 * C + 2;
    SegJac out{BandMatrix(n, kl, ku), Matrix(n, P)};

    const int anchor_row = left ? 0 : 3 * nf;
    const int colloc_off = left ? 3 : 0;

    {
        const Vec3 end = left ? node_of(x, lay, s, 0) : node_of(x, lay, s, nf);
        const Mat3 dgx = seg.anchor.dg_dx ? seg.anchor.dg_dx(end, p) : fd_anchor_dx(seg.anchor, end, p);
        const int col0 = left ? 0 : 3 * nf;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) out.A.add(anchor_row + r, col0 + c, dgx[r][c]);
        if (P > 0) {
            Matrix dgp(3, P);
            if (seg.anchor.dg_dp)
                seg.anchor.dg_dp(end, p, dgp);
            else
                fd_anchor_dp(seg.anchor, end, p, dgp);
            for (int r = 0; r < 3; ++r)
                for (int k = 0; k < P; ++k) out.B(anchor_row + r, k) = dgp(r, k);
        }
    }

    for (int j = 0; j < mesh.ntst; ++j) {
        const double h = mesh.h(j);
        for (int k = 0; k < C; ++k) {
            Vec3 u, du;
            colloc_state(mesh, x, lay.seg_off[s], j, k, u, du);
            const double t = mesh.tm[j] + mesh.zeta[k] * h;
            const Mat3 J = seg.dyn.dfdx(t, u, p);
            const int row = colloc_off + 3 * (j * C + k);
            for (int i = 0; i <= C; ++i) {
                const int col = 3 * (j * C + i);
                const double bv = mesh.bval(k, i), bd = mesh.bder(k, i);
                for (int r = 0; r < 3; ++r) {
                    out.A.add(row + r, col + r, bd);
                    for (int c = 0; c < 3; ++c) out.A.add(row + r, col + c, -h * T * bv * J[r][c]);
                }
            }
            if (P > 0) {
                const Vec3 f = seg.dyn.f(t, u, p);
                for (int m = 0; m < P; ++m) {
                    Vec3 dcol = {0, 0, 0};
                    if (m == seg.dyn.t_scalar) dcol = f;
                    if (seg.dyn.dfdp) {
                        const Vec3 dfp = seg.dyn.dfdp(m, t, u, p);
                        dcol = dcol + T * dfp;
                    }
                    for (int r = 0; r < 3; ++r) out.B(row + r, m) -= h * dcol[r];
                }
            }
        }
    }
    return out;
}

double vec_inf(const std::vector<double>& v) {
    double m = 0.0;
    for (double a : v) {
        if (!std::isfinite(a)) return std::numeric_limits<double>::infinity();
        m = std::max(m, std::fabs(a));
    }
    return m;
}

}  // namespace

NewtonResult bvp_newton(const BvpProblem& prob, const BvpLayout& lay, std::vector<double>& x,
                        const NewtonOptions& opt, const std::vector<BorderRowDef>* extra) {
    const RowSet rows{&prob.rows, extra};
    const int nb = rows.size();
    const int nseg = static_cast<int>(prob.segs.size());
    if (lay.n_core_eq + nb != lay.n_total)
        throw Error(Errc::IllPosedProblem,
                    "bvp_newton: " + std::to_string(lay.n_core_eq + nb) + " equations for " +
                        std::to_string(lay.n_total) + " unknowns");
    if (static_cast<int>(x.size()) != lay.n_total)
        throw Error(Errc::ConfigInvalid, "bvp_newton: unknown vector has wrong length");

    NewtonResult res;
    std::vector<double> r;
    bvp_residual(prob, lay, x, r, extra);
    double rn = vec_inf(r);
    res.residual_history.push_back(rn);

    // Newton step: assemble per-segment banded cores plus the bordered rows,
    // eliminate segment by segment, solve the dense Schur system in the
    // scalars, then apply iterative refinement against the stored bands.
    auto newton_step = [&](const std::vector<double>& r0) -> std::vector<double> {
        const std::vector<double> p = scalars_of(x, lay);
        std::vector<BandMatrix> bands;
        std::vector<BandLU> lus;
        std::vector<Matrix> Bs;
        bands.reserve(nseg);
        Bs.reserve(nseg);
        for (int s = 0; s < nseg; ++s) {
            SegJac sj = assemble_segment(prob.segs[s], lay, s, x, p);
            bands.push_back(sj.A);
            lus.emplace_back(std::move(sj.A));
            Bs.push_back(std::move(sj.B));
        }
        // border gradients, dense rows over the full unknown vector
        Matrix G(nb, lay.n_total);
        {
            BvpView view(&lay, x.data());
            std::vector<double> buf(lay.n_total);
            for (int i = 0; i < nb; ++i) {
                std::fill(buf.begin(), buf.end(), 0.0);
                rows[i].grad(view, buf.data());
                for (int j = 0; j < lay.n_total; ++j) G(i, j) = buf[j];
            }
        }

        std::vector<int> row_off(nseg);
        {
            int off = 0;
            for (int s = 0; s < nseg; ++s) {
                row_off[s] = off;
                off += 3 * lay.seg_nfine[s] + 3;
            }
        }

        // Solves J d = rhs for given full-length rhs (core ordering as in the
        // residual), returning the full-length d.
        auto solve_with = [&](const std::vector<double>& rhs) -> std::vector<double> {
            std::vector<std::vector<double>> v(nseg);
            std::vector<Matrix> Y(nseg);
            for (int s = 0; s < nseg; ++s) {
                const int ns = 3 * lay.seg_nfine[s] + 3;
                v[s].assign(rhs.begin() + row_off[s], rhs.begin() + row_off[s] + ns);
                lus[s].solve_inplace(v[s].data());
                Y[s] = Bs[s];
                std::vector<double> col(ns);
                for (int j = 0; j < lay.n_scalars; ++j) {
                    for (int i = 0; i < ns; ++i) col[i] = Y[s](i, j);
                    lus[s].solve_inplace(col.data());
                    for (int i = 0; i < ns; ++i) Y[s](i, j) = col[i];
                }
            }
            // Schur system in the scalars: (D - sum C_s Y_s) dp = sum C_s v_s - rb
            Matrix S(nb, nb);
            std::vector<double> srhs(nb);
            for (int i = 0; i < nb; ++i) {
                for (int j = 0; j < nb; ++j) S(i, j) = G(i, lay.ix_scalar(j));
                srhs[i] = -rhs[lay.n_core_eq + i];
                for (int s = 0; s < nseg; ++s) {
                    const int ns = 3 * lay.seg_nfine[s] + 3;
                    for (int k = 0; k < ns; ++k) {
                        const double c = G(i, lay.seg_off[s] + k);
                        if (c == 0.0) continue;
                        srhs[i] += c * v[s][k];
                        for (int j = 0; j < nb; ++j) S(i, j) -= c * Y[s](k, j);
                    }
                }
            }
            std::vector<double> dp = LuFactor(std::move(S)).solve(std::move(srhs));
            std::vector<double> d(lay.n_total, 0.0);
            for (int s = 0; s < nseg; ++s) {
                const int ns = 3 * lay.seg_nfine[s] + 3;
                for (int i = 0; i < ns; ++i) {
                    double val = v[s][i];
                    for (int j = 0; j < nb; ++j) val += Y[s](i, j) * dp[j];
                    d[lay.seg_off[s] + i] = -val;
                }
            }
            for (int j = 0; j < nb; ++j) d[lay.p_off + j] = dp[j];
            // Note the sign convention: returned d solves J d = -rhs.
            return d;
        };

        auto apply_jac = [&](const std::vector<double>& d, std::vector<double>& out) {
            out.assign(lay.n_core_eq + nb, 0.0);
            for (int s = 0; s < nseg; ++s) {
                const int ns = 3 * lay.seg_nfine[s] + 3;
                bands[s].accumulate_matvec(d.data() + lay.seg_off[s], out.data() + row_off[s]);
                for (int i = 0; i < ns; ++i) {
                    double acc = 0.0;
                    for (int j = 0; j < lay.n_scalars; ++j) acc += Bs[s](i, j) * d[lay.p_off + j];
                    out[row_off[s] + i] += acc;
                }
            }
            for (int i = 0; i < nb; ++i) {
                double acc = 0.0;
                for (int j = 0; j < lay.n_total; ++j) acc += G(i, j) * d[j];
                out[lay.n_core_eq + i] = acc;
            }
        };

        std::vector<double> d = solve_with(r0);  // J d = -r0
        // one or two refinement sweeps against the assembled Jacobian
        std::vector<double> jd, rho(r0.size());
        for (int pass = 0; pass < 2; ++pass) {
            apply_jac(d, jd);
            for (size_t i = 0; i < r0.size(); ++i) rho[i] = r0[i] + jd[i];
            std::vector<double> corr = solve_with(rho);
            double cn = 0.0, dn = 0.0;
            for (size_t i = 0; i < d.size(); ++i) {
                d[i] += corr[i];
                cn = std::max(cn, std::fabs(corr[i]));
                dn = std::max(dn, std::fabs(d[i]));
            }
            if (cn <= 1e-10 * std::max(1.0, dn)) break;
        }
        return d;
    };

    for (int it = 0; it < opt.max_iter; ++it) {
        if (rn <= opt.tol) {
            res.converged = true;
            res.iterations = it;
            return res;
        }
        std::vector<double> d;
        try {
            d = newton_step(r);
        } catch (const Error& e) {
            if (e.code() == Errc::Singular)
                throw Error(Errc::SingularJacobian, "bvp_newton: " + std::string(e.what()));
            throw;
        }
        double damp = 1.0;
        std::vector<double> xt(x.size()), rt;
        while (true) {
            for (size_t i = 0; i < x.size(); ++i) xt[i] = x[i] + damp * d[i];
            double rtn;
            try {
                bvp_residual(prob, lay, xt, rt, extra);
                rtn = vec_inf(rt);
            } catch (const Error&) {
                // trial step left the domain of a chart map or eigensolve
                rtn = std::numeric_limits<double>::infinity();
            }
            if (rtn < rn || (damp <= opt.min_damping && std::isfinite(rtn))) {
                x = xt;
                r = std::move(rt);
                rn = rtn;
                break;
            }
            if (damp <= opt.min_damping && !std::isfinite(rtn)) {
                res.iterations = it + 1;
                res.residual_history.push_back(rtn);
                return res;  // stuck outside the domain of the fields
            }
            damp *= 0.5;
        }
        res.residual_history.push_back(rn);
    }
    res.converged = rn <= opt.tol;
    res.iterations = opt.max_iter;
    return res;
}

Vec3 bvp_eval(const BvpProblem& prob, const BvpLayout& lay, const std::vector<double>& x, int seg,
              double t) {
    const Mesh& mesh = prob.segs[seg].mesh;
    const int j = mesh.interval_of(t);
    const double sigma = (t - mesh.tm[j]) / mesh.h(j);
    std::vector<double> ref(mesh.ncol + 1);
    for (int i = 0; i <= mesh.ncol; ++i) ref[i] = static_cast<double>(i) / mesh.ncol;
    const auto vals = lagrange_vals(ref, sigma);
    Vec3 u = {0, 0, 0};
    for (int i = 0; i <= mesh.ncol; ++i) u = u + vals[i] * node_of(x, lay, seg, j * mesh.ncol + i);
    return u;
}

Vec3 bvp_eval_deriv(const BvpProblem& prob, const BvpLayout& lay, const std::vector<double>& x,
                    int seg, double t) {
    const Mesh& mesh = prob.segs[seg].mesh;
    const int j = mesh.interval_of(t);
    const double sigma = (t - mesh.tm[j]) / mesh.h(j);
    std::vector<double> ref(mesh.ncol + 1);
    for (int i = 0; i <= mesh.ncol; ++i) ref[i] = static_cast<double>(i) / mesh.ncol;
    const auto ders = lagrange_ders(ref, sigma);
    Vec3 du = {0, 0, 0};
    for (int i = 0; i <= mesh.ncol; ++i) du = du + ders[i] * node_of(x, lay, seg, j * mesh.ncol + i);
    return (1.0 / mesh.h(j)) * du;
}

std::vector<Vec3> discretize(const SampledCurve& data, const Mesh& mesh) {
    const size_t ns = data.t.size();
    if (ns < 2 || data.x.size() != ns || data.dx.size() != ns)
        throw Error(Errc::ConfigInvalid, "discretize: inconsistent sample arrays");
    if (std::fabs(data.t.front()) > 1e-12 || std::fabs(data.t.back() - 1.0) > 1e-12)
        throw Error(Errc::ConfigInvalid, "discretize: samples must span [0, 1]");
    for (size_t i = 1; i < ns; ++i)
        if (!(data.t[i] > data.t[i - 1]))
            throw Error(Errc::ConfigInvalid, "discretize: sample times must increase");

    const int nf = mesh.nfine();
    std::vector<Vec3> fine(nf + 1);
    for (int g = 0; g <= nf; ++g) {
        const double t = g == nf ? 1.0 : mesh.tfine(g);
        auto it = std::upper_bound(data.t.begin(), data.t.end(), t);
        size_t b = std::min(static_cast<size_t>(it - data.t.begin()), ns - 1);
        if (b == 0) b = 1;
        const size_t a = b - 1;
        const double dt = data.t[b] - data.t[a];
        const double s = (t - data.t[a]) / dt;
        const double s2 = s * s, s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
        const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
        fine[g] = h00 * data.x[a] + (h10 * dt) * data.dx[a] + h01 * data.x[b] + (h11 * dt) * data.dx[b];
    }
    fine[0] = data.x.front();
    fine[nf] = data.x.back();

    // the degree-ncol interval polynomials through the fine nodes must
    // reproduce the samples; otherwise the mesh cannot represent the data
    double amp = 0.0;
    for (const Vec3& v : data.x) amp = std::max(amp, norm_inf(v));
    amp = std::max(amp, 1e-300);
    std::vector<double> ref(mesh.ncol + 1);
    for (int i = 0; i <= mesh.ncol; ++i) ref[i] = static_cast<double>(i) / mesh.ncol;
    double worst = 0.0;
    for (size_t m = 0; m < ns; ++m) {
        const double t = data.t[m];
        const int j = mesh.interval_of(t);
        const double sigma = (t - mesh.tm[j]) / mesh.h(j);
        const auto vals = lagrange_vals(ref, sigma);
        Vec3 u = {0, 0, 0};
        for (int i = 0; i <= mesh.ncol; ++i) u = u + vals[i] * fine[j * mesh.ncol + i];
        worst = std::max(worst, norm_inf(u - data.x[m]));
    }
    if (worst > 1e-2 * amp)
        throw Error(Errc::MeshTooCoarse, "discretize: interpolation error " + std::to_string(worst) +
                                             " exceeds 1% of data amplitude " + std::to_string(amp));
    return fine;
}

namespace {

// evaluate the piecewise collocation polynomial stored in raw fine nodes
Vec3 eval_fine(const Mesh& mesh, const std::vector<Vec3>& fine, const std::vector<double>& ref,
               double t) {
    const int j = mesh.interval_of(t);
    const double sigma = (t - mesh.tm[j]) / mesh.h(j);
    const auto vals = lagrange_vals(ref, sigma);
    Vec3 u = {0, 0, 0};
    for (int i = 0; i <= mesh.ncol; ++i) u = u + vals[i] * fine[j * mesh.ncol + i];
    return u;
}

std::vector<Vec3> fine_of(const std::vector<double>& x, const BvpLayout& lay, int s) {
    const int nf = lay.seg_nfine[s];
    std::vector<Vec3> out(nf + 1);
    for (int g = 0; g <= nf; ++g) out[g] = node_of(x, lay, s, g);
    return out;
}

void store_fine(std::vector<double>& x, const BvpLayout& lay, int s, const std::vector<Vec3>& f) {
    for (int g = 0; g < static_cast<int>(f.size()); ++g)
        for (int c = 0; c < 3; ++c) x[lay.ix_node(s, g, c)] = f[g][c];
}

// breakpoints equidistributing the estimated error density of the stored
// polynomial: per interval the ncol-th derivative is a constant, its jump
// across breakpoints estimates the next derivative, and the density is that
// jump to the power 1/(ncol+1), floored so no region starves entirely
std::vector<double> equidistributed_tm(const Mesh& mesh, const std::vector<Vec3>& fine) {
    const int N = mesh.ntst, C = mesh.ncol;
    std::vector<Vec3> top(N, Vec3{0, 0, 0});
    for (int j = 0; j < N; ++j) {
        // ncol-th forward difference over the interval's equispaced nodes,
        // rescaled to a t-derivative
        Vec3 d = {0, 0, 0};
        double sign = (C % 2 == 0) ? 1.0 : -1.0;
        double binom = 1.0;
        for (int i = 0; i <= C; ++i) {
            d = d + (sign * binom) * fine[j * C + i];
            sign = -sign;
            binom *= static_cast<double>(C - i) / (i + 1);
        }
        const double scale = std::pow(C / mesh.h(j), C);
        top[j] = scale * d;
    }
    std::vector<double> dens(N, 0.0);
    for (int j = 0; j + 1 < N; ++j) {
        const double gap = 0.5 * (mesh.h(j) + mesh.h(j + 1));
        const double jump = norm_inf(top[j + 1] - top[j]) / gap;
        const double s = std::pow(jump, 1.0 / (C + 1));
        dens[j] = std::max(dens[j], s);
        dens[j + 1] = std::max(dens[j + 1], s);
    }
    double peak = 0.0;
    for (double s : dens) peak = std::max(peak, s);
    if (peak <= 0.0) return mesh.tm;  // polynomial data: nothing to move
    for (double& s : dens) s += 0.05 * peak;

    std::vector<double> cum(N + 1, 0.0);
    for (int j = 0; j < N; ++j) cum[j + 1] = cum[j] + dens[j] * mesh.h(j);
    std::vector<double> tm(N + 1);
    tm[0] = 0.0;
    tm[N] = 1.0;
    int j = 0;
    for (int k = 1; k < N; ++k) {
        const double target = cum[N] * k / N;
        while (j + 1 < N && cum[j + 1] < target) ++j;
        tm[k] = mesh.tm[j] + (target - cum[j]) / dens[j];
    }
    return tm;
}

}  // namespace

void adapt_meshes(BvpProblem& prob, const BvpLayout& lay, std::vector<double>& x,
                  std::vector<double>* x2) {
    for (size_t s = 0; s < prob.segs.size(); ++s) {
        Mesh& mesh = prob.segs[s].mesh;
        const int nf = mesh.nfine();
        std::vector<double> ref(mesh.ncol + 1);
        for (int i = 0; i <= mesh.ncol; ++i) ref[i] = static_cast<double>(i) / mesh.ncol;

        const std::vector<Vec3> old_main = fine_of(x, lay, static_cast<int>(s));
        std::vector<double> tm = equidistributed_tm(mesh, old_main);

        const Mesh old_mesh = mesh;
        mesh.tm = std::move(tm);
        std::vector<Vec3> fresh(nf + 1);
        for (int g = 0; g <= nf; ++g)
            fresh[g] = eval_fine(old_mesh, old_main, ref, mesh.tfine(g));
        fresh[0] = old_main.front();
        fresh[nf] = old_main.back();
        store_fine(x, lay, static_cast<int>(s), fresh);

        if (x2) {
            const std::vector<Vec3> old_other = fine_of(*x2, lay, static_cast<int>(s));
            for (int g = 0; g <= nf; ++g)
                fresh[g] = eval_fine(old_mesh, old_other, ref, mesh.tfine(g));
            fresh[0] = old_other.front();
            fresh[nf] = old_other.back();
            store_fine(*x2, lay, static_cast<int>(s), fresh);
        }
    }
}

}  // namespace hetinf
