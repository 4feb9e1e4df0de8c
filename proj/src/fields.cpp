#include "hetinf/fields.hpp"

#include <cmath>

namespace hetinf {

const char* chart_name(ChartId id) {
    switch (id) {
        case ChartId::Original: return "Original";
        case ChartId::Compactified: return "Compactified";
        case ChartId::BlownUp: return "BlownUp";
    }
    return "?";
}

Vec3 rhs_original(const Vec3& p, const Params& ps) {
    const double x = p[0], y = p[1], z = p[2];
    return {ps.alpha * y + ps.gamma * z + y * z,
            ps.beta * x - y + x * x,
            -4.0 * x};
}

Vec3 eval_quasihom(const Vec3& p) {
    return {p[1] * p[2], p[0] * p[0], -4.0 * p[0]};
}

// Compactified chart, time already rescaled by wb^2:
//   xb' = zb + alpha*wb + (3/4) xb A + gamma zb wb^4
//   zb' = -4 xb + (1/4) zb A
//   wb' = (1/4) wb A
// with A = wb^2 - beta wb^3 xb - xb^2.
Vec3 rhs_compactified(const Vec3& p, const Params& ps) {
    const double xb = p[0], zb = p[1], wb = p[2];
    const double w2 = wb * wb;
    const double A = w2 - ps.beta * w2 * wb * xb - xb * xb;
    return {zb + ps.alpha * wb + 0.75 * xb * A + ps.gamma * zb * w2 * w2,
            -4.0 * xb + 0.25 * zb * A,
            0.25 * wb * A};
}

// Blow-up chart, no further time rescaling relative to the compactified one:
//   xB' = alpha + zB + gamma wB^4 zB + (1/2) xB wB^2 B
//   zB' = -4 xB
//   wB' = (1/4) wB^3 B
// with B = 1 - beta xB wB^2 - xB^2.
Vec3 rhs_blownup(const Vec3& p, const Params& ps) {
    const double xB = p[0], zB = p[1], wB = p[2];
    const double w2 = wB * wB;
    const double B = 1.0 - ps.beta * xB * w2 - xB * xB;
    return {ps.alpha + zB + ps.gamma * w2 * w2 * zB + 0.5 * xB * w2 * B,
            -4.0 * xB,
            0.25 * wB * w2 * B};
}

Vec2 eval_infinity_plane(const Vec2& p) {
    const double xb = p[0], zb = p[1];
    return {zb - 0.75 * xb * xb * xb, -4.0 * xb - 0.25 * xb * xb * zb};
}

Vec2 infinity_plane_polar(double r, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {-0.25 * r * r * r * c * c * (2.0 + std::cos(2.0 * theta)),
            -2.0 + 0.5 * r * r * c * c * c * s};
}

Vec3 eval_original(const ChartPoint& q, const Params& ps) {
    require_chart(q, ChartId::Original, "eval_original");
    return rhs_original(q.p, ps);
}

Vec3 eval_compactified(const ChartPoint& q, const Params& ps) {
    require_chart(q, ChartId::Compactified, "eval_compactified");
    return rhs_compactified(q.p, ps);
}

Vec3 eval_blownup(const ChartPoint& q, const Params& ps) {
    require_chart(q, ChartId::BlownUp, "eval_blownup");
    return rhs_blownup(q.p, ps);
}

Mat3 jac_original(const Vec3& p, const Params& ps) {
    const double x = p[0], y = p[1], z = p[2];
    return {{{0.0, ps.alpha + z, ps.gamma + y},
             {ps.beta + 2.0 * x, -1.0, 0.0},
             {-4.0, 0.0, 0.0}}};
}

Mat3 jac_compactified(const Vec3& p, const Params& ps) {
    const double xb = p[0], zb = p[1], wb = p[2];
    const double w2 = wb * wb, w3 = w2 * wb;
    const double A = w2 - ps.beta * w3 * xb - xb * xb;
    const double Ax = -ps.beta * w3 - 2.0 * xb;
    const double Aw = 2.0 * wb - 3.0 * ps.beta * w2 * xb;
    return {{{0.75 * A + 0.75 * xb * Ax,
              1.0 + ps.gamma * w2 * w2,
              ps.alpha + 0.75 * xb * Aw + 4.0 * ps.gamma * zb * w3},
             {-4.0 + 0.25 * zb * Ax, 0.25 * A, 0.25 * zb * Aw},
             {0.25 * wb * Ax, 0.0, 0.25 * A + 0.25 * wb * Aw}}};
}

Mat3 jac_blownup(const Vec3& p, const Params& ps) {
    const double xB = p[0], zB = p[1], wB = p[2];
    const double w2 = wB * wB, w3 = w2 * wB, w4 = w2 * w2;
    const double B = 1.0 - ps.beta * xB * w2 - xB * xB;
    const double Bx = -ps.beta * w2 - 2.0 * xB;
    const double Bw = -2.0 * ps.beta * xB * wB;
    return {{{0.5 * w2 * B + 0.5 * xB * w2 * Bx,
              1.0 + ps.gamma * w4,
              4.0 * ps.gamma * w3 * zB + xB * wB * B + 0.5 * xB * w2 * Bw},
             {-4.0, 0.0, 0.0},
             {0.25 * w3 * Bx, 0.0, 0.75 * w2 * B + 0.25 * w3 * Bw}}};
}

Mat3 field_jacobian(const ChartPoint& q, const Params& ps) {
    return jac_of(q.chart, q.p, ps);
}

Vec3 dalpha_of(ChartId chart, const Vec3& p, const Params& ps) {
    (void)ps;
    switch (chart) {
        case ChartId::Original: return {p[1], 0.0, 0.0};
        case ChartId::Compactified: return {p[2], 0.0, 0.0};
        case ChartId::BlownUp: return {1.0, 0.0, 0.0};
    }
    return {0.0, 0.0, 0.0};
}

Vec3 dbeta_of(ChartId chart, const Vec3& p, const Params& ps) {
    (void)ps;
    switch (chart) {
        case ChartId::Original:
            return {0.0, p[0], 0.0};
        case ChartId::Compactified: {
            // d/dbeta of A = -wb^3 xb enters all three components.
            const double xb = p[0], zb = p[1], wb = p[2];
            const double dA = -wb * wb * wb * xb;
            return {0.75 * xb * dA, 0.25 * zb * dA, 0.25 * wb * dA};
        }
        case ChartId::BlownUp: {
            const double xB = p[0], wB = p[2];
            const double w2 = wB * wB;
            const double dB = -xB * w2;
            return {0.5 * xB * w2 * dB, 0.0, 0.25 * wB * w2 * dB};
        }
    }
    return {0.0, 0.0, 0.0};
}

Vec3 rhs_of(ChartId chart, const Vec3& p, const Params& ps) {
    switch (chart) {
        case ChartId::Original: return rhs_original(p, ps);
        case ChartId::Compactified: return rhs_compactified(p, ps);
        case ChartId::BlownUp: return rhs_blownup(p, ps);
    }
    return {0.0, 0.0, 0.0};
}

Mat3 jac_of(ChartId chart, const Vec3& p, const Params& ps) {
    switch (chart) {
        case ChartId::Original: return jac_original(p, ps);
        case ChartId::Compactified: return jac_compactified(p, ps);
        case ChartId::BlownUp: return jac_blownup(p, ps);
    }
    return Mat3{};
}

}  // namespace hetinf
