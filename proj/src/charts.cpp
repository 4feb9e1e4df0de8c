#include "hetinf/charts.hpp"

#include <cmath>

namespace hetinf {

ChartPoint to_compactified(const ChartPoint& q) {
    require_chart(q, ChartId::Original, "to_compactified");
    const double y = q.p[1];
    if (!(y > 0.0))
        throw Error(Errc::NonPositiveY, "compactified chart covers y > 0 only");
    const double wb = std::pow(y, -0.25);
    return {ChartId::Compactified,
            {q.p[0] * wb * wb * wb, q.p[2] * wb, wb}};
}

ChartPoint from_compactified(const ChartPoint& q) {
    require_chart(q, ChartId::Compactified, "from_compactified");
    const double wb = q.p[2];
    if (!(wb > 0.0))
        throw Error(Errc::AtInfinity, "from_compactified needs wb > 0");
    const double w2 = wb * wb, w4 = w2 * w2;
    return {ChartId::Original, {q.p[0] / (wb * w2), 1.0 / w4, q.p[1] / wb}};
}

ChartPoint blowup(const ChartPoint& q) {
    require_chart(q, ChartId::Compactified, "blowup");
    const double wb = q.p[2];
    if (!(wb > 0.0))
        throw Error(Errc::AtInfinity, "blowup needs wb > 0");
    return {ChartId::BlownUp, {q.p[0] / wb, q.p[1] / wb, wb}};
}

ChartPoint blowdown(const ChartPoint& q) {
    require_chart(q, ChartId::BlownUp, "blowdown");
    const double wB = q.p[2];
    return {ChartId::Compactified, {q.p[0] * wB, q.p[1] * wB, wB}};
}

ChartPoint blownup_to_original(const ChartPoint& q) {
    require_chart(q, ChartId::BlownUp, "blownup_to_original");
    const double wB = q.p[2];
    if (!(wB > 0.0))
        throw Error(Errc::AtInfinity, "blownup_to_original needs wB > 0");
    const double w2 = wB * wB, w4 = w2 * w2;
    return {ChartId::Original, {q.p[0] / w2, 1.0 / w4, q.p[1]}};
}

Mat3 glue_jacobian(const Vec3& pB) {
    const double xB = pB[0], wB = pB[2];
    const double w2 = wB * wB, w3 = w2 * wB, w5 = w3 * w2;
    return {{{1.0 / w2, 0.0, -2.0 * xB / w3},
             {0.0, 0.0, -4.0 / w5},
             {0.0, 1.0, 0.0}}};
}

Vec3 project_sphere(const ChartPoint& q) {
    require_chart(q, ChartId::Original, "project_sphere");
    const double s = 1.0 / (1.0 + norm(q.p));
    return s * q.p;
}

}  // namespace hetinf
