#ifndef HETINF_PARAMS_HPP
#define HETINF_PARAMS_HPP

namespace hetinf {

/// System parameters of the quadratic model field.  gamma is kept fixed at
/// 0.5 in all production scenarios; alpha and beta are the continuation
/// parameters.
struct Params {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.5;
};

}  // namespace hetinf

#endif
