#include "tapeopt/grad_check.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace tapeopt {

namespace {

double loss_at(const LossBuilder& build, std::span<const Tensor> params) {
    Tape tape;
    NodeId loss = build(tape, params);
    const double v = tape.value(loss).scalar_real();
    if (!std::isfinite(v)) throw std::runtime_error("grad_check: non-finite loss");
    return v;
}

}  // namespace

double grad_check(const LossBuilder& build, std::span<const Tensor> params, double step,
                  double floor) {
    if (step <= 0.0) throw std::invalid_argument("grad_check: step must be positive");
    if (params.empty()) return 0.0;

    Tape tape;
    NodeId loss = build(tape, params);
    if (!tape.value(loss).all_finite()) throw std::runtime_error("grad_check: non-finite loss");
    if (tape.trainable_leaves().size() != params.size())
        throw std::logic_error("grad_check: builder registered a different number of leaves");
    // Registration order must follow parameter order. Nested leaf() calls in
    // one expression are indeterminately sequenced and break this silently,
    // so verify the stored values.
    for (std::size_t p = 0; p < params.size(); ++p) {
        const Tensor& stored = tape.value(tape.trainable_leaves()[p]);
        bool same = stored.shape() == params[p].shape();
        for (std::size_t e = 0; same && e < stored.size(); ++e)
            same = stored[e] == params[p][e];
        if (!same)
            throw std::logic_error(
                "grad_check: builder did not register leaves in parameter order");
    }
    Gradients grads = tape.backward(loss);

    std::vector<Tensor> work(params.begin(), params.end());
    double max_rel = 0.0;
    for (std::size_t p = 0; p < work.size(); ++p) {
        if (!work[p].is_real()) throw std::invalid_argument("grad_check: parameters must be real");
        for (std::size_t e = 0; e < work[p].size(); ++e) {
            const double x = work[p][e].real();
            work[p][e] = cdouble{x + step, 0.0};
            const double up = loss_at(build, work);
            work[p][e] = cdouble{x - step, 0.0};
            const double dn = loss_at(build, work);
            work[p][e] = cdouble{x, 0.0};
            const double numeric = (up - dn) / (2.0 * step);
            const double analytic = grads[p][e].real();
            const double rel =
                std::abs(analytic - numeric) / std::max(std::abs(analytic), floor);
            max_rel = std::max(max_rel, rel);
        }
    }
    return max_rel;
}

}  // namespace tapeopt
