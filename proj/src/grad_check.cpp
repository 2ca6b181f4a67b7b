#include "hmog/grad_check.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hmog {

GradCheckReport grad_check(const LossBuilder& loss, const std::vector<Parameter*>& params, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("grad_check: eps must be positive");

    std::vector<Tensor> analytic;
    analytic.reserve(params.size());
    {
        Graph g;
        Var out = loss(g);
        if (!out.value().all_finite()) {
            return {std::numeric_limits<double>::infinity(), 0, "<forward>"};
        }
        Gradients grads = g.backward(out);
        for (Parameter* p : params) analytic.push_back(p->trainable ? grads.value(g.param(*p)) : Tensor());
    }

    // Recording stays on: losses may contain input gradients.
    auto evaluate = [&]() {
        Graph g;
        return loss(g).value().item();
    };

    GradCheckReport report;
    for (std::size_t k = 0; k < params.size(); ++k) {
        Parameter& p = *params[k];
        if (!p.trainable) continue;
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double original = p.value[i];
            p.value[i] = original + eps;
            const double plus = evaluate();
            p.value[i] = original - eps;
            const double minus = evaluate();
            p.value[i] = original;

            const double numeric = (plus - minus) / (2.0 * eps);
            const double a = analytic[k][i];
            double err = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
            if (!std::isfinite(plus) || !std::isfinite(minus) || !std::isfinite(a)) {
                err = std::numeric_limits<double>::infinity();
            }
            ++report.entries_checked;
            if (err > report.max_relative_error || !std::isfinite(err)) {
                report.max_relative_error = err;
                report.worst_parameter = p.name + "[" + std::to_string(i) + "]";
            }
        }
    }
    return report;
}

}  // namespace hmog
