#include "drowsy/optim.hpp"

#include <cmath>

namespace drowsy {

void Adam::step(const std::vector<ParamRef>& params) {
    if (m_.empty()) {
        for (const auto& p : params) {
            m_.emplace_back(p.value->shape);
            v_.emplace_back(p.value->shape);
        }
    }
    require(m_.size() == params.size(), "adam: parameter list changed between steps");

    ++t_;
    const double bc1 = 1.0 - std::pow(config_.beta1, double(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, double(t_));

    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& p = params[i];
        require(p.value->same_shape(*p.grad) && p.value->same_shape(m_[i]),
                "adam: shape mismatch for parameter ", p.name);
        double* val = p.value->data.data();
        const double* g = p.grad->data.data();
        double* m = m_[i].data.data();
        double* v = v_[i].data.data();
        const std::size_t n = p.value->numel();
        for (std::size_t j = 0; j < n; ++j) {
            if (!std::isfinite(g[j]))
                fail("adam: non-finite gradient in parameter ", p.name);
            m[j] = config_.beta1 * m[j] + (1.0 - config_.beta1) * g[j];
            v[j] = config_.beta2 * v[j] + (1.0 - config_.beta2) * g[j] * g[j];
            const double m_hat = m[j] / bc1;
            const double v_hat = v[j] / bc2;
            val[j] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
        }
    }
}

} // namespace drowsy
