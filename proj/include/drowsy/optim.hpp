#pragma once

#include <vector>

#include "drowsy/layers.hpp"

namespace drowsy {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction. State tensors are allocated on the first step
// and keyed by parameter position, so the same parameter list must be passed
// every step.
class Adam {
public:
    explicit Adam(AdamConfig config = {}) : config_(config) {}

    void step(const std::vector<ParamRef>& params);

    std::size_t steps_taken() const { return t_; }

private:
    AdamConfig config_;
    std::size_t t_ = 0;
    std::vector<Tensor> m_, v_;
};

} // namespace drowsy
