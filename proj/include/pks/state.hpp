#pragma once

#include <stdexcept>
#include <vector>

#include "pks/grid.hpp"

namespace pks {

// Physical: densities n_alpha(x, t) on the fixed grid.
// SelfSimilar: profiles N_alpha(X, tau) in the rescaled frame X = x/R(t),
// tau = log R, R = sqrt(1 + 2t).
enum class SimMode { Physical, SelfSimilar };

struct SimState {
    double t = 0.0;  // physical time, or tau in self-similar mode
    std::vector<ScalarField2D> n;
    SimMode mode = SimMode::Physical;

    int species() const { return static_cast<int>(n.size()); }
    const GridSpec& grid() const {
        if (n.empty()) throw std::invalid_argument("SimState: no species");
        return n.front().grid;
    }
};

struct StepperConfig {
    double cfl = 0.4;
    double dt_min = 1e-9;
    double dt_max = 1e-2;
    double blowup_linf_factor = 1e4;
    double blowup_tail_fraction = 0.1;
    double negativity_tolerance = 1e-6;  // fraction of max density

    void validate() const {
        if (!(cfl > 0.0 && cfl <= 1.0))
            throw std::invalid_argument("StepperConfig: cfl must be in (0,1]");
        if (!(dt_min > 0.0)) throw std::invalid_argument("StepperConfig: dt_min must be > 0");
        if (!(dt_min < dt_max)) throw std::invalid_argument("StepperConfig: dt_min must be < dt_max");
        if (!(blowup_linf_factor > 1.0) || !(blowup_tail_fraction > 0.0) ||
            !(negativity_tolerance >= 0.0))
            throw std::invalid_argument("StepperConfig: bad detector thresholds");
    }
};

}  // namespace pks
