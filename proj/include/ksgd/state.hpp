#pragma once

#include "ksgd/domain.hpp"

namespace ksgd {

/// Population density u and signal v at time t.
struct State {
    double t = 0.0;
    ScalarField u;
    ScalarField v;
    double dt_last = 0.0;
};

}  // namespace ksgd
