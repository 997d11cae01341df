#pragma once

#include <variant>

#include "clustersync/control.hpp"
#include "clustersync/dde.hpp"
#include "clustersync/network.hpp"

namespace clustersync {

struct NoController {};

using ControllerSpec = std::variant<NoController, PinningImpulsiveConfig, HybridConfig>;

struct InitialState {
    Matrix X0;  // N x n node states (constant history on [-tau_bar, 0])
    Matrix S0;  // M x n leader states
};

/// Method-of-steps RK4 over the error system coupled with the exact leader
/// dynamics. Deterministic: identical inputs give bit-identical trajectories.
Trajectory integrate(const ValidatedNetwork& network, const ControllerSpec& controller,
                     const IntegratorConfig& config, const InitialState& initial,
                     const Trajectory* previous_pass = nullptr);

}  // namespace clustersync
