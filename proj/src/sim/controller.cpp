// SPDX-License-Identifier: Apache-2.0
#include <openti/core/error.hpp>
#include <openti/sim/controller.hpp>

namespace openti::sim
{

FunctionController::FunctionController(ControlFunction fn, std::string name)
    : _fn(std::move(fn))
    , _name(std::move(name))
{
    require(static_cast<bool>(_fn), "controller function is empty");
}

TscAction FunctionController::act(const TscObservation& obs, const network::SignalizedIntersection& intersection)
{
    return _fn(obs, intersection);
}

} // namespace openti::sim
