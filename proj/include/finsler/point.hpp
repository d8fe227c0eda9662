#pragma once

#include <string>

#include "finsler/errors.hpp"
#include "finsler/linalg.hpp"

namespace finsler {

/// A point of the slit tangent bundle: base coordinates x and a nonzero
/// tangent vector y in the same chart.
struct SlitPoint {
    Vec x;
    Vec y;

    int dim() const { return static_cast<int>(x.size()); }
};

inline void validate(const SlitPoint& p) {
    if (p.x.size() != p.y.size())
        throw EvaluationError("slit point: x has dimension " + std::to_string(p.x.size()) +
                              " but y has dimension " + std::to_string(p.y.size()));
    if (!(norm(p.y) > 0.0))
        throw EvaluationError("slit point: y = 0 is outside the slit tangent bundle");
}

} // namespace finsler
