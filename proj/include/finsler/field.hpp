#pragma once

#include <functional>
#include <span>
#include <utility>

#include "finsler/dual.hpp"
#include "finsler/linalg.hpp"

namespace finsler {

/// A scalar field on the slit tangent bundle, evaluable at plain doubles and
/// at one, two, or three levels of dual-number nesting. The four instances
/// are generated from a single generic callable at construction, so they can
/// never drift apart.
class ScalarField {
public:
    ScalarField() = default;

    template <class Fn>
    static ScalarField from(int dim, Fn fn) {
        ScalarField f;
        f.dim_ = dim;
        f.f0_ = [fn](std::span<const double> x, std::span<const double> y) { return fn(x, y); };
        f.f1_ = [fn](std::span<const D1> x, std::span<const D1> y) { return fn(x, y); };
        f.f2_ = [fn](std::span<const D2> x, std::span<const D2> y) { return fn(x, y); };
        f.f3_ = [fn](std::span<const D3> x, std::span<const D3> y) { return fn(x, y); };
        return f;
    }

    int dim() const { return dim_; }
    bool valid() const { return static_cast<bool>(f0_); }

    double operator()(std::span<const double> x, std::span<const double> y) const { return f0_(x, y); }
    D1 operator()(std::span<const D1> x, std::span<const D1> y) const { return f1_(x, y); }
    D2 operator()(std::span<const D2> x, std::span<const D2> y) const { return f2_(x, y); }
    D3 operator()(std::span<const D3> x, std::span<const D3> y) const { return f3_(x, y); }

    double operator()(const Vec& x, const Vec& y) const {
        return f0_(std::span<const double>(x), std::span<const double>(y));
    }

    /// Pointwise square of the field (used for F -> F^2).
    ScalarField squared() const {
        ScalarField f;
        f.dim_ = dim_;
        f.f0_ = [g = f0_](auto x, auto y) { auto v = g(x, y); return v * v; };
        f.f1_ = [g = f1_](auto x, auto y) { auto v = g(x, y); return v * v; };
        f.f2_ = [g = f2_](auto x, auto y) { auto v = g(x, y); return v * v; };
        f.f3_ = [g = f3_](auto x, auto y) { auto v = g(x, y); return v * v; };
        return f;
    }

private:
    template <class S>
    using Fn = std::function<S(std::span<const S>, std::span<const S>)>;

    int dim_ = 0;
    Fn<double> f0_;
    Fn<D1> f1_;
    Fn<D2> f2_;
    Fn<D3> f3_;
};

} // namespace finsler
