#pragma once

#include <cmath>
#include <type_traits>

namespace finsler {

/// First-order truncated Taylor number: value plus one directional derivative.
/// Nesting Dual<Dual<...>> raises the derivative order one level per nesting;
/// the library uses up to three levels (third y-derivatives of F^2).
template <class T>
struct Dual {
    T v{};
    T d{};

    constexpr Dual() = default;
    constexpr Dual(double s) : v(s), d() {} // constant embedding
    constexpr Dual(T value, T deriv) : v(std::move(value)), d(std::move(deriv)) {}
};

using D1 = Dual<double>;
using D2 = Dual<D1>;
using D3 = Dual<D2>;

template <class T>
constexpr Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
    return {a.v + b.v, a.d + b.d};
}
template <class T>
constexpr Dual<T> operator+(const Dual<T>& a, double b) { return {a.v + b, a.d}; }
template <class T>
constexpr Dual<T> operator+(double a, const Dual<T>& b) { return {a + b.v, b.d}; }

template <class T>
constexpr Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }

template <class T>
constexpr Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) {
    return {a.v - b.v, a.d - b.d};
}
template <class T>
constexpr Dual<T> operator-(const Dual<T>& a, double b) { return {a.v - b, a.d}; }
template <class T>
constexpr Dual<T> operator-(double a, const Dual<T>& b) { return {a - b.v, -b.d}; }

template <class T>
constexpr Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
    return {a.v * b.v, a.d * b.v + a.v * b.d};
}
template <class T>
constexpr Dual<T> operator*(const Dual<T>& a, double b) { return {a.v * b, a.d * b}; }
template <class T>
constexpr Dual<T> operator*(double a, const Dual<T>& b) { return {a * b.v, a * b.d}; }

template <class T>
constexpr Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
    const T inv = 1.0 / b.v;
    const T q = a.v * inv;
    return {q, (a.d - q * b.d) * inv};
}
template <class T>
constexpr Dual<T> operator/(const Dual<T>& a, double b) { return {a.v / b, a.d / b}; }
template <class T>
constexpr Dual<T> operator/(double a, const Dual<T>& b) {
    const T inv = 1.0 / b.v;
    const T q = a * inv;
    return {q, -q * b.d * inv};
}

using std::cos;
using std::exp;
using std::log;
using std::pow;
using std::sin;
using std::sqrt;

template <class T>
Dual<T> sqrt(const Dual<T>& a) {
    const T r = sqrt(a.v);
    return {r, a.d / (2.0 * r)};
}

template <class T>
Dual<T> sin(const Dual<T>& a) { return {sin(a.v), cos(a.v) * a.d}; }

template <class T>
Dual<T> cos(const Dual<T>& a) { return {cos(a.v), -(sin(a.v) * a.d)}; }

template <class T>
Dual<T> exp(const Dual<T>& a) {
    const T e = exp(a.v);
    return {e, e * a.d};
}

template <class T>
Dual<T> log(const Dual<T>& a) { return {log(a.v), a.d / a.v}; }

template <class T>
Dual<T> pow(const Dual<T>& a, double p) {
    // small integer exponents by repeated multiplication: keeps the
    // derivative chain finite at a = 0 (the p * a^(p-1) form would produce
    // 0 * inf there in nested levels)
    if (p == static_cast<long>(p) && std::abs(p) <= 16.0) {
        long e = static_cast<long>(p);
        const bool invert = e < 0;
        if (invert) e = -e;
        Dual<T> acc(1.0);
        Dual<T> base = a;
        while (e > 0) {
            if (e & 1) acc = acc * base;
            base = base * base;
            e >>= 1;
        }
        return invert ? 1.0 / acc : acc;
    }
    const T f = pow(a.v, p);
    return {f, p * pow(a.v, p - 1.0) * a.d};
}

template <class T>
Dual<T> pow(const Dual<T>& a, const Dual<T>& b) {
    // a^b = exp(b log a); requires a > 0 like the scalar counterpart
    return exp(b * log(a));
}

template <class T>
Dual<T> pow(double a, const Dual<T>& b) { return exp(b * log(Dual<T>(a))); }

/// Recursively extracts the underlying value of a (possibly nested) dual.
inline double value_of(double x) { return x; }
template <class T>
double value_of(const Dual<T>& x) { return value_of(x.v); }

inline bool all_finite(double x) { return std::isfinite(x); }
template <class T>
bool all_finite(const Dual<T>& x) { return all_finite(x.v) && all_finite(x.d); }

} // namespace finsler
