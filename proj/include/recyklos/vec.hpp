#ifndef RECYKLOS_VEC_HPP
#define RECYKLOS_VEC_HPP

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "recyklos/errors.hpp"

namespace recyklos {

using Vector = std::vector<double>;

inline double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

/// y += alpha * x
inline void axpy(double alpha, const Vector& x, Vector& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(Vector& x, double alpha) {
    for (double& v : x) v *= alpha;
}

inline Vector zeros(std::size_t n) { return Vector(n, 0.0); }

inline Vector ones(std::size_t n) { return Vector(n, 1.0); }

inline Vector unit(std::size_t n, std::size_t i) {
    Vector e(n, 0.0);
    e[i] = 1.0;
    return e;
}

inline Vector sub(const Vector& a, const Vector& b) {
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vector add(const Vector& a, const Vector& b) {
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline bool all_finite(const Vector& a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

/// Uniform double in [0,1) from the high 53 bits; identical across platforms
/// for a given engine state (std::uniform_real_distribution is not).
inline double rand_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform in [-1,1)
inline double rand_sym(std::mt19937_64& rng) { return 2.0 * rand_unit(rng) - 1.0; }

inline Vector random_vector(std::size_t n, std::mt19937_64& rng) {
    Vector v(n);
    for (double& x : v) x = rand_sym(rng);
    return v;
}

} // namespace recyklos

#endif
