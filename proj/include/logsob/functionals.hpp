#pragma once

#include "logsob/grid.hpp"

#include <cmath>
#include <optional>

namespace logsob {

/// Composite tensor-product quadrature of node values against the product
/// measure (midpoint rule on staggered factors, trapezoid otherwise).
inline double integrate(const Discretization& d, const ArrayXd& values) {
    return d.integrate(values);
}

inline double integrate(const ProductSpace& space, const ArrayXd& values) {
    return Discretization(space).integrate(values);
}

/// Same with one Richardson step: integrates f on the grid and on a grid with
/// doubled node counts; `error_estimate` is |refined - coarse| / 3 (order 2).
struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
};

inline ProductSpace refined(const ProductSpace& space, int factor = 2) {
    ProductSpace r = space;
    for (auto& f : r.factors) f.node_count *= factor;
    return r;
}

inline QuadratureResult integrate_with_estimate(const ProductSpace& space, const PointFn& f) {
    Discretization coarse(space), fine(refined(space));
    const double c = coarse.integrate(coarse.evaluate(f));
    const double r = fine.integrate(fine.evaluate(f));
    return {c, std::abs(r - c) / 3.0};
}

inline double norm_sq(const Discretization& d, const TestFunction& f) {
    return d.integrate(d.evaluate(f).square());
}

/// Entropy of f^2 relative to the space's measure:
///   int f^2 ln(f^2 / ||f||^2) dmu,  with 0 ln 0 = 0 nodewise.
inline double entropy(const Discretization& d, const TestFunction& f) {
    const ArrayXd fsq = d.evaluate(f).square();
    const double n2 = d.integrate(fsq);
    if (!(n2 > 0.0)) throw std::invalid_argument("entropy: null function");
    const double ln_n2 = std::log(n2);
    ArrayXd integrand(fsq.size());
    for (Index i = 0; i < fsq.size(); ++i)
        integrand[i] = fsq[i] > 0.0 ? fsq[i] * (std::log(fsq[i]) - ln_n2) : 0.0;
    return d.integrate(integrand);
}

inline double entropy(const ProductSpace& space, const TestFunction& f) {
    return entropy(Discretization(space), f);
}

/// Unnormalized variant int f^2 ln f^2 dmu used by the intermediate-step
/// inequality, same 0 ln 0 convention.
inline double entropy_unnormalized(const Discretization& d, const ArrayXd& fsq) {
    ArrayXd integrand(fsq.size());
    for (Index i = 0; i < fsq.size(); ++i)
        integrand[i] = fsq[i] > 0.0 ? fsq[i] * std::log(fsq[i]) : 0.0;
    return d.integrate(integrand);
}

struct DirichletBreakdown {
    double total = 0.0;
    std::vector<double> per_slot;  // t_i * int N_i^2 g_i |d_i f|^2 dmu
    std::vector<double> unscaled;  // int N_i^2 g_i |d_i f|^2 dmu
};

/// Per-slot energies int N_i^2 g_i |d_i f|^2 dmu (slot 0 has N == 1).
inline std::vector<double> slot_energies(const Discretization& d, const TestFunction& f) {
    std::vector<double> out;
    out.reserve(static_cast<size_t>(d.dim()));
    for (int i = 0; i < d.dim(); ++i) {
        ArrayXd p = d.evaluate_partial(f, i);
        ArrayXd integrand = d.gamma_flat(i) * p.square();
        if (i > 0 && !d.space().weights.empty()) integrand *= d.slot_weight_sq(i);
        out.push_back(d.integrate(integrand));
    }
    return out;
}

/// Weighted Dirichlet energy int [t_0 g_0 |d_0 f|^2 + sum t_i N_i^2 g_i |d_i f|^2] dmu.
inline DirichletBreakdown dirichlet_energy(const Discretization& d, const TestFunction& f,
                                           const VectorXd& slot_scales) {
    if (slot_scales.size() != d.dim())
        throw std::invalid_argument("dirichlet_energy: need one scale per slot");
    for (Index i = 0; i < slot_scales.size(); ++i)
        if (!(slot_scales[i] > 0.0))
            throw std::invalid_argument("dirichlet_energy: slot scales must be positive");
    DirichletBreakdown b;
    b.unscaled = slot_energies(d, f);
    b.per_slot.resize(b.unscaled.size());
    for (size_t i = 0; i < b.unscaled.size(); ++i) {
        b.per_slot[i] = slot_scales[static_cast<Index>(i)] * b.unscaled[i];
        b.total += b.per_slot[i];
    }
    return b;
}

inline DirichletBreakdown dirichlet_energy(const ProductSpace& space, const TestFunction& f,
                                           const VectorXd& slot_scales) {
    return dirichlet_energy(Discretization(space), f, slot_scales);
}

struct PotentialIntegral {
    double value = 0.0;
    double error_estimate = 0.0;  // from one grid refinement
};

/// int V f^2 dmu. A non-finite V at a node names the node: that signals a
/// grid that failed to stagger a singularity of V.
inline PotentialIntegral potential_integral(const Discretization& d, const TestFunction& f,
                                            const PointFn& V, bool with_estimate = true) {
    const ArrayXd fsq = d.evaluate(f).square();
    ArrayXd v(d.size());
    VectorXd x(d.dim());
    for (Index flat = 0; flat < d.size(); ++flat) {
        d.fill_point(flat, x);
        v[flat] = V(x);
        if (!std::isfinite(v[flat]))
            throw std::runtime_error("potential_integral: V not finite at node " +
                                     detail::describe_point(x));
    }
    PotentialIntegral out;
    out.value = d.integrate(v * fsq);
    if (with_estimate) {
        Discretization fine(refined(d.space()));
        const ArrayXd fsq2 = fine.evaluate(f).square();
        ArrayXd v2(fine.size());
        VectorXd y(fine.dim());
        for (Index flat = 0; flat < fine.size(); ++flat) {
            fine.fill_point(flat, y);
            v2[flat] = V(y);
            if (!std::isfinite(v2[flat]))
                throw std::runtime_error("potential_integral: V not finite at node " +
                                         detail::describe_point(y));
        }
        out.error_estimate = std::abs(fine.integrate(v2 * fsq2) - out.value);
    }
    return out;
}

inline PotentialIntegral potential_integral(const ProductSpace& space, const TestFunction& f,
                                            const PointFn& V, bool with_estimate = true) {
    return potential_integral(Discretization(space), f, V, with_estimate);
}

}  // namespace logsob
