#pragma once

#include "logsob/composer.hpp"
#include "logsob/functionals.hpp"
#include "logsob/grid.hpp"

#include <cstdint>
#include <random>

namespace logsob {

/// Deterministic recipe for a corpus test function. Every family is smooth
/// and either compactly supported or Gaussian-decaying; identical specs
/// produce bit-identical node values.
struct CorpusSpec {
    enum class Family { Gaussian, Bump, Tensor, Translated, Dilated, RandomTrig };

    Family family = Family::Gaussian;
    VectorXd center;      // gaussian, bump, random_trig
    double scale = 1.0;   // gaussian: f^2 = product heat kernel p_scale
    VectorXd radius;      // bump, random_trig: support half-widths
    double smoothness = 1.0;
    std::vector<CorpusSpec> children;  // tensor factors / transform base
    VectorXd shift;       // translated
    VectorXd exponents;   // dilated
    double lambda = 1.0;  // dilated
    std::uint64_t seed = 0;
    int modes = 4;        // random_trig

    static CorpusSpec gaussian(VectorXd center, double scale) {
        CorpusSpec s;
        s.family = Family::Gaussian;
        s.center = std::move(center);
        s.scale = scale;
        return s;
    }
    static CorpusSpec bump(VectorXd center, VectorXd radius, double smoothness = 1.0) {
        CorpusSpec s;
        s.family = Family::Bump;
        s.center = std::move(center);
        s.radius = std::move(radius);
        s.smoothness = smoothness;
        return s;
    }
    static CorpusSpec tensor(std::vector<CorpusSpec> children) {
        CorpusSpec s;
        s.family = Family::Tensor;
        s.children = std::move(children);
        return s;
    }
    static CorpusSpec translated(CorpusSpec base, VectorXd shift) {
        CorpusSpec s;
        s.family = Family::Translated;
        s.children = {std::move(base)};
        s.shift = std::move(shift);
        return s;
    }
    static CorpusSpec dilated(CorpusSpec base, VectorXd exponents, double lambda) {
        CorpusSpec s;
        s.family = Family::Dilated;
        s.children = {std::move(base)};
        s.exponents = std::move(exponents);
        s.lambda = lambda;
        return s;
    }
    static CorpusSpec random_trig(VectorXd center, VectorXd radius, std::uint64_t seed,
                                  int modes = 4) {
        CorpusSpec s;
        s.family = Family::RandomTrig;
        s.center = std::move(center);
        s.radius = std::move(radius);
        s.seed = seed;
        s.modes = modes;
        return s;
    }
};

namespace detail {

// Mollifier bump on (-1, 1): b(u) = exp(-s / (1 - u^2)), with derivative
// b'(u) = b(u) * (-2 s u / (1 - u^2)^2).
inline double mollifier(double u, double s) {
    const double w = 1.0 - u * u;
    return w > 0.0 ? std::exp(-s / w) : 0.0;
}

inline double mollifier_d(double u, double s) {
    const double w = 1.0 - u * u;
    if (!(w > 0.0)) return 0.0;
    return std::exp(-s / w) * (-2.0 * s * u / (w * w));
}

struct BuiltFn {
    PointFn eval;
    std::vector<PointFn> partials;
    Box support;
};

inline BuiltFn build_corpus_fn(const CorpusSpec& spec);

inline BuiltFn build_gaussian(const CorpusSpec& spec) {
    const Index d = spec.center.size();
    if (d == 0) throw std::invalid_argument("corpus gaussian: empty center");
    if (!(spec.scale > 0.0)) throw std::invalid_argument("corpus gaussian: scale must be > 0");
    const double t = spec.scale;
    const VectorXd c = spec.center;
    const double amp = std::pow(2.0 * Profile::kPi * t, -0.25 * d);
    BuiltFn out;
    out.eval = [=](const VectorXd& x) {
        return amp * std::exp(-(x - c).squaredNorm() / (4.0 * t));
    };
    for (Index i = 0; i < d; ++i) {
        out.partials.push_back([=](const VectorXd& x) {
            return -(x[i] - c[i]) / (2.0 * t) * amp *
                   std::exp(-(x - c).squaredNorm() / (4.0 * t));
        });
    }
    const double reach = 12.0 * std::sqrt(t);
    out.support.lo = c.array() - reach;
    out.support.hi = c.array() + reach;
    return out;
}

inline BuiltFn build_bump(const CorpusSpec& spec) {
    const Index d = spec.center.size();
    if (spec.radius.size() != d) throw std::invalid_argument("corpus bump: radius/center mismatch");
    const VectorXd c = spec.center, r = spec.radius;
    const double s = spec.smoothness;
    BuiltFn out;
    out.eval = [=](const VectorXd& x) {
        double v = 1.0;
        for (Index i = 0; i < d; ++i) v *= mollifier((x[i] - c[i]) / r[i], s);
        return v;
    };
    for (Index i = 0; i < d; ++i) {
        out.partials.push_back([=](const VectorXd& x) {
            double v = mollifier_d((x[i] - c[i]) / r[i], s) / r[i];
            for (Index j = 0; j < d; ++j)
                if (j != i) v *= mollifier((x[j] - c[j]) / r[j], s);
            return v;
        });
    }
    out.support.lo = c - r;
    out.support.hi = c + r;
    return out;
}

inline BuiltFn build_tensor(const CorpusSpec& spec) {
    if (spec.children.empty()) throw std::invalid_argument("corpus tensor: no children");
    std::vector<BuiltFn> parts;
    std::vector<Index> offsets;
    Index dim = 0;
    for (const auto& ch : spec.children) {
        parts.push_back(build_corpus_fn(ch));
        offsets.push_back(dim);
        dim += parts.back().support.lo.size();
    }
    auto shared = std::make_shared<std::vector<BuiltFn>>(std::move(parts));
    auto block = [shared, offsets](const VectorXd& x, size_t j) {
        const Index off = offsets[j];
        const Index len = (*shared)[j].support.lo.size();
        return VectorXd(x.segment(off, len));
    };
    BuiltFn out;
    out.eval = [shared, block](const VectorXd& x) {
        double v = 1.0;
        for (size_t j = 0; j < shared->size(); ++j) v *= (*shared)[j].eval(block(x, j));
        return v;
    };
    out.support.lo = VectorXd(dim);
    out.support.hi = VectorXd(dim);
    for (size_t j = 0; j < shared->size(); ++j) {
        const Index off = offsets[j];
        const Index len = (*shared)[j].support.lo.size();
        out.support.lo.segment(off, len) = (*shared)[j].support.lo;
        out.support.hi.segment(off, len) = (*shared)[j].support.hi;
        for (Index i = 0; i < len; ++i) {
            out.partials.push_back([shared, block, j, i](const VectorXd& x) {
                double v = (*shared)[j].partials[static_cast<size_t>(i)](block(x, j));
                for (size_t l = 0; l < shared->size(); ++l)
                    if (l != j) v *= (*shared)[l].eval(block(x, l));
                return v;
            });
        }
    }
    return out;
}

inline BuiltFn build_translated(const CorpusSpec& spec) {
    if (spec.children.size() != 1) throw std::invalid_argument("corpus translated: need one base");
    BuiltFn base = build_corpus_fn(spec.children[0]);
    const VectorXd s = spec.shift;
    if (s.size() != base.support.lo.size())
        throw std::invalid_argument("corpus translated: shift dimension mismatch");
    BuiltFn out;
    auto eval = base.eval;
    out.eval = [eval, s](const VectorXd& x) { return eval(x - s); };
    for (auto& p : base.partials) {
        auto pc = p;
        out.partials.push_back([pc, s](const VectorXd& x) { return pc(x - s); });
    }
    out.support.lo = base.support.lo + s;
    out.support.hi = base.support.hi + s;
    return out;
}

inline BuiltFn build_dilated(const CorpusSpec& spec) {
    if (spec.children.size() != 1) throw std::invalid_argument("corpus dilated: need one base");
    BuiltFn base = build_corpus_fn(spec.children[0]);
    const Index d = base.support.lo.size();
    if (spec.exponents.size() != d)
        throw std::invalid_argument("corpus dilated: exponent dimension mismatch");
    if (!(spec.lambda > 0.0)) throw std::invalid_argument("corpus dilated: lambda must be > 0");
    VectorXd scale(d);
    for (Index i = 0; i < d; ++i) scale[i] = std::pow(spec.lambda, spec.exponents[i]);
    BuiltFn out;
    auto eval = base.eval;
    out.eval = [eval, scale](const VectorXd& x) { return eval(scale.cwiseProduct(x)); };
    for (Index i = 0; i < d; ++i) {
        auto p = base.partials[static_cast<size_t>(i)];
        const double si = scale[i];
        out.partials.push_back(
            [p, scale, si](const VectorXd& x) { return si * p(scale.cwiseProduct(x)); });
    }
    out.support.lo = base.support.lo.cwiseQuotient(scale).cwiseMin(
        base.support.hi.cwiseQuotient(scale));
    out.support.hi = base.support.lo.cwiseQuotient(scale).cwiseMax(
        base.support.hi.cwiseQuotient(scale));
    return out;
}

inline BuiltFn build_random_trig(const CorpusSpec& spec) {
    const Index d = spec.center.size();
    if (spec.radius.size() != d)
        throw std::invalid_argument("corpus random_trig: radius/center mismatch");
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    struct Mode {
        double coeff;
        VectorXd freq, phase;
    };
    auto modes = std::make_shared<std::vector<Mode>>();
    for (int m = 0; m < spec.modes; ++m) {
        Mode mode;
        mode.coeff = (2.0 * unif(rng) - 1.0) / (m + 1.0);
        mode.freq = VectorXd(d);
        mode.phase = VectorXd(d);
        for (Index i = 0; i < d; ++i) {
            mode.freq[i] = (0.5 + 2.5 * unif(rng)) * Profile::kPi / spec.radius[i];
            mode.phase[i] = 2.0 * Profile::kPi * unif(rng);
        }
        modes->push_back(std::move(mode));
    }
    const VectorXd c = spec.center, r = spec.radius;
    const double s = 0.5;  // gentle envelope

    auto trig_sum = [modes, c](const VectorXd& x) {
        double v = 0.0;
        for (const auto& m : *modes) {
            double prod = m.coeff;
            for (Index i = 0; i < x.size(); ++i)
                prod *= std::cos(m.freq[i] * (x[i] - c[i]) + m.phase[i]);
            v += prod;
        }
        return v;
    };
    auto trig_sum_d = [modes, c](const VectorXd& x, Index k) {
        double v = 0.0;
        for (const auto& m : *modes) {
            double prod = m.coeff;
            for (Index i = 0; i < x.size(); ++i) {
                const double arg = m.freq[i] * (x[i] - c[i]) + m.phase[i];
                prod *= i == k ? -m.freq[i] * std::sin(arg) : std::cos(arg);
            }
            v += prod;
        }
        return v;
    };
    auto envelope = [c, r, s](const VectorXd& x) {
        double v = 1.0;
        for (Index i = 0; i < x.size(); ++i) v *= mollifier((x[i] - c[i]) / r[i], s);
        return v;
    };

    BuiltFn out;
    out.eval = [=](const VectorXd& x) { return envelope(x) * trig_sum(x); };
    for (Index k = 0; k < d; ++k) {
        out.partials.push_back([=](const VectorXd& x) {
            double denv = mollifier_d((x[k] - c[k]) / r[k], s) / r[k];
            for (Index j = 0; j < d; ++j)
                if (j != k) denv *= mollifier((x[j] - c[j]) / r[j], s);
            return denv * trig_sum(x) + envelope(x) * trig_sum_d(x, k);
        });
    }
    out.support.lo = c - r;
    out.support.hi = c + r;
    return out;
}

inline BuiltFn build_corpus_fn(const CorpusSpec& spec) {
    switch (spec.family) {
        case CorpusSpec::Family::Gaussian: return build_gaussian(spec);
        case CorpusSpec::Family::Bump: return build_bump(spec);
        case CorpusSpec::Family::Tensor: return build_tensor(spec);
        case CorpusSpec::Family::Translated: return build_translated(spec);
        case CorpusSpec::Family::Dilated: return build_dilated(spec);
        case CorpusSpec::Family::RandomTrig: return build_random_trig(spec);
    }
    throw std::logic_error("corpus: unknown family");
}

}  // namespace detail

/// Realize a corpus spec inside a truncation box. Gaussian supports are
/// clipped to the box after checking the decay fits; compact supports must
/// lie inside the box.
inline TestFunction make(const CorpusSpec& spec, const Box& truncation) {
    detail::BuiltFn built = detail::build_corpus_fn(spec);
    TestFunction f;
    f.dim = static_cast<int>(built.support.lo.size());
    if (f.dim != truncation.lo.size())
        throw std::invalid_argument("corpus make: spec dimension does not match space");
    if (spec.family == CorpusSpec::Family::Gaussian ||
        (spec.family == CorpusSpec::Family::Tensor)) {
        // Gaussian tails may be clipped by the truncation box, provided the
        // mass outside is negligible: require 8 sqrt(t) to fit.
        Box must_fit = built.support;
        if (spec.family == CorpusSpec::Family::Gaussian) {
            const double reach = 8.0 * std::sqrt(spec.scale);
            must_fit.lo = spec.center.array() - reach;
            must_fit.hi = spec.center.array() + reach;
        }
        if (!must_fit.inside(truncation) && !built.support.inside(truncation))
            throw std::invalid_argument("corpus make: support exceeds truncation box");
        built.support.lo = built.support.lo.cwiseMax(truncation.lo);
        built.support.hi = built.support.hi.cwiseMin(truncation.hi);
    } else if (!built.support.inside(truncation)) {
        throw std::invalid_argument("corpus make: support exceeds truncation box");
    }
    f.eval = std::move(built.eval);
    f.partials = std::move(built.partials);
    f.support = built.support;
    return f;
}

inline TestFunction make(const CorpusSpec& spec, const ProductSpace& space) {
    return make(spec, space_box(space));
}

/// Deterministic mixed corpus filling a box: Gaussians at resonance-avoiding
/// scales, mollifier bumps, tensor mixes, and seeded trigonometric fields.
inline std::vector<CorpusSpec> default_corpus(const Box& box, int count,
                                              std::uint64_t seed = 20180821) {
    const Index d = box.lo.size();
    VectorXd half = 0.5 * (box.hi - box.lo);
    VectorXd mid = 0.5 * (box.hi + box.lo);
    std::vector<CorpusSpec> out;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const double min_half = half.minCoeff();
    for (int k = 0; k < count; ++k) {
        VectorXd center = mid;
        for (Index i = 0; i < d; ++i) center[i] += 0.22 * half[i] * unif(rng);
        switch (k % 4) {
            case 0: {
                const double scale =
                    std::pow(0.11 * min_half, 2) * (0.53 + 0.41 * std::fmod(0.37 * k + 0.19, 1.0));
                out.push_back(CorpusSpec::gaussian(center, scale));
                break;
            }
            case 1: {
                VectorXd radius(d);
                for (Index i = 0; i < d; ++i)
                    radius[i] = half[i] * (0.35 + 0.2 * std::abs(unif(rng)));
                out.push_back(CorpusSpec::bump(center, radius, 0.7 + 0.6 * std::abs(unif(rng))));
                break;
            }
            case 2: {
                std::vector<CorpusSpec> parts;
                for (Index i = 0; i < d; ++i) {
                    VectorXd c1(1), r1(1);
                    c1[0] = center[i];
                    if (i % 2 == 0) {
                        const double scale = std::pow(0.1 * half[i], 2) *
                                             (0.61 + 0.31 * std::fmod(0.29 * k + 0.41, 1.0));
                        parts.push_back(CorpusSpec::gaussian(c1, scale));
                    } else {
                        r1[0] = half[i] * (0.3 + 0.15 * std::abs(unif(rng)));
                        parts.push_back(CorpusSpec::bump(c1, r1, 1.0));
                    }
                }
                out.push_back(CorpusSpec::tensor(std::move(parts)));
                break;
            }
            default: {
                VectorXd radius(d);
                for (Index i = 0; i < d; ++i)
                    radius[i] = half[i] * (0.4 + 0.2 * std::abs(unif(rng)));
                out.push_back(CorpusSpec::random_trig(center, radius, seed + 7919 * k, 4));
                break;
            }
        }
    }
    return out;
}

// --- metabelian group inequality -------------------------------------------

struct MetabelianOptions {
    int nodes_a = 384;
    int nodes_n = 256;
    double pad = 1.3;  // box = support scaled about its midpoint
};

/// Semi-direct structure of R acting on R^Q: slot 0 is the a-coordinate,
/// slots 1..Q carry weight N_i(a) = e^a. Flat profiles in every slot give
/// the modified inequality with constant -(Q+1)/2 ln(pi e^2 t) and potential
/// -Q a.
inline SemiDirectLSI metabelian_lsi(int Q, const Box& box, int nodes_a, int nodes_n) {
    SemiDirectLSI lsi;
    lsi.space.factors.push_back(
        FactorSpace{box.lo[0], box.hi[0], nodes_a, {}, {}, true});
    for (int i = 1; i <= Q; ++i)
        lsi.space.factors.push_back(FactorSpace{box.lo[i], box.hi[i], nodes_n, {}, {}, true});
    for (int i = 1; i <= Q; ++i) {
        lsi.space.weights.push_back(
            SlotWeight{[](const VectorXd& prefix) { return std::exp(prefix[0]); }, {}});
        lsi.factor_profiles.push_back(Profile::flat_euclidean(1));
    }
    lsi.slot0 = Profile::flat_euclidean(1);
    return lsi;
}

/// Modified log-Sobolev report for the metabelian group at diagonal scale t.
inline InequalityReport metabelian_verify(const TestFunction& f, double t, int Q,
                                          const MetabelianOptions& opts = {}) {
    if (f.dim != Q + 1) throw std::invalid_argument("metabelian_verify: f must live on R^{Q+1}");
    Box box;
    const VectorXd mid = 0.5 * (f.support.lo + f.support.hi);
    box.lo = mid + opts.pad * (f.support.lo - mid);
    box.hi = mid + opts.pad * (f.support.hi - mid);
    SemiDirectLSI lsi = metabelian_lsi(Q, box, opts.nodes_a, opts.nodes_n);
    return SemiDirectEvaluator(std::move(lsi)).diagonal(f, t);
}

// --- change of variables (pushforward) --------------------------------------

struct PushforwardOptions {
    int nodes_r = 8192;
    int nodes_a = 2048;
    int nodes_n = 256;
    double r_min = std::exp(-4.0);
};

/// Term-by-term comparison of the metabelian inequality for f = g o Phi,
/// Phi(a, n) = (e^a, n), against the transformed inequality for g on
/// (0, inf) x R^Q with measure dr/r dn, operator -r^2 (d_r^2 + sum d_n^2)
/// and potential -Q ln r. The change of variables is exact, so paired terms
/// agree up to quadrature error.
struct PushforwardCheck {
    // term order: entropy, dirichlet (x t), potential, constant
    std::array<double, 4> metabelian{};
    std::array<double, 4> transformed{};
    std::array<double, 4> rel_gap{};
    double max_rel_gap = 0.0;
};

inline PushforwardCheck pushforward_check(const TestFunction& g, double t, int Q,
                                          const PushforwardOptions& opts = {}) {
    if (g.dim != Q + 1) throw std::invalid_argument("pushforward_check: g must live on (r, n)");
    if (!g.has_partials())
        throw std::invalid_argument("pushforward_check: g needs analytic partials");
    const double r_lo_supp = g.support.lo[0];
    const double r_hi_supp = g.support.hi[0];
    if (!(r_lo_supp > 0.0))
        throw std::invalid_argument("pushforward_check: support must stay away from r = 0");

    // transformed side: r-factor with measure dr/r and carre du champ r^2
    const double r_lo = std::min(opts.r_min, 0.5 * r_lo_supp);
    const double r_hi = 1.15 * r_hi_supp;
    ProductSpace rs;
    {
        FactorSpace fr{r_lo, r_hi, opts.nodes_r, [](double r) { return 1.0 / r; },
                       [](double r) { return r * r; }, true};
        rs.factors.push_back(fr);
        for (int i = 1; i <= Q; ++i) {
            const double pad = 0.15 * (g.support.hi[i] - g.support.lo[i]) + 1e-9;
            rs.factors.push_back(
                FactorSpace{g.support.lo[i] - pad, g.support.hi[i] + pad, opts.nodes_n, {}, {},
                            true});
            rs.weights.push_back(
                SlotWeight{[](const VectorXd& prefix) { return prefix[0]; },
                           {SingularLocus{0, 0.0}}});
        }
    }
    Discretization dr(rs);

    // metabelian side: a = ln r
    ProductSpace as;
    {
        as.factors.push_back(
            FactorSpace{std::log(r_lo), std::log(r_hi), opts.nodes_a, {}, {}, true});
        for (int i = 1; i <= Q; ++i) {
            as.factors.push_back(rs.factors[static_cast<size_t>(i)]);
            as.weights.push_back(
                SlotWeight{[](const VectorXd& prefix) { return std::exp(prefix[0]); }, {}});
        }
    }
    Discretization da(as);

    TestFunction f;  // f = g o Phi
    f.dim = g.dim;
    {
        auto geval = g.eval;
        auto to_r = [](const VectorXd& x) {
            VectorXd y = x;
            y[0] = std::exp(x[0]);
            return y;
        };
        f.eval = [geval, to_r](const VectorXd& x) { return geval(to_r(x)); };
        auto g0 = g.partials[0];
        f.partials.push_back([g0, to_r](const VectorXd& x) {
            const VectorXd y = to_r(x);
            return y[0] * g0(y);
        });
        for (int i = 1; i <= Q; ++i) {
            auto gi = g.partials[static_cast<size_t>(i)];
            f.partials.push_back([gi, to_r](const VectorXd& x) { return gi(to_r(x)); });
        }
        f.support = g.support;
        f.support.lo[0] = std::log(r_lo_supp);
        f.support.hi[0] = std::log(r_hi_supp);
    }

    PushforwardCheck out;
    const double const_coeff = -(Q + 1) / 2.0 * std::log(Profile::kPiE2 * t);

    // metabelian side
    {
        const double n2 = norm_sq(da, f);
        out.metabelian[0] = entropy(da, f);
        out.metabelian[1] = t * dirichlet_energy(da, f, VectorXd::Ones(Q + 1)).total;
        out.metabelian[2] =
            -Q * potential_integral(da, f, [](const VectorXd& x) { return x[0]; }, false).value;
        out.metabelian[3] = const_coeff * n2;
    }
    // transformed side
    {
        const double n2 = norm_sq(dr, g);
        out.transformed[0] = entropy(dr, g);
        out.transformed[1] = t * dirichlet_energy(dr, g, VectorXd::Ones(Q + 1)).total;
        out.transformed[2] =
            -Q *
            potential_integral(dr, g, [](const VectorXd& x) { return std::log(x[0]); }, false)
                .value;
        out.transformed[3] = const_coeff * n2;
    }
    for (int k = 0; k < 4; ++k) {
        out.rel_gap[static_cast<size_t>(k)] =
            std::abs(out.metabelian[static_cast<size_t>(k)] -
                     out.transformed[static_cast<size_t>(k)]) /
            (1.0 + std::abs(out.metabelian[static_cast<size_t>(k)]) +
             std::abs(out.transformed[static_cast<size_t>(k)]));
        out.max_rel_gap = std::max(out.max_rel_gap, out.rel_gap[static_cast<size_t>(k)]);
    }
    return out;
}

}  // namespace logsob
