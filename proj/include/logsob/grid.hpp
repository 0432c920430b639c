#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace logsob {

using Eigen::ArrayXd;
using Eigen::Index;
using Eigen::VectorXd;

using ScalarFn = std::function<double(double)>;
using PointFn = std::function<double(const VectorXd&)>;

namespace detail {

inline std::string describe_point(const VectorXd& x) {
    std::ostringstream os;
    os << "(";
    for (Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ")";
    return os.str();
}

}  // namespace detail

/// One discretized 1-D measure space: dmu = w(x) dx on [lo, hi], carre du
/// champ weight g(x) so that Gamma(f) = g(x) |f'(x)|^2.
///
/// With `staggered` set (the default) the node_count nodes sit at cell
/// midpoints and quadrature is the midpoint rule; otherwise node_count + 1
/// nodes include the endpoints and the trapezoid rule is used. Staggered
/// grids never place a node on a cell boundary, which is how integrable
/// singularities (ln|x|, |x|^-a at declared loci) stay finite at nodes.
struct FactorSpace {
    double lo = 0.0;
    double hi = 1.0;
    int node_count = 64;
    ScalarFn measure_weight;  // empty => 1
    ScalarFn gamma_weight;    // empty => 1
    bool staggered = true;

    double spacing() const { return (hi - lo) / node_count; }
    int num_nodes() const { return staggered ? node_count : node_count + 1; }

    double node(int j) const {
        return staggered ? lo + (j + 0.5) * spacing() : lo + j * spacing();
    }

    ArrayXd nodes() const {
        ArrayXd x(num_nodes());
        for (int j = 0; j < num_nodes(); ++j) x[j] = node(j);
        return x;
    }

    /// Lebesgue cell weights (midpoint or trapezoid).
    ArrayXd lebesgue_weights() const {
        const double h = spacing();
        ArrayXd q = ArrayXd::Constant(num_nodes(), h);
        if (!staggered) {
            q[0] = 0.5 * h;
            q[num_nodes() - 1] = 0.5 * h;
        }
        return q;
    }

    double weight_at(double x) const { return measure_weight ? measure_weight(x) : 1.0; }
    double gamma_at(double x) const { return gamma_weight ? gamma_weight(x) : 1.0; }

    /// mu-quadrature weights: w(x_j) * cell weight.
    ArrayXd mu_weights() const {
        ArrayXd q = lebesgue_weights();
        for (int j = 0; j < num_nodes(); ++j) q[j] *= weight_at(node(j));
        return q;
    }

    void validate() const {
        if (node_count < 16) throw std::invalid_argument("FactorSpace: node_count must be >= 16");
        if (!(hi > lo)) throw std::invalid_argument("FactorSpace: need hi > lo");
        for (int j = 0; j < num_nodes(); ++j) {
            const double w = weight_at(node(j));
            if (!std::isfinite(w) || w < 0.0) {
                std::ostringstream os;
                os << "FactorSpace: measure weight not finite/nonnegative at node x = " << node(j);
                throw std::invalid_argument(os.str());
            }
        }
    }
};

inline FactorSpace lebesgue_factor(double lo, double hi, int n) {
    return FactorSpace{lo, hi, n, {}, {}, true};
}

inline FactorSpace lebesgue_factor(double radius, int n) {
    return lebesgue_factor(-radius, radius, n);
}

/// Declared zero/singular point of a weight: coordinate `coord` equals `value`.
struct SingularLocus {
    int coord = 0;
    double value = 0.0;
};

/// Weight N_i attached to slot i >= 1 of a product space. The function
/// receives only the coordinates (x_0, ..., x_{i-1}); that signature is what
/// enforces the triangular dependence of the semi-direct structure.
struct SlotWeight {
    std::function<double(const VectorXd&)> fn;  // prefix of length = slot index
    std::vector<SingularLocus> singular_loci;
};

inline SlotWeight unit_weight() {
    return SlotWeight{[](const VectorXd&) { return 1.0; }, {}};
}

/// Product of factor spaces with triangular weights N_1..N_n.
struct ProductSpace {
    std::vector<FactorSpace> factors;
    std::vector<SlotWeight> weights;  // weights[i-1] belongs to slot i

    int dim() const { return static_cast<int>(factors.size()); }

    void validate() const {
        if (factors.empty()) throw std::invalid_argument("ProductSpace: no factors");
        if (!weights.empty() && weights.size() != factors.size() - 1)
            throw std::invalid_argument("ProductSpace: need one weight per slot 1..n");
        for (const auto& f : factors) f.validate();
        // Staggered grids must avoid every declared singular locus.
        for (const auto& w : weights) {
            for (const auto& locus : w.singular_loci) {
                const auto& f = factors.at(locus.coord);
                const double h = f.spacing();
                for (int j = 0; j < f.num_nodes(); ++j) {
                    if (std::abs(f.node(j) - locus.value) < 1e-9 * h) {
                        std::ostringstream os;
                        os << "ProductSpace: node of factor " << locus.coord
                           << " hits declared singular point x = " << locus.value
                           << " (use a staggered grid that avoids it)";
                        throw std::invalid_argument(os.str());
                    }
                }
            }
        }
    }
};

inline ProductSpace single_factor_space(FactorSpace f) {
    return ProductSpace{{std::move(f)}, {}};
}

/// Axis-aligned box; the declared support of a test function.
struct Box {
    VectorXd lo, hi;

    bool contains(const VectorXd& x) const {
        for (Index i = 0; i < x.size(); ++i)
            if (x[i] < lo[i] || x[i] > hi[i]) return false;
        return true;
    }

    bool inside(const Box& outer, double margin = 0.0) const {
        for (Index i = 0; i < lo.size(); ++i)
            if (lo[i] < outer.lo[i] + margin || hi[i] > outer.hi[i] - margin) return false;
        return true;
    }

    static Box of(std::initializer_list<double> lo_, std::initializer_list<double> hi_) {
        Box b;
        b.lo = VectorXd(static_cast<Index>(lo_.size()));
        b.hi = VectorXd(static_cast<Index>(hi_.size()));
        Index i = 0;
        for (double v : lo_) b.lo[i++] = v;
        i = 0;
        for (double v : hi_) b.hi[i++] = v;
        return b;
    }
};

inline Box space_box(const ProductSpace& s) {
    Box b;
    b.lo = VectorXd(s.dim());
    b.hi = VectorXd(s.dim());
    for (int i = 0; i < s.dim(); ++i) {
        b.lo[i] = s.factors[i].lo;
        b.hi[i] = s.factors[i].hi;
    }
    return b;
}

/// Evaluable function on a product space. `eval` vanishes outside `support`
/// (evaluation helpers mask it); partials are analytic when supplied,
/// otherwise central differences with step `fd_step` are used.
struct TestFunction {
    int dim = 1;
    PointFn eval;
    std::vector<PointFn> partials;  // empty, or one per coordinate
    Box support;
    double fd_step = 0.0;

    bool has_partials() const { return !partials.empty(); }

    double operator()(const VectorXd& x) const {
        return support.contains(x) ? eval(x) : 0.0;
    }

    /// d f / d x_i, analytic when available else central difference.
    double partial(int i, VectorXd& x) const {
        if (has_partials()) {
            return support.contains(x) ? partials[static_cast<size_t>(i)](x) : 0.0;
        }
        if (!(fd_step > 0.0))
            throw std::invalid_argument("TestFunction: no analytic partial and fd_step unset");
        const double xi = x[i];
        x[i] = xi + fd_step;
        const double fp = (*this)(x);
        x[i] = xi - fd_step;
        const double fm = (*this)(x);
        x[i] = xi;
        return (fp - fm) / (2.0 * fd_step);
    }
};

/// Flattened tensor-product discretization of a ProductSpace. Last factor
/// varies fastest. Construction validates the space once; all arrays are
/// immutable afterwards.
class Discretization {
public:
    explicit Discretization(ProductSpace space) : space_(std::move(space)) {
        space_.validate();
        const int d = space_.dim();
        axes_.reserve(d);
        axis_mu_.reserve(d);
        strides_.assign(d, 1);
        total_ = 1;
        for (int i = 0; i < d; ++i) {
            axes_.push_back(space_.factors[i].nodes());
            axis_mu_.push_back(space_.factors[i].mu_weights());
        }
        for (int i = d - 1; i >= 0; --i) {
            strides_[i] = total_;
            total_ *= axes_[i].size();
        }
        mu_ = ArrayXd::Ones(total_);
        VectorXd pt(d);
        for (Index flat = 0; flat < total_; ++flat) {
            double w = 1.0;
            for (int i = 0; i < d; ++i) w *= axis_mu_[i][axis_index(i, flat)];
            mu_[flat] = w;
        }
        nsq_.resize(space_.weights.size());
    }

    const ProductSpace& space() const { return space_; }
    int dim() const { return space_.dim(); }
    Index size() const { return total_; }
    const ArrayXd& axis(int i) const { return axes_[i]; }
    const ArrayXd& axis_mu(int i) const { return axis_mu_[i]; }
    Index axis_index(int i, Index flat) const { return (flat / strides_[i]) % axes_[i].size(); }
    double coord(int i, Index flat) const { return axes_[i][axis_index(i, flat)]; }

    /// Product-measure quadrature weights (w(x) times Lebesgue cell volume).
    const ArrayXd& mu() const { return mu_; }

    VectorXd point(Index flat) const {
        VectorXd x(dim());
        for (int i = 0; i < dim(); ++i) x[i] = coord(i, flat);
        return x;
    }

    /// N_slot^2 at every node of the full grid (slot in 1..n). Cached.
    const ArrayXd& slot_weight_sq(int slot) const {
        auto& cache = nsq_[static_cast<size_t>(slot - 1)];
        if (cache.size() == 0) {
            const auto& w = space_.weights[static_cast<size_t>(slot - 1)];
            ArrayXd out(total_);
            VectorXd prefix(slot);
            for (Index flat = 0; flat < total_; ++flat) {
                for (int i = 0; i < slot; ++i) prefix[i] = coord(i, flat);
                const double n = w.fn(prefix);
                out[flat] = n * n;
            }
            cache = std::move(out);
        }
        return cache;
    }

    /// gamma weight of factor i broadcast over the full grid.
    ArrayXd gamma_flat(int i) const {
        ArrayXd out(total_);
        const auto& f = space_.factors[i];
        ArrayXd g(axes_[i].size());
        for (Index j = 0; j < g.size(); ++j) g[j] = f.gamma_at(axes_[i][j]);
        for (Index flat = 0; flat < total_; ++flat) out[flat] = g[axis_index(i, flat)];
        return out;
    }

    ArrayXd evaluate(const TestFunction& f) const {
        check_dim(f);
        ArrayXd out(total_);
        VectorXd x(dim());
        for (Index flat = 0; flat < total_; ++flat) {
            fill_point(flat, x);
            out[flat] = f(x);
        }
        return out;
    }

    ArrayXd evaluate(const PointFn& f) const {
        ArrayXd out(total_);
        VectorXd x(dim());
        for (Index flat = 0; flat < total_; ++flat) {
            fill_point(flat, x);
            out[flat] = f(x);
        }
        return out;
    }

    ArrayXd evaluate_partial(const TestFunction& f, int i) const {
        check_dim(f);
        ArrayXd out(total_);
        VectorXd x(dim());
        for (Index flat = 0; flat < total_; ++flat) {
            fill_point(flat, x);
            out[flat] = f.partial(i, x);
        }
        return out;
    }

    /// Integrate node values against the product measure. Non-finite values
    /// are rejected with the offending node's coordinates.
    double integrate(const ArrayXd& values) const {
        if (values.size() != total_)
            throw std::invalid_argument("integrate: values not defined on the full tensor grid");
        if (!values.allFinite()) {
            for (Index flat = 0; flat < total_; ++flat)
                if (!std::isfinite(values[flat]))
                    throw std::runtime_error("integrate: non-finite value at node " +
                                             detail::describe_point(point(flat)));
        }
        return (values * mu_).sum();
    }

    void fill_point(Index flat, VectorXd& x) const {
        for (int i = 0; i < dim(); ++i) x[i] = coord(i, flat);
    }

private:
    void check_dim(const TestFunction& f) const {
        if (f.dim != dim())
            throw std::invalid_argument("TestFunction dimension does not match space");
    }

    ProductSpace space_;
    std::vector<ArrayXd> axes_, axis_mu_;
    std::vector<Index> strides_;
    Index total_ = 0;
    ArrayXd mu_;
    mutable std::vector<ArrayXd> nsq_;
};

}  // namespace logsob
