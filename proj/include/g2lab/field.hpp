#pragma once

#include "g2lab/chart.hpp"
#include "g2lab/jet.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

namespace g2lab {

class FieldNode;
class GroupNode;

/// Per-point memo table. One cache serves one (chart, point) evaluation; the
/// verify drivers reuse a cache across all fields sampled at the same point.
struct EvalCache {
    std::unordered_map<const void*, std::array<std::unique_ptr<Jet>, 4>> jets;
    std::unordered_map<const void*, std::array<std::shared_ptr<const std::vector<Jet>>, 4>> groups;
};

class FieldNode {
public:
    explicit FieldNode(Chart chart) : chart_(std::move(chart)) {}
    virtual ~FieldNode() = default;

    const Chart& chart() const { return chart_; }

    Jet eval(std::span<const double> p, int order, EvalCache& cache) const {
        auto& slots = cache.jets[this];
        if (slots[order]) return *slots[order];
        Jet j = compute(p, order, cache);
        slots[order] = std::make_unique<Jet>(j);
        return j;
    }

    virtual std::optional<double> constant_value() const { return std::nullopt; }
    virtual std::optional<int> coordinate_index() const { return std::nullopt; }

protected:
    virtual Jet compute(std::span<const double> p, int order, EvalCache& cache) const = 0;

private:
    Chart chart_;
};

using NodePtr = std::shared_ptr<const FieldNode>;

/// A batch of jets computed together at a point (matrix inverses, Hodge
/// coefficients). Elements are exposed as ordinary fields.
class GroupNode {
public:
    explicit GroupNode(Chart chart) : chart_(std::move(chart)) {}
    virtual ~GroupNode() = default;

    const Chart& chart() const { return chart_; }

    std::shared_ptr<const std::vector<Jet>> eval(std::span<const double> p, int order,
                                                 EvalCache& cache) const {
        auto& slots = cache.groups[this];
        if (slots[order]) return slots[order];
        auto out = std::make_shared<std::vector<Jet>>();
        compute(p, order, cache, *out);
        slots[order] = out;
        return out;
    }

protected:
    virtual void compute(std::span<const double> p, int order, EvalCache& cache,
                         std::vector<Jet>& out) const = 0;

private:
    Chart chart_;
};

using GroupPtr = std::shared_ptr<const GroupNode>;

/// Smooth scalar function on a chart, evaluable to a Jet of order <= 3.
/// Value-semantic handle to an immutable expression DAG.
class ScalarField {
public:
    ScalarField() = default;
    ScalarField(Chart chart, NodePtr node) : chart_(std::move(chart)), node_(std::move(node)) {}

    const Chart& chart() const { return chart_; }
    const NodePtr& node() const { return node_; }
    bool valid() const { return static_cast<bool>(node_); }

    Jet eval(std::span<const double> p, int order, EvalCache* cache = nullptr) const {
        if (!node_) throw ConstructionError("evaluating empty field");
        if (order < 0 || order > 3) throw UnsupportedOrder("order must be 0..3");
        chart_->require_inside(p);
        if (cache) return node_->eval(p, order, *cache);
        EvalCache local;
        return node_->eval(p, order, local);
    }

    double value(std::span<const double> p, EvalCache* cache = nullptr) const {
        return eval(p, 0, cache).v;
    }

    std::optional<double> constant_value() const {
        return node_ ? node_->constant_value() : std::nullopt;
    }
    bool is_zero() const {
        auto c = constant_value();
        return c && *c == 0.0;
    }

private:
    Chart chart_;
    NodePtr node_;
};

namespace detail {

class ConstNode final : public FieldNode {
public:
    ConstNode(Chart chart, double v) : FieldNode(std::move(chart)), v_(v) {}
    std::optional<double> constant_value() const override { return v_; }

protected:
    Jet compute(std::span<const double>, int order, EvalCache&) const override {
        return Jet::constant(chart()->dim(), order, v_);
    }

private:
    double v_;
};

class CoordNode final : public FieldNode {
public:
    CoordNode(Chart chart, int i) : FieldNode(std::move(chart)), i_(i) {}
    std::optional<int> coordinate_index() const override { return i_; }

protected:
    Jet compute(std::span<const double> p, int order, EvalCache&) const override {
        return Jet::coordinate(chart()->dim(), order, i_, p[i_]);
    }

private:
    int i_;
};

enum class BinOp { Add, Sub, Mul, Div };

class BinNode final : public FieldNode {
public:
    BinNode(BinOp op, ScalarField a, ScalarField b)
        : FieldNode(a.chart()), op_(op), a_(std::move(a)), b_(std::move(b)) {}

protected:
    Jet compute(std::span<const double> p, int order, EvalCache& cache) const override {
        Jet ja = a_.node()->eval(p, order, cache);
        Jet jb = b_.node()->eval(p, order, cache);
        switch (op_) {
        case BinOp::Add: return ja + jb;
        case BinOp::Sub: return ja - jb;
        case BinOp::Mul: return ja * jb;
        case BinOp::Div: return ja / jb;
        }
        throw ConstructionError("unreachable");
    }

private:
    BinOp op_;
    ScalarField a_, b_;
};

enum class UnOp { Neg, Sqrt, Log, Sin, Cos, Exp };

class UnaryNode final : public FieldNode {
public:
    UnaryNode(UnOp op, ScalarField a) : FieldNode(a.chart()), op_(op), a_(std::move(a)) {}

protected:
    Jet compute(std::span<const double> p, int order, EvalCache& cache) const override {
        Jet j = a_.node()->eval(p, order, cache);
        switch (op_) {
        case UnOp::Neg: return -j;
        case UnOp::Sqrt: return jet_sqrt(j);
        case UnOp::Log: return jet_log(j);
        case UnOp::Sin: return jet_sin(j);
        case UnOp::Cos: return jet_cos(j);
        case UnOp::Exp: return jet_exp(j);
        }
        throw ConstructionError("unreachable");
    }

private:
    UnOp op_;
    ScalarField a_;
};

class PowNode final : public FieldNode {
public:
    PowNode(ScalarField a, double p, bool signed_root)
        : FieldNode(a.chart()), a_(std::move(a)), p_(p), signed_(signed_root) {}

protected:
    Jet compute(std::span<const double> p, int order, EvalCache& cache) const override {
        Jet j = a_.node()->eval(p, order, cache);
        return signed_ ? jet_signed_pow(j, p_) : jet_pow(j, p_);
    }

private:
    ScalarField a_;
    double p_;
    bool signed_;
};

class PartialNode final : public FieldNode {
public:
    PartialNode(ScalarField a, int i) : FieldNode(a.chart()), a_(std::move(a)), i_(i) {}

protected:
    Jet compute(std::span<const double> p, int order, EvalCache& cache) const override {
        if (order >= 3)
            throw UnsupportedOrder("partial derivative field supports order <= 2");
        Jet j = a_.node()->eval(p, order + 1, cache);
        Jet r(j.dim, order);
        r.v = j.g[i_];
        if (order >= 1)
            for (int k = 0; k < j.dim; ++k) r.g[k] = j.hess(i_, k);
        if (order >= 2)
            for (int k = 0; k < j.dim; ++k)
                for (int l = k; l < j.dim; ++l) r.hess_ref(k, l) = j.third(i_, k, l);
        return r;
    }

private:
    ScalarField a_;
    int i_;
};

} // namespace detail

/// Evaluator of a univariate function with derivatives through order 3
/// (closed-form solutions of ODEs compose into the field algebra through it).
struct Univariate {
    virtual ~Univariate() = default;
    virtual std::array<double, 4> eval(double x) const = 0;
};

namespace detail {

class Compose1Node final : public FieldNode {
public:
    Compose1Node(ScalarField inner, std::shared_ptr<const Univariate> fn)
        : FieldNode(inner.chart()), inner_(std::move(inner)), fn_(std::move(fn)) {}

protected:
    Jet compute(std::span<const double> p, int order, EvalCache& cache) const override {
        Jet j = inner_.node()->eval(p, order, cache);
        return compose(j, fn_->eval(j.v));
    }

private:
    ScalarField inner_;
    std::shared_ptr<const Univariate> fn_;
};

/// Re-roots a field living on a larger chart onto a sub-chart: missing
/// coordinates are frozen at fill values and their derivative slots dropped.
/// The subtree gets a fresh cache because its point depends on the fills.
class SliceNode final : public FieldNode {
public:
    SliceNode(Chart sub, ScalarField big, std::vector<int> sub_to_big,
              std::vector<std::pair<int, double>> fills)
        : FieldNode(std::move(sub)), big_(std::move(big)), sub_to_big_(std::move(sub_to_big)),
          fills_(std::move(fills)) {}

protected:
    Jet compute(std::span<const double> p, int order, EvalCache&) const override {
        std::array<double, kMaxDim> q{};
        for (std::size_t s = 0; s < sub_to_big_.size(); ++s) q[sub_to_big_[s]] = p[s];
        for (auto& [i, v] : fills_) q[i] = v;
        EvalCache fresh;
        Jet inner = big_.node()->eval(std::span<const double>(q.data(), big_.chart()->dim()),
                                      order, fresh);
        Jet r(chart()->dim(), order);
        r.v = inner.v;
        const int d = r.dim;
        if (order >= 1)
            for (int i = 0; i < d; ++i) r.g[i] = inner.g[sub_to_big_[i]];
        if (order >= 2)
            for (int i = 0; i < d; ++i)
                for (int j = i; j < d; ++j)
                    r.hess_ref(i, j) = inner.hess(sub_to_big_[i], sub_to_big_[j]);
        if (order >= 3)
            for (int i = 0; i < d; ++i)
                for (int j = i; j < d; ++j)
                    for (int k = j; k < d; ++k)
                        r.third_ref(i, j, k) =
                            inner.third(sub_to_big_[i], sub_to_big_[j], sub_to_big_[k]);
        return r;
    }

private:
    ScalarField big_;
    std::vector<int> sub_to_big_;
    std::vector<std::pair<int, double>> fills_;
};

/// Cylindrical extension of a field to a larger chart (new partials vanish).
class ExtendNode final : public FieldNode {
public:
    ExtendNode(Chart big, ScalarField sub, std::vector<int> sub_to_big)
        : FieldNode(std::move(big)), sub_(std::move(sub)), sub_to_big_(std::move(sub_to_big)) {}

protected:
    Jet compute(std::span<const double> p, int order, EvalCache& cache) const override {
        std::array<double, kMaxDim> q{};
        const int sd = sub_.chart()->dim();
        for (int s = 0; s < sd; ++s) q[s] = p[sub_to_big_[s]];
        Jet inner = sub_.node()->eval(std::span<const double>(q.data(), sd), order, cache);
        Jet r(chart()->dim(), order);
        r.v = inner.v;
        if (order >= 1)
            for (int i = 0; i < sd; ++i) r.g[sub_to_big_[i]] = inner.g[i];
        if (order >= 2)
            for (int i = 0; i < sd; ++i)
                for (int j = i; j < sd; ++j)
                    r.hess_ref(sub_to_big_[i], sub_to_big_[j]) = inner.hess(i, j);
        if (order >= 3)
            for (int i = 0; i < sd; ++i)
                for (int j = i; j < sd; ++j)
                    for (int k = j; k < sd; ++k)
                        r.third_ref(sub_to_big_[i], sub_to_big_[j], sub_to_big_[k]) =
                            inner.third(i, j, k);
        return r;
    }

private:
    ScalarField sub_;
    std::vector<int> sub_to_big_;
};

class GroupElementNode final : public FieldNode {
public:
    GroupElementNode(GroupPtr group, int index)
        : FieldNode(group->chart()), group_(std::move(group)), index_(index) {}

protected:
    Jet compute(std::span<const double> p, int order, EvalCache& cache) const override {
        auto values = group_->eval(p, order, cache);
        return values->at(index_);
    }

private:
    GroupPtr group_;
    int index_;
};

} // namespace detail

// ---------------------------------------------------------------------------
// Field construction
// ---------------------------------------------------------------------------

inline ScalarField constant(const Chart& chart, double v) {
    return {chart, std::make_shared<detail::ConstNode>(chart, v)};
}

inline ScalarField coordinate(const Chart& chart, int i) {
    if (i < 0 || i >= chart->dim()) throw ConstructionError("coordinate index out of range");
    return {chart, std::make_shared<detail::CoordNode>(chart, i)};
}

inline ScalarField coordinate(const Chart& chart, const std::string& name) {
    return coordinate(chart, chart->index_of(name));
}

inline ScalarField group_element(const GroupPtr& group, int index) {
    return {group->chart(), std::make_shared<detail::GroupElementNode>(group, index)};
}

inline ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    require_same_chart(a.chart(), b.chart());
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    auto ca = a.constant_value(), cb = b.constant_value();
    if (ca && cb) return constant(a.chart(), *ca + *cb);
    return {a.chart(), std::make_shared<detail::BinNode>(detail::BinOp::Add, a, b)};
}

inline ScalarField operator-(const ScalarField& a) {
    auto c = a.constant_value();
    if (c) return constant(a.chart(), -*c);
    return {a.chart(), std::make_shared<detail::UnaryNode>(detail::UnOp::Neg, a)};
}

inline ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    require_same_chart(a.chart(), b.chart());
    if (b.is_zero()) return a;
    if (a.is_zero()) return -b;
    auto ca = a.constant_value(), cb = b.constant_value();
    if (ca && cb) return constant(a.chart(), *ca - *cb);
    return {a.chart(), std::make_shared<detail::BinNode>(detail::BinOp::Sub, a, b)};
}

inline ScalarField operator*(const ScalarField& a, const ScalarField& b) {
    require_same_chart(a.chart(), b.chart());
    if (a.is_zero() || b.is_zero()) return constant(a.chart(), 0.0);
    auto ca = a.constant_value(), cb = b.constant_value();
    if (ca && cb) return constant(a.chart(), *ca * *cb);
    if (ca && *ca == 1.0) return b;
    if (cb && *cb == 1.0) return a;
    return {a.chart(), std::make_shared<detail::BinNode>(detail::BinOp::Mul, a, b)};
}

inline ScalarField operator/(const ScalarField& a, const ScalarField& b) {
    require_same_chart(a.chart(), b.chart());
    if (a.is_zero()) return constant(a.chart(), 0.0);
    auto cb = b.constant_value();
    if (cb && *cb == 1.0) return a;
    return {a.chart(), std::make_shared<detail::BinNode>(detail::BinOp::Div, a, b)};
}

inline ScalarField operator+(const ScalarField& a, double s) { return a + constant(a.chart(), s); }
inline ScalarField operator+(double s, const ScalarField& a) { return a + s; }
inline ScalarField operator-(const ScalarField& a, double s) { return a - constant(a.chart(), s); }
inline ScalarField operator-(double s, const ScalarField& a) { return constant(a.chart(), s) - a; }
inline ScalarField operator*(const ScalarField& a, double s) { return a * constant(a.chart(), s); }
inline ScalarField operator*(double s, const ScalarField& a) { return a * s; }
inline ScalarField operator/(const ScalarField& a, double s) { return a * (1.0 / s); }
inline ScalarField operator/(double s, const ScalarField& a) { return constant(a.chart(), s) / a; }

inline ScalarField sqrt(const ScalarField& a) {
    return {a.chart(), std::make_shared<detail::UnaryNode>(detail::UnOp::Sqrt, a)};
}
inline ScalarField log(const ScalarField& a) {
    return {a.chart(), std::make_shared<detail::UnaryNode>(detail::UnOp::Log, a)};
}
inline ScalarField sin(const ScalarField& a) {
    return {a.chart(), std::make_shared<detail::UnaryNode>(detail::UnOp::Sin, a)};
}
inline ScalarField cos(const ScalarField& a) {
    return {a.chart(), std::make_shared<detail::UnaryNode>(detail::UnOp::Cos, a)};
}
inline ScalarField exp(const ScalarField& a) {
    return {a.chart(), std::make_shared<detail::UnaryNode>(detail::UnOp::Exp, a)};
}
inline ScalarField pow(const ScalarField& a, double p) {
    return {a.chart(), std::make_shared<detail::PowNode>(a, p, false)};
}
inline ScalarField signed_pow(const ScalarField& a, double p) {
    return {a.chart(), std::make_shared<detail::PowNode>(a, p, true)};
}
inline ScalarField compose(const ScalarField& inner, std::shared_ptr<const Univariate> fn) {
    return {inner.chart(), std::make_shared<detail::Compose1Node>(inner, std::move(fn))};
}

/// Exact partial-derivative field. Supports evaluation to order 2 only.
inline ScalarField partial(const ScalarField& a, int i) {
    if (i < 0 || i >= a.chart()->dim()) throw ConstructionError("partial index out of range");
    if (a.constant_value()) return constant(a.chart(), 0.0);
    if (auto ci = a.node()->coordinate_index())
        return constant(a.chart(), *ci == i ? 1.0 : 0.0);
    return {a.chart(), std::make_shared<detail::PartialNode>(a, i)};
}

inline ScalarField partial(const ScalarField& a, const std::string& name) {
    return partial(a, a.chart()->index_of(name));
}

namespace detail {

inline std::vector<int> name_injection(const Chart& sub, const Chart& big) {
    std::vector<int> map(sub->dim());
    for (int i = 0; i < sub->dim(); ++i) map[i] = big->index_of(sub->name(i));
    return map;
}

} // namespace detail

/// Extend a field on a sub-chart to a chart with more coordinates.
inline ScalarField extend_to(const ScalarField& f, const Chart& big) {
    if (f.chart()->same_names(*big)) return f;
    auto c = f.constant_value();
    if (c) return constant(big, *c);
    auto map = detail::name_injection(f.chart(), big);
    return {big, std::make_shared<detail::ExtendNode>(big, f, std::move(map))};
}

/// Restrict a field to a sub-chart; coordinates not present in `sub` are held
/// at the given fill values. Exact slicing of the jet.
inline ScalarField slice_to(const ScalarField& f, const Chart& sub,
                            const std::vector<std::pair<std::string, double>>& fills) {
    if (f.chart()->same_names(*sub)) return f;
    auto c = f.constant_value();
    if (c) return constant(sub, *c);
    auto map = detail::name_injection(sub, f.chart());
    std::vector<std::pair<int, double>> ifills;
    ifills.reserve(fills.size());
    for (auto& [name, v] : fills) ifills.emplace_back(f.chart()->index_of(name), v);
    return {sub, std::make_shared<detail::SliceNode>(sub, f, std::move(map), std::move(ifills))};
}

} // namespace g2lab
