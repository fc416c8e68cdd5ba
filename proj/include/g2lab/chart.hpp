#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace g2lab {

inline constexpr int kMaxDim = 7;

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ChartMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnsupportedOrder : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SingularMetric : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConstructionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Open interval constraint for one coordinate. Infinite endpoints allowed.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double x) const { return x > lo && x < hi; }
};

/// A coordinate chart: ordered coordinate names, open domain box, orientation.
/// Charts are immutable; fields and forms hold shared handles to them.
class ChartData {
public:
    ChartData(std::vector<std::string> names, std::vector<Interval> box, int orientation)
        : names_(std::move(names)), box_(std::move(box)), orientation_(orientation) {
        if (names_.empty() || names_.size() > kMaxDim)
            throw ConstructionError("chart dimension must be 1.." + std::to_string(kMaxDim));
        if (box_.size() != names_.size()) throw ConstructionError("domain box size mismatch");
        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (!(box_[i].lo < box_[i].hi)) throw ConstructionError("empty domain box");
            for (std::size_t j = i + 1; j < names_.size(); ++j)
                if (names_[i] == names_[j]) throw ConstructionError("duplicate coordinate name " + names_[i]);
        }
    }

    int dim() const { return static_cast<int>(names_.size()); }
    int orientation() const { return orientation_; }
    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(int i) const { return names_.at(i); }
    const Interval& interval(int i) const { return box_.at(i); }

    int index_of(const std::string& name) const {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name) return static_cast<int>(i);
        throw ChartMismatch("no coordinate named " + name);
    }

    bool contains(std::span<const double> p) const {
        if (static_cast<int>(p.size()) != dim()) return false;
        for (int i = 0; i < dim(); ++i)
            if (!box_[i].contains(p[i])) return false;
        return true;
    }

    void require_inside(std::span<const double> p) const {
        if (static_cast<int>(p.size()) != dim())
            throw DomainError("point dimension != chart dimension");
        for (int i = 0; i < dim(); ++i)
            if (!box_[i].contains(p[i]))
                throw DomainError("coordinate " + names_[i] + " outside domain box");
    }

    bool same_names(const ChartData& other) const { return names_ == other.names_; }

private:
    std::vector<std::string> names_;
    std::vector<Interval> box_;
    int orientation_ = +1;
};

using Chart = std::shared_ptr<const ChartData>;

inline Chart make_chart(std::vector<std::string> names,
                        std::vector<Interval> box,
                        int orientation = +1) {
    return std::make_shared<const ChartData>(std::move(names), std::move(box), orientation);
}

inline Chart make_chart(std::vector<std::string> names) {
    std::vector<Interval> box(names.size());
    return make_chart(std::move(names), std::move(box));
}

inline void require_same_chart(const Chart& a, const Chart& b) {
    if (a == b) return;
    if (!a || !b || !a->same_names(*b)) throw ChartMismatch("operands live on different charts");
}

using Point = std::vector<double>;

} // namespace g2lab
