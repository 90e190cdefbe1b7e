#pragma once

// Parametric compact sets with exact distance oracles, controlled-resolution
// discretizations, and box-counting dimension estimation.
//
// Every supported variant has Lebesgue measure zero by construction and a
// box dimension that coincides with its Hausdorff dimension (self-similar or
// smooth families); products are flagged when that guarantee would be lost.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include "fraclap/common.hpp"
#include "fraclap/stats.hpp"

namespace fraclap::sets {

using Point = std::vector<double>;

// Point cloud at resolution h: every set point lies within h of a node and
// nodes are pairwise >= h/2 apart (separation constant 1/2; finite sets use
// h = 0).
struct Discretization {
    std::vector<double> coords; // flat, size() * dim
    int dim = 1;
    double resolution = 0.0;
    int level = 0;

    std::size_t size() const { return dim > 0 ? coords.size() / static_cast<std::size_t>(dim) : 0; }
    const double* point(std::size_t i) const { return coords.data() + i * static_cast<std::size_t>(dim); }
    Point point_copy(std::size_t i) const
    {
        const double* p = point(i);
        return Point(p, p + dim);
    }
};

class CompactSet;

namespace detail {

struct FinitePoints {
    std::vector<double> coords;
    int dim;
};

struct Segment {
    Point a, b;
};

struct Sphere {
    Point center;
    double radius;
};

struct CantorDust {
    int dim;
    double ratio;
    std::vector<double> offsets; // copies x dim, template corners in [0, 1-ratio]^d
    int depth;                   // construction depth used by the distance oracle
    int copies() const { return static_cast<int>(offsets.size()) / dim; }
};

struct Product {
    std::shared_ptr<const CompactSet> left, right;
};

inline double dist_point(const double* x, const double* p, int d)
{
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += math::sq(x[i] - p[i]);
    return std::sqrt(s);
}

} // namespace detail

class CompactSet {
  public:
    enum class Kind { finite_points, segment, sphere, cantor_dust, product };

    // ---- constructors -----------------------------------------------------

    static CompactSet finite_points(const std::vector<Point>& pts, int dim)
    {
        if (dim < 1) throw std::invalid_argument("finite_points: dimension must be >= 1");
        detail::FinitePoints f;
        f.dim = dim;
        for (const auto& p : pts) {
            if (static_cast<int>(p.size()) != dim) throw std::invalid_argument("finite_points: dimension mismatch");
            f.coords.insert(f.coords.end(), p.begin(), p.end());
        }
        return CompactSet(std::move(f), dim);
    }

    static CompactSet origin(int dim) { return finite_points({Point(dim, 0.0)}, dim); }

    static CompactSet empty(int dim) { return finite_points({}, dim); }

    static CompactSet segment(Point a, Point b)
    {
        if (a.size() != b.size() || a.empty()) throw std::invalid_argument("segment: endpoint dimension mismatch");
        if (detail::dist_point(a.data(), b.data(), static_cast<int>(a.size())) <= 0.0)
            throw std::invalid_argument("segment: endpoints must be distinct");
        const int d = static_cast<int>(a.size());
        return CompactSet(detail::Segment{std::move(a), std::move(b)}, d);
    }

    static CompactSet unit_segment(int dim)
    {
        Point a(dim, 0.0), b(dim, 0.0);
        b[0] = 1.0;
        return segment(std::move(a), std::move(b));
    }

    static CompactSet sphere(Point center, double radius)
    {
        const int d = static_cast<int>(center.size());
        if (d < 2) throw std::invalid_argument("sphere: ambient dimension must be >= 2");
        if (!(radius > 0.0)) throw std::invalid_argument("sphere: radius must be > 0");
        return CompactSet(detail::Sphere{std::move(center), radius}, d);
    }

    // Self-similar dust: `copies` cells of side `ratio` per level, placed at
    // template corners of the unit cube (first `copies` corners of {0,1}^d in
    // binary order). ratio < 1/2 keeps the cells disjoint.
    static CompactSet cantor_dust(int dim, double ratio, int copies, int depth = 40)
    {
        if (dim < 1) throw std::invalid_argument("cantor_dust: dimension must be >= 1");
        if (!(ratio > 0.0 && ratio < 0.5)) throw std::invalid_argument("cantor_dust: ratio must be in (0, 1/2)");
        if (copies < 1 || copies > (1 << std::min(dim, 20)))
            throw std::invalid_argument("cantor_dust: copies must be in [1, 2^d]");
        detail::CantorDust c;
        c.dim = dim;
        c.ratio = ratio;
        c.depth = depth;
        for (int corner = 0; corner < copies; ++corner)
            for (int j = 0; j < dim; ++j) c.offsets.push_back(((corner >> j) & 1) ? (1.0 - ratio) : 0.0);
        return CompactSet(std::move(c), dim);
    }

    static CompactSet middle_thirds_cantor(int depth = 40) { return cantor_dust(1, 1.0 / 3.0, 2, depth); }

    static CompactSet product(CompactSet left, CompactSet right)
    {
        const int d = left.dim() + right.dim();
        detail::Product p{std::make_shared<CompactSet>(std::move(left)), std::make_shared<CompactSet>(std::move(right))};
        return CompactSet(std::move(p), d);
    }

    // ---- basic queries -----------------------------------------------------

    int dim() const { return dim_; }

    Kind kind() const { return static_cast<Kind>(v_.index()); }

    bool is_finite() const { return kind() == Kind::finite_points; }

    bool is_empty() const
    {
        if (auto* f = std::get_if<detail::FinitePoints>(&v_)) return f->coords.empty();
        return false;
    }

    std::string describe() const
    {
        switch (kind()) {
            case Kind::finite_points: {
                const auto& f = std::get<detail::FinitePoints>(v_);
                const std::size_t n = f.coords.size() / static_cast<std::size_t>(f.dim);
                return n == 0 ? "empty" : (n == 1 ? "point" : std::to_string(n) + " points");
            }
            case Kind::segment: return "segment";
            case Kind::sphere: return "sphere";
            case Kind::cantor_dust: {
                const auto& c = std::get<detail::CantorDust>(v_);
                return "cantor_dust(ratio=" + std::to_string(c.ratio) + ",copies=" + std::to_string(c.copies()) + ")";
            }
            case Kind::product:
                return "product(" + std::get<detail::Product>(v_).left->describe() + "," +
                       std::get<detail::Product>(v_).right->describe() + ")";
        }
        return "?";
    }

    // Exact self-similar/analytic dimension when box and Hausdorff dimension
    // provably coincide for the variant; nullopt means the geometric route
    // must refuse the set.
    std::optional<double> analytic_dimension() const
    {
        switch (kind()) {
            case Kind::finite_points: return is_empty() ? std::optional<double>(0.0) : 0.0;
            case Kind::segment: return 1.0;
            case Kind::sphere: return static_cast<double>(dim_ - 1);
            case Kind::cantor_dust: {
                const auto& c = std::get<detail::CantorDust>(v_);
                if (c.copies() == 1) return 0.0;
                return std::log(static_cast<double>(c.copies())) / std::log(1.0 / c.ratio);
            }
            case Kind::product: {
                const auto& p = std::get<detail::Product>(v_);
                // For products of fractal factors with different contraction
                // ratios the box and Hausdorff dimensions may differ; only
                // combinations with at most one fractal factor are accepted.
                const bool lf = p.left->kind() == Kind::cantor_dust;
                const bool rf = p.right->kind() == Kind::cantor_dust;
                if (lf && rf) return std::nullopt;
                auto a = p.left->analytic_dimension();
                auto b = p.right->analytic_dimension();
                if (!a || !b) return std::nullopt;
                return *a + *b;
            }
        }
        return std::nullopt;
    }

    // Axis-aligned bounding box (for kernel-table ranges etc.).
    void bounding_box(Point& lo, Point& hi) const
    {
        lo.assign(dim_, 0.0);
        hi.assign(dim_, 0.0);
        switch (kind()) {
            case Kind::finite_points: {
                const auto& f = std::get<detail::FinitePoints>(v_);
                const std::size_t n = f.coords.size() / static_cast<std::size_t>(f.dim);
                if (n == 0) return;
                for (int j = 0; j < dim_; ++j) lo[j] = hi[j] = f.coords[j];
                for (std::size_t i = 1; i < n; ++i)
                    for (int j = 0; j < dim_; ++j) {
                        lo[j] = std::min(lo[j], f.coords[i * dim_ + j]);
                        hi[j] = std::max(hi[j], f.coords[i * dim_ + j]);
                    }
                return;
            }
            case Kind::segment: {
                const auto& s = std::get<detail::Segment>(v_);
                for (int j = 0; j < dim_; ++j) {
                    lo[j] = std::min(s.a[j], s.b[j]);
                    hi[j] = std::max(s.a[j], s.b[j]);
                }
                return;
            }
            case Kind::sphere: {
                const auto& s = std::get<detail::Sphere>(v_);
                for (int j = 0; j < dim_; ++j) {
                    lo[j] = s.center[j] - s.radius;
                    hi[j] = s.center[j] + s.radius;
                }
                return;
            }
            case Kind::cantor_dust:
                for (int j = 0; j < dim_; ++j) { lo[j] = 0.0; hi[j] = 1.0; }
                return;
            case Kind::product: {
                const auto& p = std::get<detail::Product>(v_);
                Point llo, lhi, rlo, rhi;
                p.left->bounding_box(llo, lhi);
                p.right->bounding_box(rlo, rhi);
                for (int j = 0; j < p.left->dim(); ++j) { lo[j] = llo[j]; hi[j] = lhi[j]; }
                for (int j = 0; j < p.right->dim(); ++j) {
                    lo[p.left->dim() + j] = rlo[j];
                    hi[p.left->dim() + j] = rhi[j];
                }
                return;
            }
        }
    }

    double diameter_bound() const
    {
        Point lo, hi;
        bounding_box(lo, hi);
        double s = 0.0;
        for (int j = 0; j < dim_; ++j) s += math::sq(hi[j] - lo[j]);
        return std::sqrt(s);
    }

    // ---- distance oracle ---------------------------------------------------

    double distance(const double* x) const
    {
        switch (kind()) {
            case Kind::finite_points: {
                const auto& f = std::get<detail::FinitePoints>(v_);
                const std::size_t n = f.coords.size() / static_cast<std::size_t>(f.dim);
                if (n == 0) return math::inf();
                double best = math::inf();
                for (std::size_t i = 0; i < n; ++i)
                    best = std::min(best, detail::dist_point(x, f.coords.data() + i * dim_, dim_));
                return best;
            }
            case Kind::segment: {
                const auto& s = std::get<detail::Segment>(v_);
                double tt = 0.0, nn = 0.0;
                for (int j = 0; j < dim_; ++j) {
                    const double e = s.b[j] - s.a[j];
                    tt += (x[j] - s.a[j]) * e;
                    nn += e * e;
                }
                const double t = std::min(1.0, std::max(0.0, tt / nn));
                double dist2 = 0.0;
                for (int j = 0; j < dim_; ++j) dist2 += math::sq(x[j] - (s.a[j] + t * (s.b[j] - s.a[j])));
                return std::sqrt(dist2);
            }
            case Kind::sphere: {
                const auto& s = std::get<detail::Sphere>(v_);
                return std::fabs(detail::dist_point(x, s.center.data(), dim_) - s.radius);
            }
            case Kind::cantor_dust: return cantor_distance(std::get<detail::CantorDust>(v_), x);
            case Kind::product: {
                const auto& p = std::get<detail::Product>(v_);
                const double a = p.left->distance(x);
                const double b = p.right->distance(x + p.left->dim());
                return std::hypot(a, b);
            }
        }
        return math::inf();
    }

    double distance(const Point& x) const
    {
        if (static_cast<int>(x.size()) != dim_) throw std::invalid_argument("distance: dimension mismatch");
        return distance(x.data());
    }

    // Error bound of the distance oracle relative to the limit set (only
    // nonzero for Cantor dust, where depth-k cells overestimate membership).
    double distance_error_bound() const
    {
        switch (kind()) {
            case Kind::cantor_dust: {
                const auto& c = std::get<detail::CantorDust>(v_);
                return std::pow(c.ratio, c.depth) * std::sqrt(static_cast<double>(c.dim));
            }
            case Kind::product: {
                const auto& p = std::get<detail::Product>(v_);
                return std::hypot(p.left->distance_error_bound(), p.right->distance_error_bound());
            }
            default: return 0.0;
        }
    }

    // ---- discretization ----------------------------------------------------

    Discretization discretize(int level) const
    {
        if (level < 0) throw std::invalid_argument("discretize: level must be >= 0");
        Discretization out;
        out.dim = dim_;
        out.level = level;
        switch (kind()) {
            case Kind::finite_points: {
                const auto& f = std::get<detail::FinitePoints>(v_);
                out.coords = f.coords;
                out.resolution = 0.0;
                return out;
            }
            case Kind::segment: {
                const auto& s = std::get<detail::Segment>(v_);
                const std::size_t n = (static_cast<std::size_t>(1) << level) + 1;
                const double len = detail::dist_point(s.a.data(), s.b.data(), dim_);
                out.coords.reserve(n * dim_);
                for (std::size_t i = 0; i < n; ++i) {
                    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
                    for (int j = 0; j < dim_; ++j) out.coords.push_back(s.a[j] + t * (s.b[j] - s.a[j]));
                }
                out.resolution = len / static_cast<double>(n - 1);
                return out;
            }
            case Kind::sphere: return sphere_net(std::get<detail::Sphere>(v_), level);
            case Kind::cantor_dust: return cantor_net(std::get<detail::CantorDust>(v_), level);
            case Kind::product: {
                const auto& p = std::get<detail::Product>(v_);
                const Discretization a = p.left->discretize(level);
                const Discretization b = p.right->discretize(level);
                out.coords.reserve(a.size() * b.size() * static_cast<std::size_t>(dim_));
                for (std::size_t i = 0; i < a.size(); ++i)
                    for (std::size_t k = 0; k < b.size(); ++k) {
                        const double* pa = a.point(i);
                        const double* pb = b.point(k);
                        out.coords.insert(out.coords.end(), pa, pa + a.dim);
                        out.coords.insert(out.coords.end(), pb, pb + b.dim);
                    }
                out.resolution = std::hypot(a.resolution, b.resolution);
                return out;
            }
        }
        throw std::logic_error("discretize: bad variant");
    }

    // Smallest level whose resolution is <= h (used by box counting).
    int level_for_resolution(double h) const
    {
        if (!(h > 0.0)) throw std::invalid_argument("level_for_resolution: h must be > 0");
        switch (kind()) {
            case Kind::finite_points: return 0;
            case Kind::segment: {
                const auto& s = std::get<detail::Segment>(v_);
                const double len = detail::dist_point(s.a.data(), s.b.data(), dim_);
                int level = 0;
                while (len / std::pow(2.0, level) > h && level < 60) ++level;
                return level;
            }
            case Kind::sphere: {
                const auto& s = std::get<detail::Sphere>(v_);
                int level = 0;
                while (sphere_resolution(s, level) > h && level < 30) ++level;
                return level;
            }
            case Kind::cantor_dust: {
                const auto& c = std::get<detail::CantorDust>(v_);
                const double diam_half = 0.5 * std::sqrt(static_cast<double>(c.dim));
                int level = 0;
                while (std::pow(c.ratio, level) * diam_half > h && level < 60) ++level;
                return level;
            }
            case Kind::product: {
                const auto& p = std::get<detail::Product>(v_);
                return std::max(p.left->level_for_resolution(h), p.right->level_for_resolution(h));
            }
        }
        return 0;
    }

  private:
    using Variant =
        std::variant<detail::FinitePoints, detail::Segment, detail::Sphere, detail::CantorDust, detail::Product>;

    CompactSet(Variant v, int dim) : v_(std::move(v)), dim_(dim) {}

    static double box_distance(const double* x, const double* base, double side, int d)
    {
        double s = 0.0;
        for (int j = 0; j < d; ++j) {
            double t = 0.0;
            if (x[j] < base[j])
                t = base[j] - x[j];
            else if (x[j] > base[j] + side)
                t = x[j] - base[j] - side;
            s += t * t;
        }
        return std::sqrt(s);
    }

    // Exact distance to the union of depth-k cells (branch and bound).
    static double cantor_distance(const detail::CantorDust& c, const double* x)
    {
        const int d = c.dim;
        const int m = c.copies();
        struct Node {
            std::vector<double> base;
            int depth;
        };
        double best = math::inf();
        std::vector<Node> stack;
        stack.push_back({std::vector<double>(d, 0.0), 0});
        std::vector<std::pair<double, std::vector<double>>> kids;
        while (!stack.empty()) {
            Node node = std::move(stack.back());
            stack.pop_back();
            const double side = std::pow(c.ratio, node.depth);
            const double lb = box_distance(x, node.base.data(), side, d);
            if (lb >= best) continue;
            if (node.depth == c.depth) {
                best = lb;
                continue;
            }
            kids.clear();
            const double child_side = side * c.ratio;
            for (int i = 0; i < m; ++i) {
                std::vector<double> nb(d);
                for (int j = 0; j < d; ++j) nb[j] = node.base[j] + side * c.offsets[i * d + j];
                const double clb = box_distance(x, nb.data(), child_side, d);
                if (clb < best) kids.emplace_back(clb, std::move(nb));
            }
            std::sort(kids.begin(), kids.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; }); // nearest popped first
            for (auto& k : kids) stack.push_back({std::move(k.second), node.depth + 1});
        }
        return best;
    }

    static Discretization cantor_net(const detail::CantorDust& c, int level)
    {
        const int d = c.dim;
        const int m = c.copies();
        double count = std::pow(static_cast<double>(m), level);
        if (count > 2e7) throw std::invalid_argument("cantor discretization too large at this level");
        Discretization out;
        out.dim = d;
        out.level = level;
        out.resolution = std::pow(c.ratio, level) * 0.5 * std::sqrt(static_cast<double>(d));
        std::vector<double> base(d, 0.0);
        struct Frame {
            std::vector<double> base;
            int depth;
        };
        std::vector<Frame> stack{{base, 0}};
        const double cell = std::pow(c.ratio, level);
        while (!stack.empty()) {
            Frame f = std::move(stack.back());
            stack.pop_back();
            if (f.depth == level) {
                for (int j = 0; j < d; ++j) out.coords.push_back(f.base[j] + 0.5 * cell);
                continue;
            }
            const double side = std::pow(c.ratio, f.depth);
            for (int i = m - 1; i >= 0; --i) {
                std::vector<double> nb(d);
                for (int j = 0; j < d; ++j) nb[j] = f.base[j] + side * c.offsets[i * d + j];
                stack.push_back({std::move(nb), f.depth + 1});
            }
        }
        return out;
    }

    static double sphere_resolution(const detail::Sphere& s, int level)
    {
        const int d = static_cast<int>(s.center.size());
        if (d == 2) {
            const std::size_t n = static_cast<std::size_t>(8) << level;
            return 2.0 * math::pi * s.radius / static_cast<double>(n);
        }
        const std::size_t n = static_cast<std::size_t>(12) << (2 * level);
        return 3.6 * s.radius / std::sqrt(static_cast<double>(n));
    }

    Discretization sphere_net(const detail::Sphere& s, int level) const
    {
        const int d = dim_;
        if (d > 3) throw std::invalid_argument("sphere discretization supported only in ambient dimension 2 or 3");
        Discretization out;
        out.dim = d;
        out.level = level;
        out.resolution = sphere_resolution(s, level);
        if (d == 2) {
            const std::size_t n = static_cast<std::size_t>(8) << level;
            out.coords.reserve(n * 2);
            for (std::size_t i = 0; i < n; ++i) {
                const double ang = 2.0 * math::pi * static_cast<double>(i) / static_cast<double>(n);
                out.coords.push_back(s.center[0] + s.radius * std::cos(ang));
                out.coords.push_back(s.center[1] + s.radius * std::sin(ang));
            }
            return out;
        }
        // Fibonacci sphere in d = 3
        const std::size_t n = static_cast<std::size_t>(12) << (2 * level);
        const double ga = math::pi * (3.0 - std::sqrt(5.0));
        out.coords.reserve(n * 3);
        for (std::size_t i = 0; i < n; ++i) {
            const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
            const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double ang = ga * static_cast<double>(i);
            out.coords.push_back(s.center[0] + s.radius * rho * std::cos(ang));
            out.coords.push_back(s.center[1] + s.radius * rho * std::sin(ang));
            out.coords.push_back(s.center[2] + s.radius * z);
        }
        return out;
    }

    Variant v_;
    int dim_;
};

// ---------------------------------------------------------------------------
// Box-counting dimension

struct DimensionEstimate {
    double value = 0.0;
    double r2 = 0.0;
    bool refused = false;
    std::string reason;
    std::vector<std::pair<double, std::size_t>> counts; // (delta, N(delta))
};

namespace detail {

inline std::size_t count_boxes(const Discretization& net, double delta)
{
    std::unordered_set<std::uint64_t> boxes;
    const int d = net.dim;
    const std::size_t n = net.size();
    boxes.reserve(n * 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double* p = net.point(i);
        std::uint64_t h = 1469598103934665603ull;
        for (int j = 0; j < d; ++j) {
            const auto idx = static_cast<std::int64_t>(std::floor(p[j] / delta));
            h ^= static_cast<std::uint64_t>(idx) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
            h *= 1099511628211ull;
        }
        boxes.insert(h);
    }
    return boxes.size();
}

} // namespace detail

// Least-squares slope of log N(delta) against log(1/delta). The underlying
// nets are refined to resolution delta/4 so the count is that of the set,
// not of the sampling.
inline DimensionEstimate box_dimension(const CompactSet& set, std::span<const double> scales)
{
    if (scales.size() < 3) throw std::invalid_argument("box_dimension: need at least 3 scales");
    for (std::size_t i = 0; i + 1 < scales.size(); ++i)
        if (!(scales[i] > scales[i + 1]) || !(scales[i + 1] > 0.0))
            throw std::invalid_argument("box_dimension: scales must be positive and strictly decreasing");
    DimensionEstimate est;
    if (set.is_empty()) {
        est.refused = true;
        est.reason = "empty set has no box dimension";
        return est;
    }
    std::vector<double> xs, ys;
    for (double delta : scales) {
        const int level = set.level_for_resolution(0.25 * delta);
        const Discretization net = set.discretize(level);
        const std::size_t count = detail::count_boxes(net, delta);
        est.counts.emplace_back(delta, count);
        xs.push_back(std::log(1.0 / delta));
        ys.push_back(std::log(static_cast<double>(count)));
    }
    const auto fit = stats::least_squares(xs, ys); // throws on degenerate abscissa
    est.value = fit.slope;
    est.r2 = fit.r2;
    return est;
}

struct DimensionThresholds {
    double mu_threshold;  // d - alpha
    double esa_threshold; // d - 2 alpha
};

inline DimensionThresholds dimension_thresholds(double alpha, int d)
{
    if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("dimension_thresholds: alpha must be in (0,2]");
    if (d < 1) throw std::invalid_argument("dimension_thresholds: d must be >= 1");
    return {static_cast<double>(d) - alpha, static_cast<double>(d) - 2.0 * alpha};
}

} // namespace fraclap::sets
