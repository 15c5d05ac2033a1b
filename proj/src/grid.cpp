#include "sparsedom/grid.hpp"

#include "sparsedom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sparsedom {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

int mod3(std::int64_t v) { return static_cast<int>(((v % 3) + 3) % 3); }

std::int64_t level_span(const GridDomain& d, int level) {
    return std::int64_t{1} << (d.depth - level);
}

}  // namespace

Index GridDomain::cell_count() const noexcept {
    const std::int64_t n = cells_per_axis();
    return static_cast<Index>(dim == 1 ? n : n * n);
}

double GridDomain::cell_measure() const noexcept { return std::pow(cell_size(), dim); }

double GridDomain::measure() const noexcept { return std::pow(side, dim); }

Coord GridDomain::cell_coords(Index cell) const noexcept {
    const std::int64_t n = cells_per_axis();
    if (dim == 1) return {static_cast<std::int64_t>(cell), 0};
    return {static_cast<std::int64_t>(cell) % n, static_cast<std::int64_t>(cell) / n};
}

Index GridDomain::cell_index(const Coord& c) const noexcept {
    return static_cast<Index>(dim == 1 ? c[0] : c[1] * cells_per_axis() + c[0]);
}

Point GridDomain::cell_center(Index cell) const noexcept {
    const Coord c = cell_coords(cell);
    const double h = cell_size();
    Point p{origin[0] + (static_cast<double>(c[0]) + 0.5) * h, 0.0};
    if (dim == 2) p[1] = origin[1] + (static_cast<double>(c[1]) + 0.5) * h;
    return p;
}

std::optional<Index> GridDomain::locate(const Point& x) const noexcept {
    const double h = cell_size();
    Coord c{0, 0};
    for (int a = 0; a < dim; ++a) {
        const double t = (x[a] - origin[a]) / h;
        if (!(t >= 0.0)) return std::nullopt;
        const auto i = static_cast<std::int64_t>(std::floor(t));
        if (i >= cells_per_axis()) return std::nullopt;
        c[a] = i;
    }
    return cell_index(c);
}

GridDomain make_domain(int dim, const std::vector<double>& origin, double side, int depth) {
    if (dim != 1 && dim != 2)
        throw ParameterError("domain dimension must be 1 or 2, got " + std::to_string(dim));
    if (static_cast<int>(origin.size()) != dim)
        throw ParameterError("origin must have one coordinate per dimension");
    if (!(side > 0.0) || !std::isfinite(side)) throw ParameterError("domain side must be positive");
    const int max_depth = dim == 1 ? 14 : 7;
    if (depth < 1 || depth > max_depth)
        throw ParameterError("depth must lie in [1, " + std::to_string(max_depth) + "], got " +
                             std::to_string(depth));
    GridDomain d;
    d.dim = dim;
    d.origin = {origin[0], dim == 2 ? origin[1] : 0.0};
    d.side = side;
    d.depth = depth;
    return d;
}

GridFunction GridFunction::zeros(const GridDomain& d) { return {d, Vector::Zero(d.cell_count())}; }

GridFunction GridFunction::constant(const GridDomain& d, double c) {
    return {d, Vector::Constant(d.cell_count(), c)};
}

GridFunction GridFunction::sample(const GridDomain& d, const std::function<double(const Point&)>& fn) {
    GridFunction f = zeros(d);
    for (Index i = 0; i < f.size(); ++i) f.values[i] = fn(d.cell_center(i));
    return f;
}

double lp_norm(const GridFunction& f, double p) {
    if (std::isinf(p)) return f.values.cwiseAbs().maxCoeff();
    return weighted_lp_norm(f.values, Vector::Ones(f.size()), p, f.domain.cell_measure());
}

double weighted_lp_norm(const Vector& f, const Vector& w, double p, double cell_measure) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (Index i = 0; i < f.size(); ++i)
            if (w[i] > 0.0) m = std::max(m, std::abs(f[i]));
        return m;
    }
    double s = 0.0;
    for (Index i = 0; i < f.size(); ++i) s += std::pow(std::abs(f[i]), p) * w[i];
    return std::pow(s * cell_measure, 1.0 / p);
}

CellRange clip(const GridDomain& d, const Box& b) noexcept {
    CellRange r;
    const std::int64_t n = d.cells_per_axis();
    r.empty = false;
    for (int a = 0; a < d.dim; ++a) {
        r.lo[a] = std::max<std::int64_t>(b.lo[a], 0);
        r.hi[a] = std::min<std::int64_t>(b.lo[a] + b.len, n);
        if (r.lo[a] >= r.hi[a]) r.empty = true;
    }
    if (d.dim == 1) r.hi[1] = 1;
    return r;
}

CellRange intersect(const CellRange& a, const CellRange& b) noexcept {
    if (a.empty || b.empty) return {};
    CellRange r;
    r.empty = false;
    for (int ax = 0; ax < 2; ++ax) {
        r.lo[ax] = std::max(a.lo[ax], b.lo[ax]);
        r.hi[ax] = std::min(a.hi[ax], b.hi[ax]);
        if (r.lo[ax] >= r.hi[ax]) r.empty = true;
    }
    return r;
}

Index range_count(const GridDomain& d, const CellRange& r) noexcept {
    if (r.empty) return 0;
    Index c = static_cast<Index>(r.hi[0] - r.lo[0]);
    if (d.dim == 2) c *= static_cast<Index>(r.hi[1] - r.lo[1]);
    return c;
}

Index cells_inside(const GridDomain& d, const Box& b) noexcept {
    const CellRange r = clip(d, b);
    if (r.empty) return 0;
    Index c = static_cast<Index>(r.hi[0] - r.lo[0]);
    if (d.dim == 2) c *= static_cast<Index>(r.hi[1] - r.lo[1]);
    return c;
}

double box_side(const GridDomain& d, const Box& b) noexcept {
    return static_cast<double>(b.len) * d.cell_size();
}

double box_measure(const GridDomain& d, const Box& b) noexcept {
    return std::pow(box_side(d, b), d.dim);
}

std::vector<Index> box_cells(const GridDomain& d, const Box& b) {
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(cells_inside(d, b)));
    for_each_cell(d, b, [&](Index i) { out.push_back(i); });
    return out;
}

bool box_contains_cell(const GridDomain& d, const Box& b, Index cell) noexcept {
    const Coord c = d.cell_coords(cell);
    for (int a = 0; a < d.dim; ++a)
        if (c[a] < b.lo[a] || c[a] >= b.lo[a] + b.len) return false;
    return true;
}

bool box_contains(const GridDomain& d, const Box& outer, const Box& inner) noexcept {
    for (int a = 0; a < d.dim; ++a)
        if (inner.lo[a] < outer.lo[a] || inner.lo[a] + inner.len > outer.lo[a] + outer.len)
            return false;
    return true;
}

bool boxes_intersect(const GridDomain& d, const Box& a, const Box& b) noexcept {
    for (int ax = 0; ax < d.dim; ++ax)
        if (a.lo[ax] >= b.lo[ax] + b.len || b.lo[ax] >= a.lo[ax] + a.len) return false;
    return true;
}

Box dilate(const GridDomain& d, const Box& b, std::int64_t factor) {
    if (factor < 1 || factor % 2 == 0) throw ParameterError("dilation factor must be a positive odd integer");
    Box out = b;
    const std::int64_t pad = (factor - 1) / 2 * b.len;
    for (int a = 0; a < d.dim; ++a) out.lo[a] = b.lo[a] - pad;
    out.len = b.len * factor;
    return out;
}

BoxSums::BoxSums(const GridDomain& d, const Vector& values) : domain_(d) {
    const std::int64_t n = d.cells_per_axis();
    stride_ = n + 1;
    if (d.dim == 1) {
        table_.assign(static_cast<std::size_t>(n + 1), 0.0);
        for (std::int64_t i = 0; i < n; ++i) table_[i + 1] = table_[i] + values[i];
    } else {
        table_.assign(static_cast<std::size_t>((n + 1) * (n + 1)), 0.0);
        for (std::int64_t y = 0; y < n; ++y)
            for (std::int64_t x = 0; x < n; ++x)
                table_[(y + 1) * stride_ + x + 1] = values[y * n + x] + table_[y * stride_ + x + 1] +
                                                    table_[(y + 1) * stride_ + x] - table_[y * stride_ + x];
    }
}

double BoxSums::sum(const Box& b) const noexcept { return sum(clip(domain_, b)); }

double BoxSums::sum(const CellRange& r) const noexcept {
    if (r.empty) return 0.0;
    if (domain_.dim == 1) return table_[r.hi[0]] - table_[r.lo[0]];
    auto at = [&](std::int64_t y, std::int64_t x) { return table_[y * stride_ + x]; };
    return at(r.hi[1], r.hi[0]) - at(r.lo[1], r.hi[0]) - at(r.hi[1], r.lo[0]) + at(r.lo[1], r.lo[0]);
}

Box cube_box(const GridDomain& d, const Cube& q) {
    if (q.level < 0 || q.level > d.depth) throw ParameterError("cube level outside [0, depth]");
    const std::int64_t span = level_span(d, q.level);
    Box b;
    if (q.lattice == kBaseLattice) {
        b.len = span;
        for (int a = 0; a < d.dim; ++a) b.lo[a] = q.coords[a] * span;
    } else {
        b.len = 3 * span;
        for (int a = 0; a < d.dim; ++a) b.lo[a] = (q.coords[a] - 1) * span;
    }
    return b;
}

double side_length(const GridDomain& d, const Cube& q) { return box_side(d, cube_box(d, q)); }

double cube_measure(const GridDomain& d, const Cube& q) { return box_measure(d, cube_box(d, q)); }

Box triple(const GridDomain& d, const Cube& q) { return dilate(d, cube_box(d, q), 3); }

std::vector<Cube> dyadic_children(const GridDomain& d, const Cube& q) {
    if (q.level >= d.depth) throw LeafError("cube at the finest level has no dyadic children");
    std::vector<Cube> out;
    const int count = d.dim == 1 ? 2 : 4;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        Cube c{q.lattice, q.level + 1, {0, 0}};
        for (int a = 0; a < d.dim; ++a) {
            const int bit = (k >> a) & 1;
            if (q.lattice == kBaseLattice)
                c.coords[a] = 2 * q.coords[a] + bit;
            else
                c.coords[a] = bit == 0 ? 2 * q.coords[a] - 1 : 2 * q.coords[a] + 2;
        }
        out.push_back(c);
    }
    return out;
}

std::optional<Cube> dyadic_parent(const GridDomain& d, const Cube& q) {
    if (q.level <= 0) return std::nullopt;
    Cube p{q.lattice, q.level - 1, {0, 0}};
    for (int a = 0; a < d.dim; ++a) {
        const std::int64_t m = q.coords[a];
        if (q.lattice == kBaseLattice)
            p.coords[a] = floor_div(m, 2);
        else
            p.coords[a] = (m % 2 != 0) ? floor_div(m + 1, 2) : floor_div(m - 2, 2);
    }
    return p;
}

int lattice_class(int shift, int axis, int level) {
    int c = (axis == 0 ? shift : shift / 3) % 3;
    for (int k = 0; k < level; ++k) c = (2 * c + 2) % 3;
    return c;
}

DyadicLattice base_lattice(const GridDomain& d) { return {kBaseLattice, 0, d.depth}; }

std::vector<DyadicLattice> three_lattices(const GridDomain& d) {
    const int count = d.dim == 1 ? 3 : 9;
    std::vector<DyadicLattice> out;
    for (int j = 0; j < count; ++j) out.push_back({j, 0, d.depth});
    return out;
}

std::vector<DyadicLattice> all_lattices(const GridDomain& d) {
    std::vector<DyadicLattice> out{base_lattice(d)};
    for (const auto& l : three_lattices(d)) out.push_back(l);
    return out;
}

bool lattice_contains(const GridDomain& d, const DyadicLattice& lat, const Cube& q) {
    if (q.lattice != lat.shift || q.level < lat.coarsest_level || q.level > lat.finest_level) return false;
    if (lat.shift == kBaseLattice) return true;
    for (int a = 0; a < d.dim; ++a)
        if (mod3(q.coords[a]) != lattice_class(lat.shift, a, q.level)) return false;
    return true;
}

std::vector<Cube> cubes_at_level(const GridDomain& d, const DyadicLattice& lat, int level) {
    std::vector<Cube> out;
    if (level < lat.coarsest_level || level > lat.finest_level) return out;
    const std::int64_t count = std::int64_t{1} << level;
    std::array<std::vector<std::int64_t>, 2> axis_coords;
    for (int a = 0; a < d.dim; ++a) {
        if (lat.shift == kBaseLattice) {
            for (std::int64_t m = 0; m < count; ++m) axis_coords[a].push_back(m);
        } else {
            const int c = lattice_class(lat.shift, a, level);
            for (std::int64_t m = -1; m <= count; ++m)
                if (mod3(m) == c) axis_coords[a].push_back(m);
        }
    }
    if (d.dim == 1) {
        for (auto m : axis_coords[0]) out.push_back({lat.shift, level, {m, 0}});
    } else {
        for (auto my : axis_coords[1])
            for (auto mx : axis_coords[0]) out.push_back({lat.shift, level, {mx, my}});
    }
    return out;
}

std::vector<Cube> enumerate_cubes(const GridDomain& d, const std::vector<DyadicLattice>& lats) {
    std::vector<Cube> out;
    for (const auto& lat : lats)
        for (int k = lat.coarsest_level; k <= lat.finest_level; ++k) {
            auto level = cubes_at_level(d, lat, k);
            out.insert(out.end(), level.begin(), level.end());
        }
    return out;
}

std::vector<Cube> cubes_intersecting(const GridDomain& d, const DyadicLattice& lat, int level,
                                     const CellRange& range) {
    std::vector<Cube> out;
    if (range.empty || level < lat.coarsest_level || level > lat.finest_level) return out;
    const std::int64_t span = level_span(d, level);
    const std::int64_t count = std::int64_t{1} << level;
    std::array<std::vector<std::int64_t>, 2> axis_coords;
    for (int a = 0; a < d.dim; ++a) {
        std::int64_t lo = 0;
        std::int64_t hi = 0;
        if (lat.shift == kBaseLattice) {
            lo = floor_div(range.lo[a], span);
            hi = floor_div(range.hi[a] - 1, span);
        } else {
            // (m-1) span < range.hi and (m+2) span > range.lo
            lo = std::max<std::int64_t>(floor_div(range.lo[a], span) - 1, -1);
            hi = std::min<std::int64_t>(floor_div(range.hi[a] - 1, span) + 1, count);
        }
        const int cls = lat.shift == kBaseLattice ? -1 : lattice_class(lat.shift, a, level);
        for (std::int64_t m = lo; m <= hi; ++m)
            if (cls < 0 || mod3(m) == cls) axis_coords[a].push_back(m);
    }
    if (d.dim == 1) {
        for (auto m : axis_coords[0]) out.push_back({lat.shift, level, {m, 0}});
    } else {
        for (auto my : axis_coords[1])
            for (auto mx : axis_coords[0]) out.push_back({lat.shift, level, {mx, my}});
    }
    return out;
}

Cube cube_containing(const GridDomain& d, const DyadicLattice& lat, int level, Index cell) {
    const Coord c = d.cell_coords(cell);
    const std::int64_t span = level_span(d, level);
    Cube q{lat.shift, level, {0, 0}};
    for (int a = 0; a < d.dim; ++a) {
        const std::int64_t base = floor_div(c[a], span);
        if (lat.shift == kBaseLattice) {
            q.coords[a] = base;
        } else {
            const int cls = lattice_class(lat.shift, a, level);
            for (std::int64_t m = base - 1; m <= base + 1; ++m)
                if (mod3(m) == cls) q.coords[a] = m;
        }
    }
    return q;
}

int lattice_of_triple(const GridDomain& d, const Cube& base_cube) {
    if (base_cube.lattice != kBaseLattice) throw ParameterError("lattice_of_triple expects a base-lattice cube");
    const int count = d.dim == 1 ? 3 : 9;
    for (int j = 0; j < count; ++j) {
        Cube r = base_cube;
        r.lattice = j;
        if (lattice_contains(d, {j, 0, d.depth}, r)) return j;
    }
    return -1;  // unreachable: the class map is a bijection on residues
}

std::vector<Index> annulus(const GridDomain& d, const Cube& q, int j) {
    if (j < 0) throw ParameterError("annulus index must be nonnegative");
    const Box b = cube_box(d, q);
    if (j == 0) return box_cells(d, b);
    const Box whole{{0, 0}, d.cells_per_axis()};
    Box inner = b;
    for (int k = 1; k < j; ++k) {
        if (box_contains(d, inner, whole)) return {};
        inner = dilate(d, inner, 3);
    }
    if (box_contains(d, inner, whole)) return {};
    const Box outer = dilate(d, inner, 3);
    std::vector<Index> out;
    for_each_cell(d, outer, [&](Index i) {
        if (!box_contains_cell(d, inner, i)) out.push_back(i);
    });
    return out;
}

double average(const GridFunction& f, const Box& q, double r) {
    if (!(r > 0.0)) throw ParameterError("average exponent must be positive");
    const GridDomain& d = f.domain;
    if (std::isinf(r)) {
        double m = 0.0;
        for_each_cell(d, q, [&](Index i) { m = std::max(m, std::abs(f.values[i])); });
        return m;
    }
    double s = 0.0;
    for_each_cell(d, q, [&](Index i) { s += std::pow(std::abs(f.values[i]), r); });
    return std::pow(s * d.cell_measure() / box_measure(d, q), 1.0 / r);
}

double average(const GridFunction& f, const Cube& q, double r) { return average(f, cube_box(f.domain, q), r); }

double weighted_average(const GridFunction& f, const Box& q, double r, const GridFunction& u) {
    if (!(r > 0.0)) throw ParameterError("average exponent must be positive");
    const GridDomain& d = f.domain;
    double mass = 0.0;
    double s = 0.0;
    double m = 0.0;
    for_each_cell(d, q, [&](Index i) {
        mass += u.values[i];
        if (u.values[i] > 0.0) m = std::max(m, std::abs(f.values[i]));
        if (!std::isinf(r)) s += std::pow(std::abs(f.values[i]), r) * u.values[i];
    });
    if (!(mass > 0.0)) throw DegenerateWeightError("weight has zero mass on the cube");
    if (std::isinf(r)) return m;
    return std::pow(s / mass, 1.0 / r);
}

double oscillation_of(std::vector<double> v, double s) {
    if (!(s >= 1.0)) throw ParameterError("oscillation exponent must be at least 1");
    const auto m = static_cast<double>(v.size());
    if (v.size() < 2) return 0.0;
    if (std::isinf(s)) {
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        return *hi - *lo;
    }
    double total = 0.0;
    if (s == 1.0) {
        std::sort(v.begin(), v.end());
        for (std::size_t j = 0; j < v.size(); ++j)
            total += v[j] * (2.0 * static_cast<double>(j) - m + 1.0);
        total *= 2.0;
    } else if (s == 2.0) {
        double sum = 0.0;
        double sq = 0.0;
        for (double x : v) {
            sum += x;
            sq += x * x;
        }
        total = std::max(0.0, 2.0 * m * sq - 2.0 * sum * sum);
    } else {
        for (std::size_t i = 0; i < v.size(); ++i)
            for (std::size_t j = i + 1; j < v.size(); ++j) total += 2.0 * std::pow(std::abs(v[i] - v[j]), s);
    }
    return std::pow(total / (m * m), 1.0 / s);
}

double oscillation(const GridFunction& f, const Box& q, double s) {
    std::vector<double> v;
    for_each_cell(f.domain, q, [&](Index i) { v.push_back(f.values[i]); });
    return oscillation_of(std::move(v), s);
}

}  // namespace sparsedom
