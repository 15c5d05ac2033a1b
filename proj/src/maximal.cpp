#include "sparsedom/maximal.hpp"

#include "sparsedom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace sparsedom {

namespace {

// Calls visit(cube, range) for every lattice cube meeting the domain.
template <typename Visit>
void for_each_cube(const GridDomain& d, const std::vector<DyadicLattice>& lattices, Visit&& visit) {
    for (const DyadicLattice& lat : lattices)
        for (int k = lat.coarsest_level; k <= lat.finest_level; ++k)
            for (const Cube& q : cubes_at_level(d, lat, k)) {
                const CellRange range = clip(d, cube_box(d, q));
                if (!range.empty) visit(q, range);
            }
}

void raise_on(const GridDomain& d, const CellRange& range, double value, Vector& out) {
    for (std::int64_t y = range.lo[1]; y < range.hi[1]; ++y)
        for (std::int64_t x = range.lo[0]; x < range.hi[0]; ++x) {
            double& slot = out[d.cell_index({x, y})];
            slot = std::max(slot, value);
        }
}

double range_max(const GridDomain& d, const CellRange& range, const Vector& v) {
    double m = 0.0;
    for (std::int64_t y = range.lo[1]; y < range.hi[1]; ++y)
        for (std::int64_t x = range.lo[0]; x < range.hi[0]; ++x) m = std::max(m, std::abs(v[d.cell_index({x, y})]));
    return m;
}

double mean_power(const Vector& v, double r) {
    if (v.size() == 0) return 0.0;
    if (std::isinf(r)) return v.cwiseAbs().maxCoeff();
    return std::pow(v.cwiseAbs().array().pow(r).mean(), 1.0 / r);
}

void require_exponent(double r) {
    if (!(r > 0.0)) throw ParameterError("average exponent must be positive");
}

}  // namespace

GridFunction maximal(const GridFunction& f, double r, const std::vector<DyadicLattice>& lattices) {
    require_exponent(r);
    const GridDomain& d = f.domain;
    GridFunction out = GridFunction::zeros(d);
    const bool inf = std::isinf(r);
    const BoxSums sums(d, f.values.cwiseAbs().array().pow(inf ? 1.0 : r).matrix());
    for_each_cube(d, lattices, [&](const Cube& q, const CellRange& range) {
        const double cells = cube_measure(d, q) / d.cell_measure();
        const double v = inf ? range_max(d, range, f.values) : std::pow(sums.sum(range) / cells, 1.0 / r);
        raise_on(d, range, v, out.values);
    });
    return out;
}

GridFunction weighted_maximal(const GridFunction& f, double r, const GridFunction& u,
                              const std::vector<DyadicLattice>& lattices) {
    require_exponent(r);
    const GridDomain& d = f.domain;
    GridFunction out = GridFunction::zeros(d);
    const bool inf = std::isinf(r);
    const BoxSums mass(d, u.values);
    const BoxSums sums(d, (f.values.cwiseAbs().array().pow(inf ? 1.0 : r) * u.values.array()).matrix());
    for_each_cube(d, lattices, [&](const Cube&, const CellRange& range) {
        const double m = mass.sum(range);
        if (!(m > 0.0)) return;
        double v = 0.0;
        if (inf) {
            for (std::int64_t y = range.lo[1]; y < range.hi[1]; ++y)
                for (std::int64_t x = range.lo[0]; x < range.hi[0]; ++x) {
                    const Index c = d.cell_index({x, y});
                    if (u.values[c] > 0.0) v = std::max(v, std::abs(f.values[c]));
                }
        } else {
            v = std::pow(sums.sum(range) / m, 1.0 / r);
        }
        raise_on(d, range, v, out.values);
    });
    return out;
}

GridFunction fractional_maximal(const GridFunction& f, double alpha, double p,
                                const std::vector<DyadicLattice>& lattices) {
    require_exponent(p);
    const GridDomain& d = f.domain;
    if (alpha < 0.0 || (std::isfinite(p) && alpha >= d.dim / p))
        throw ParameterError("fractional maximal order must lie in [0, n/p)");
    GridFunction out = GridFunction::zeros(d);
    const bool inf = std::isinf(p);
    const BoxSums sums(d, f.values.cwiseAbs().array().pow(inf ? 1.0 : p).matrix());
    for_each_cube(d, lattices, [&](const Cube& q, const CellRange& range) {
        const double cells = cube_measure(d, q) / d.cell_measure();
        const double avg = inf ? range_max(d, range, f.values) : std::pow(sums.sum(range) / cells, 1.0 / p);
        raise_on(d, range, std::pow(side_length(d, q), alpha) * avg, out.values);
    });
    return out;
}

TruncatedImage truncated_image(const OperatorRep& t, const Vector& f, const Vector& tf, const Cube& r) {
    const GridDomain& d = t.domain();
    TruncatedImage img;
    img.cells = box_cells(d, cube_box(d, r));
    std::vector<Index> near;
    for_each_cell(d, triple(d, r), [&](Index c) {
        if (f[c] != 0.0) near.push_back(c);
    });
    if (static_cast<Index>(near.size()) == (f.array() != 0.0).count()) {
        img.values = Vector::Zero(static_cast<Index>(img.cells.size()));
        return img;
    }
    img.values = tf(img.cells);
    if (!near.empty()) img.values.noalias() -= t.matrix()(img.cells, near) * f(near);
    return img;
}

GridFunction sharp_grand_truncation(const OperatorRep& t, const GridFunction& f, double s,
                                    const std::vector<DyadicLattice>& lattices) {
    if (!(s >= 1.0)) throw ParameterError("oscillation exponent must be at least 1");
    const GridDomain& d = f.domain;
    const Vector tf = t.apply(f.values);
    GridFunction out = GridFunction::zeros(d);
    for_each_cube(d, lattices, [&](const Cube& q, const CellRange& range) {
        const TruncatedImage img = truncated_image(t, f.values, tf, q);
        std::vector<double> vals(img.values.data(), img.values.data() + img.values.size());
        raise_on(d, range, oscillation_of(std::move(vals), s), out.values);
    });
    return out;
}

GridFunction truncation_ML(const OperatorRep& t, const GridFunction& f, double q0,
                           const std::vector<DyadicLattice>& lattices) {
    if (!(q0 >= 1.0)) throw ParameterError("q0 must be at least 1");
    const GridDomain& d = f.domain;
    const Vector tf = t.apply(f.values);
    GridFunction out = GridFunction::zeros(d);
    for_each_cube(d, lattices, [&](const Cube& q, const CellRange& range) {
        const TruncatedImage img = truncated_image(t, f.values, tf, q);
        raise_on(d, range, mean_power(img.values, q0), out.values);
    });
    return out;
}

GridFunction tsharp(const SpectralData& s, int n, double alpha, double kappa, double q0, const GridFunction& f,
                    const std::vector<DyadicLattice>& lattices) {
    if (n < 1) throw ParameterError("T#_L needs N >= 1");
    if (!(q0 >= 1.0)) throw ParameterError("q0 must be at least 1");
    const GridDomain& d = f.domain;
    const Matrix inverse_power = fractional_power_oracle(s, alpha, kappa);
    const Vector base = inverse_power * f.values;
    std::map<double, Vector> by_side;
    GridFunction out = GridFunction::zeros(d);
    for_each_cube(d, lattices, [&](const Cube& q, const CellRange& range) {
        const double ell = side_length(d, q);
        auto it = by_side.find(ell);
        if (it == by_side.end()) it = by_side.emplace(ell, pnt_apply(s, n, std::pow(ell, kappa), base)).first;
        const std::vector<Index> cells = box_cells(d, cube_box(d, q));
        const Vector vals = it->second(cells);
        raise_on(d, range, mean_power(vals, q0), out.values);
    });
    return out;
}

WeakBoundProfile weak_bound_profile(const CellMap& t, std::string name, const GridDomain& d, double p0,
                                    double alpha, std::vector<double> lambdas, const std::vector<Cube>& cubes,
                                    const std::vector<Vector>& f_sample) {
    if (!(p0 >= 1.0) || alpha < 0.0 || alpha >= d.dim / p0)
        throw ParameterError("weak profile needs p0 >= 1 and 0 <= alpha < n/p0");
    std::sort(lambdas.begin(), lambdas.end());
    WeakBoundProfile prof;
    prof.op = std::move(name);
    prof.p0 = p0;
    prof.alpha = alpha;
    prof.sample = std::to_string(cubes.size()) + " cubes x " + std::to_string(f_sample.size()) + " functions";
    prof.lambdas = lambdas;
    prof.values.assign(lambdas.size(), 0.0);
    for (const Cube& q : cubes) {
        const std::vector<Index> cells = box_cells(d, cube_box(d, q));
        const double qmeasure = cube_measure(d, q);
        const double total_cells = qmeasure / d.cell_measure();
        for (const Vector& f : f_sample) {
            Vector local = Vector::Zero(d.cell_count());
            double fsum = 0.0;
            for (Index c : cells) {
                local[c] = f[c];
                fsum += std::pow(std::abs(f[c]), p0);
            }
            const double denom = std::pow(fsum * d.cell_measure() / qmeasure, 1.0 / p0) *
                                 std::pow(qmeasure, alpha / d.dim);
            if (!(denom > 0.0)) continue;
            const Vector image = t(local);
            std::vector<double> vals;
            vals.reserve(cells.size());
            for (Index c : cells) vals.push_back(std::abs(image[c]));
            std::sort(vals.begin(), vals.end(), std::greater<>());
            for (std::size_t i = 0; i < lambdas.size(); ++i) {
                const auto allowed = static_cast<std::size_t>(std::floor(lambdas[i] * total_cells + 1e-9));
                const double v = allowed < vals.size() ? vals[allowed] / denom : 0.0;
                prof.values[i] = std::max(prof.values[i], v);
            }
            ++prof.samples_used;
        }
    }
    if (prof.samples_used == 0) throw EmptySampleError("every sampled function vanishes on its cube");
    for (std::size_t i = prof.values.size(); i-- > 1;)
        prof.values[i - 1] = std::max(prof.values[i - 1], prof.values[i]);
    return prof;
}

double weak_quasinorm(const Vector& g, double exponent, double cell_measure) {
    std::vector<double> vals(g.size());
    for (Index i = 0; i < g.size(); ++i) vals[static_cast<std::size_t>(i)] = std::abs(g[i]);
    std::sort(vals.begin(), vals.end(), std::greater<>());
    double best = 0.0;
    for (std::size_t k = 0; k < vals.size(); ++k)
        best = std::max(best, vals[k] * std::pow(static_cast<double>(k + 1) * cell_measure, 1.0 / exponent));
    return best;
}

}  // namespace sparsedom
