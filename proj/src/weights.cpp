#include "sparsedom/weights.hpp"

#include "sparsedom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sparsedom {

namespace {

double conjugate(double p) { return p / (p - 1.0); }

Vector pow_values(const Vector& v, double e) { return v.array().pow(e).matrix(); }

struct CubeWindow {
    CellRange range;
    double measure = 0.0;  // |Q intersected with the domain|
};

CubeWindow window(const GridDomain& d, const Cube& q) {
    CubeWindow w;
    w.range = clip(d, cube_box(d, q));
    w.measure = static_cast<double>(range_count(d, w.range)) * d.cell_measure();
    return w;
}

std::string exps(std::initializer_list<double> e) {
    std::string s;
    for (double x : e) s += (s.empty() ? "" : ",") + std::to_string(x);
    return s;
}

void require_nonempty(const CubeSet& cubes) {
    if (cubes.cubes.empty()) throw ParameterError("cube collection is empty");
}

}  // namespace

CubeSet default_cubes(const GridDomain& d) { return lattice_cubes(d, all_lattices(d), "base+tripled"); }

CubeSet lattice_cubes(const GridDomain& d, const std::vector<DyadicLattice>& lats, std::string id) {
    CubeSet s{std::move(id), {}};
    for (const Cube& q : enumerate_cubes(d, lats))
        if (cells_inside(d, cube_box(d, q)) > 0) s.cubes.push_back(q);
    return s;
}

const char* to_string(Characteristic c) noexcept {
    switch (c) {
        case Characteristic::Ap: return "A_p";
        case Characteristic::Ainf: return "A_inf";
        case Characteristic::ReverseHolder: return "RH_r";
        case Characteristic::Apq: return "A_pq";
        case Characteristic::TwoWeight: return "two_weight";
        case Characteristic::BloomBmo: return "BMO_nu";
    }
    return "unknown";
}

void require_weight(const GridFunction& w) {
    for (Index i = 0; i < w.size(); ++i)
        if (!(w.values[i] > 0.0) || !std::isfinite(w.values[i]))
            throw ParameterError("weight values must be positive and finite");
}

GridFunction power_weight(const GridDomain& d, const Point& center, double exponent) {
    const double floor_dist = 0.5 * d.cell_size();
    return GridFunction::sample(d, [&](const Point& x) {
        double r2 = 0.0;
        for (int a = 0; a < d.dim; ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
        return std::pow(std::max(std::sqrt(r2), floor_dist), exponent);
    });
}

WeightConstant ap_constant(const GridFunction& w, double p, const CubeSet& cubes) {
    if (!(p > 1.0) || std::isinf(p)) throw ParameterError("A_p needs 1 < p < inf");
    require_nonempty(cubes);
    const GridDomain& d = w.domain;
    const BoxSums sw(d, w.values);
    const BoxSums sd(d, pow_values(w.values, 1.0 - conjugate(p)));
    WeightConstant out{Characteristic::Ap, {p}, 0.0, cubes.id, {}, {}};
    for (const Cube& q : cubes.cubes) {
        const CubeWindow win = window(d, q);
        const double cells = win.measure / d.cell_measure();
        const double a = sw.sum(win.range) / cells;
        const double b = sd.sum(win.range) / cells;
        if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(b))
            throw DegenerateWeightError("A_p average vanishes or diverges on a cube");
        const double v = a * std::pow(b, p - 1.0);
        if (v > out.value) {
            out.value = v;
            out.argmax = q;
        }
    }
    return out;
}

WeightConstant ainf_constant(const GridFunction& w, const CubeSet& cubes,
                             const std::vector<DyadicLattice>& lattices) {
    require_nonempty(cubes);
    const GridDomain& d = w.domain;
    const BoxSums sw(d, w.values);
    std::vector<double> best;
    WeightConstant out{Characteristic::Ainf, {}, 0.0, cubes.id, {}, {}};
    for (const Cube& q : cubes.cubes) {
        const CubeWindow win = window(d, q);
        const double mass = sw.sum(win.range);
        if (!(mass > 0.0)) throw DegenerateWeightError("weight has zero mass on a cube");
        const std::int64_t wx = win.range.hi[0] - win.range.lo[0];
        const std::int64_t wy = win.range.hi[1] - win.range.lo[1];
        best.assign(static_cast<std::size_t>(wx * wy), 0.0);
        for (const DyadicLattice& lat : lattices) {
            for (int k = lat.coarsest_level; k <= lat.finest_level; ++k) {
                for (const Cube& r : cubes_intersecting(d, lat, k, win.range)) {
                    const Box rb = cube_box(d, r);
                    const CellRange inter = intersect(clip(d, rb), win.range);
                    if (inter.empty) continue;
                    const double avg = sw.sum(inter) / (box_measure(d, rb) / d.cell_measure());
                    for (std::int64_t y = inter.lo[1]; y < inter.hi[1]; ++y)
                        for (std::int64_t x = inter.lo[0]; x < inter.hi[0]; ++x) {
                            double& slot = best[static_cast<std::size_t>((y - win.range.lo[1]) * wx +
                                                                         (x - win.range.lo[0]))];
                            slot = std::max(slot, avg);
                        }
                }
            }
        }
        double total = 0.0;
        for (double v : best) total += v;
        const double v = total / mass;
        if (v > out.value) {
            out.value = v;
            out.argmax = q;
        }
    }
    return out;
}

WeightConstant rh_constant(const GridFunction& w, double r, const CubeSet& cubes) {
    if (!(r > 1.0)) throw ParameterError("RH_r needs r > 1");
    require_nonempty(cubes);
    const GridDomain& d = w.domain;
    const BoxSums sw(d, w.values);
    const bool inf = std::isinf(r);
    const BoxSums sr(d, inf ? w.values : pow_values(w.values, r));
    WeightConstant out{Characteristic::ReverseHolder, {r}, 0.0, cubes.id, {}, {}};
    for (const Cube& q : cubes.cubes) {
        const CubeWindow win = window(d, q);
        const double cells = win.measure / d.cell_measure();
        const double mean = sw.sum(win.range) / cells;
        if (!(mean > 0.0)) throw DegenerateWeightError("weight has zero mass on a cube");
        double top = 0.0;
        if (inf) {
            for (std::int64_t y = win.range.lo[1]; y < win.range.hi[1]; ++y)
                for (std::int64_t x = win.range.lo[0]; x < win.range.hi[0]; ++x)
                    top = std::max(top, w.values[d.cell_index({x, y})]);
        } else {
            top = std::pow(sr.sum(win.range) / cells, 1.0 / r);
        }
        const double v = top / mean;
        if (v > out.value) {
            out.value = v;
            out.argmax = q;
        }
    }
    return out;
}

WeightConstant apq_constant(const GridFunction& w, double p, double q, const CubeSet& cubes) {
    if (!(p > 1.0 && p < q && std::isfinite(q))) throw ParameterError("A_pq needs 1 < p < q < inf");
    require_nonempty(cubes);
    const GridDomain& d = w.domain;
    const double pc = conjugate(p);
    const BoxSums sa(d, pow_values(w.values, q));
    const BoxSums sb(d, pow_values(w.values, -pc));
    WeightConstant out{Characteristic::Apq, {p, q}, 0.0, cubes.id, {}, {}};
    for (const Cube& c : cubes.cubes) {
        const CubeWindow win = window(d, c);
        const double cells = win.measure / d.cell_measure();
        const double a = sa.sum(win.range) / cells;
        const double b = sb.sum(win.range) / cells;
        if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(b))
            throw DegenerateWeightError("A_pq average vanishes or diverges on a cube");
        const double v = a * std::pow(b, q / pc);
        if (v > out.value) {
            out.value = v;
            out.argmax = c;
        }
    }
    return out;
}

WeightConstant two_weight_constant(const GridFunction& omega, const GridFunction& sigma, double alpha,
                                   double beta, double gamma, const CubeSet& cubes) {
    require_nonempty(cubes);
    const GridDomain& d = omega.domain;
    const BoxSums so(d, omega.values);
    const BoxSums ss(d, sigma.values);
    WeightConstant out{Characteristic::TwoWeight, {alpha, beta, gamma}, 0.0, cubes.id, {}, {}};
    if (alpha > 0.0 || alpha + beta + gamma < 0.0)
        out.warnings.push_back("exponents (" + exps({alpha, beta, gamma}) +
                               ") give a trivial class: need alpha <= 0 and alpha + beta + gamma >= 0");
    bool first = true;
    for (const Cube& q : cubes.cubes) {
        const CubeWindow win = window(d, q);
        const double om = so.sum(win.range) * d.cell_measure();
        const double sm = ss.sum(win.range) * d.cell_measure();
        if ((om <= 0.0 && beta < 0.0) || (sm <= 0.0 && gamma < 0.0))
            throw DegenerateWeightError("zero weight mass raised to a negative power");
        const double v = std::pow(win.measure, alpha) * std::pow(om, beta) * std::pow(sm, gamma);
        if (first || v > out.value) {
            out.value = v;
            out.argmax = q;
            first = false;
        }
    }
    return out;
}

GridFunction bloom_weight(const GridFunction& mu, const GridFunction& lambda, int m) {
    if (m <= 0) throw ParameterError("the Bloom weight (mu/lambda)^(1/m) is undefined for m = 0");
    require_weight(mu);
    require_weight(lambda);
    GridFunction nu = mu;
    nu.values = (mu.values.array() / lambda.values.array()).pow(1.0 / m).matrix();
    return nu;
}

WeightConstant bmo_nu(const GridFunction& b, const GridFunction& nu, const CubeSet& cubes) {
    require_nonempty(cubes);
    const GridDomain& d = b.domain;
    const BoxSums sb(d, b.values);
    const BoxSums sn(d, nu.values);
    WeightConstant out{Characteristic::BloomBmo, {}, 0.0, cubes.id, {}, {}};
    for (const Cube& q : cubes.cubes) {
        const CubeWindow win = window(d, q);
        const double cells = win.measure / d.cell_measure();
        const double mass = sn.sum(win.range);
        if (!(mass > 0.0)) throw DegenerateWeightError("Bloom weight has zero mass on a cube");
        const double mean = sb.sum(win.range) / cells;
        double dev = 0.0;
        for (std::int64_t y = win.range.lo[1]; y < win.range.hi[1]; ++y)
            for (std::int64_t x = win.range.lo[0]; x < win.range.hi[0]; ++x)
                dev += std::abs(b.values[d.cell_index({x, y})] - mean);
        const double v = dev / mass;
        if (v > out.value) {
            out.value = v;
            out.argmax = q;
        }
    }
    return out;
}

}  // namespace sparsedom
