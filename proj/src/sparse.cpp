#include "sparsedom/sparse.hpp"

#include "sparsedom/bounds.hpp"
#include "sparsedom/errors.hpp"
#include "sparsedom/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

namespace sparsedom {

namespace {

std::vector<Index> cells_of(const GridDomain& d, const Cube& q) { return box_cells(d, cube_box(d, q)); }

double inside_measure(const GridDomain& d, const Cube& q) {
    return static_cast<double>(cells_inside(d, cube_box(d, q))) * d.cell_measure();
}

double mean_over(const std::vector<Index>& cells, const Vector& v) {
    if (cells.empty()) return 0.0;
    double s = 0.0;
    for (Index c : cells) s += v[c];
    return s / static_cast<double>(cells.size());
}

// <h>_{p,Q} with geometric |Q|; h given cellwise on `cells`.
template <typename Values>
double geometric_average(const GridDomain& d, const std::vector<Index>& cells, double measure, double p,
                         Values&& value) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (Index c : cells) m = std::max(m, std::abs(value(c)));
        return m;
    }
    double s = 0.0;
    for (Index c : cells) s += std::pow(std::abs(value(c)), p);
    return std::pow(s * d.cell_measure() / measure, 1.0 / p);
}

bool strictly_inside(const GridDomain& d, const Cube& inner, const Cube& outer) {
    const Box a = cube_box(d, inner);
    const Box b = cube_box(d, outer);
    return !(a == b) && box_contains(d, b, a);
}

bool inside(const GridDomain& d, const Cube& inner, const Cube& outer) {
    return box_contains(d, cube_box(d, outer), cube_box(d, inner));
}

bool range_covers(const CellRange& outer, const CellRange& inner) {
    if (inner.empty) return true;
    if (outer.empty) return false;
    for (int a = 0; a < 2; ++a)
        if (inner.lo[a] < outer.lo[a] || inner.hi[a] > outer.hi[a]) return false;
    return true;
}

}  // namespace

SparsenessCheck verify_sparseness(const GridDomain& d, const SparseFamily& family) {
    SparsenessCheck out;
    std::vector<Cube> sorted = family.cubes;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        out.message = "family contains a duplicated cube; disjoint witnesses are impossible";
        return out;
    }
    const bool stored = family.witness.size() == family.cubes.size() && !family.cubes.empty();
    if (stored) {
        out.witness = family.witness;
    } else {
        out.witness.resize(family.cubes.size());
        for (std::size_t i = 0; i < family.cubes.size(); ++i) {
            std::vector<Box> inner;
            for (std::size_t j = 0; j < family.cubes.size(); ++j)
                if (j != i && strictly_inside(d, family.cubes[j], family.cubes[i]))
                    inner.push_back(cube_box(d, family.cubes[j]));
            for (Index c : cells_of(d, family.cubes[i])) {
                bool covered = false;
                for (const Box& b : inner)
                    if (box_contains_cell(d, b, c)) {
                        covered = true;
                        break;
                    }
                if (!covered) out.witness[i].push_back(c);
            }
        }
    }
    std::vector<int> owner(static_cast<std::size_t>(d.cell_count()), -1);
    out.achieved_eta = family.cubes.empty() ? 1.0 : kInf;
    for (std::size_t i = 0; i < family.cubes.size(); ++i) {
        const Box box = cube_box(d, family.cubes[i]);
        for (Index c : out.witness[i]) {
            if (c < 0 || c >= d.cell_count() || !box_contains_cell(d, box, c)) {
                out.message = "witness of cube " + std::to_string(i) + " leaves its cube";
                return out;
            }
            int& o = owner[static_cast<std::size_t>(c)];
            if (o >= 0) {
                out.message = "witnesses of cubes " + std::to_string(o) + " and " + std::to_string(i) + " overlap";
                return out;
            }
            o = static_cast<int>(i);
        }
        const double ratio = static_cast<double>(out.witness[i].size()) /
                             static_cast<double>(std::max<Index>(1, cells_inside(d, box)));
        out.achieved_eta = std::min(out.achieved_eta, ratio);
    }
    out.ok = out.achieved_eta >= family.eta * (1.0 - 1e-12);
    if (!out.ok) out.message = "achieved eta " + std::to_string(out.achieved_eta) + " below claimed " +
                               std::to_string(family.eta);
    return out;
}

void write_family(std::ostream& out, const GridDomain& d, const SparseFamily& family) {
    char eta[64];
    std::snprintf(eta, sizeof eta, "%.17g", family.eta);
    out << "# sparse-family lattice " << family.lattice << " eta " << eta << " dim " << d.dim << '\n';
    for (std::size_t i = 0; i < family.cubes.size(); ++i) {
        const Cube& q = family.cubes[i];
        out << q.lattice << ' ' << q.level;
        for (int a = 0; a < d.dim; ++a) out << ' ' << q.coords[a];
        out << " |";
        if (i < family.witness.size())
            for (Index c : family.witness[i]) out << ' ' << c;
        out << '\n';
    }
}

SparseFamily read_family(std::istream& in) {
    SparseFamily family;
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty sparse-family stream");
    std::istringstream head(line);
    std::string hash, tag, key_lat, key_eta, key_dim;
    int dim = 0;
    if (!(head >> hash >> tag >> key_lat >> family.lattice >> key_eta >> family.eta >> key_dim >> dim) ||
        hash != "#" || tag != "sparse-family" || (dim != 1 && dim != 2))
        throw IoError("malformed sparse-family header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto bar = line.find('|');
        if (bar == std::string::npos) throw IoError("cube line without witness separator");
        std::istringstream left(line.substr(0, bar));
        std::istringstream right(line.substr(bar + 1));
        Cube q;
        if (!(left >> q.lattice >> q.level)) throw IoError("malformed cube line");
        for (int a = 0; a < dim; ++a)
            if (!(left >> q.coords[a])) throw IoError("cube line lacks coordinates");
        std::vector<Index> cells;
        Index c = 0;
        while (right >> c) cells.push_back(c);
        family.cubes.push_back(q);
        family.witness.push_back(std::move(cells));
    }
    return family;
}

namespace {

class SparseBuilder {
public:
    SparseBuilder(const OperatorRep& t, const Vector& b, int m, const Vector& f, double p0, double q0,
                  SparseFamily& family, DominationReport& report)
        : t_(t), d_(t.domain()), b_(b), f_(f), m_(m), p0_(p0), q0_(q0), lattices_(all_lattices(d_)),
          family_(family), report_(report) {
        theta_ = 1.0 / (3.0 * (m + 1) * std::pow(2.0, d_.dim + 2));
    }

    void visit(const Cube& q, int depth) {
        report_.depth = std::max(report_.depth, depth);
        const std::vector<Index> cells = cells_of(d_, q);
        const auto budget = static_cast<std::size_t>(std::floor(theta_ * static_cast<double>(cells.size())));
        if (q.level >= d_.depth || budget == 0) {
            add(q, cells);
            return;
        }
        const CellRange qrange = clip(d_, cube_box(d_, q));
        const std::int64_t width = qrange.hi[0] - qrange.lo[0];
        auto local = [&](Index c) {
            const Coord xy = d_.cell_coords(c);
            return static_cast<std::size_t>((xy[1] - qrange.lo[1]) * width + (xy[0] - qrange.lo[0]));
        };
        std::vector<char> omega(cells.size(), 0);
        const Box tripled = triple(d_, q);
        const CellRange support = clip(d_, tripled);
        const std::vector<Index> near = box_cells(d_, tripled);
        const double bmean = mean_over(near, b_);
        for (int k = 0; k <= m_; ++k) {
            Vector eta = Vector::Zero(d_.cell_count());
            for (Index c : near) eta[c] = std::pow(b_[c] - bmean, k) * f_[c];
            if (eta.isZero(0.0)) continue;
            const Vector teta = t_.apply(eta);
            std::vector<double> direct(cells.size());
            for (Index c : cells) direct[local(c)] = std::abs(teta[c]);
            mark_top(direct, budget, omega);
            mark_top(sharp_truncation(eta, teta, qrange, support, local, cells.size()), budget, omega);
            mark_top(local_maximal(eta, qrange, local, cells.size()), budget, omega);
        }
        std::size_t omega_cells = 0;
        for (char o : omega) omega_cells += o;

        RecursionStep step;
        step.cube = q;
        step.depth = depth;
        step.cube_measure = cube_measure(d_, q);
        step.exceptional_measure = static_cast<double>(omega_cells) * d_.cell_measure();

        std::vector<Cube> selected;
        if (omega_cells > 0) {
            const double threshold = std::pow(2.0, -(d_.dim + 1));
            std::vector<Cube> stack = dyadic_children(d_, q);
            while (!stack.empty()) {
                const Cube c = stack.back();
                stack.pop_back();
                const std::vector<Index> sub = cells_of(d_, c);
                std::size_t hit = 0;
                for (Index x : sub) hit += omega[local(x)];
                if (hit == 0) continue;
                const double density = static_cast<double>(hit) / static_cast<double>(sub.size());
                if (density > threshold) {
                    selected.push_back(c);
                    if (density > 0.5) step.selection_ok = false;
                } else if (c.level < d_.depth) {
                    for (const Cube& g : dyadic_children(d_, c)) stack.push_back(g);
                }
            }
        }
        std::sort(selected.begin(), selected.end());
        std::vector<char> claimed(cells.size(), 0);
        for (const Cube& c : selected) {
            step.selected_measure += cube_measure(d_, c);
            for (Index x : cells_of(d_, c)) claimed[local(x)] = 1;
        }
        step.selected = selected.size();
        step.packing_ok = step.selected_measure <= 0.5 * step.cube_measure * (1.0 + 1e-12);
        report_.max_packing_ratio = std::max(report_.max_packing_ratio, step.selected_measure / step.cube_measure);
        report_.steps.push_back(step);

        std::vector<Index> witness;
        for (Index c : cells)
            if (!claimed[local(c)]) witness.push_back(c);
        add(q, witness);
        for (const Cube& c : selected) visit(c, depth + 1);
    }

private:
    void add(const Cube& q, std::vector<Index> witness) {
        family_.cubes.push_back(q);
        family_.witness.push_back(std::move(witness));
    }

    // Marks the cells whose value exceeds the (budget+1)-th largest value.
    static void mark_top(const std::vector<double>& values, std::size_t budget, std::vector<char>& omega) {
        if (values.empty()) return;
        std::vector<double> sorted = values;
        const std::size_t pos = std::min(budget, sorted.size() - 1);
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(pos), sorted.end(),
                         std::greater<>());
        const double threshold = sorted[pos];
        for (std::size_t i = 0; i < values.size(); ++i)
            if (values[i] > threshold) omega[i] = 1;
    }

    template <typename Local>
    std::vector<double> sharp_truncation(const Vector& eta, const Vector& teta, const CellRange& qrange,
                                         const CellRange& support, Local&& local, std::size_t count) const {
        std::vector<double> out(count, 0.0);
        for (const DyadicLattice& lat : lattices_)
            for (int k = lat.coarsest_level; k <= lat.finest_level; ++k)
                for (const Cube& r : cubes_intersecting(d_, lat, k, qrange)) {
                    // eta vanishes off 3Q, so T(eta chi_{D \ 3R}) = 0 once 3R covers it.
                    if (range_covers(clip(d_, triple(d_, r)), support)) continue;
                    const TruncatedImage img = truncated_image(t_, eta, teta, r);
                    std::vector<double> vals(img.values.data(), img.values.data() + img.values.size());
                    const double osc = oscillation_of(std::move(vals), q0_);
                    raise(intersect(clip(d_, cube_box(d_, r)), qrange), osc, local, out);
                }
        return out;
    }

    template <typename Local>
    std::vector<double> local_maximal(const Vector& eta, const CellRange& qrange, Local&& local,
                                      std::size_t count) const {
        std::vector<double> out(count, 0.0);
        const BoxSums sums(d_, eta.cwiseAbs().array().pow(p0_).matrix());
        for (const DyadicLattice& lat : lattices_)
            for (int k = lat.coarsest_level; k <= lat.finest_level; ++k)
                for (const Cube& r : cubes_intersecting(d_, lat, k, qrange)) {
                    const Box box = cube_box(d_, r);
                    const double cells = box_measure(d_, box) / d_.cell_measure();
                    const double avg = std::pow(sums.sum(box) / cells, 1.0 / p0_);
                    raise(intersect(clip(d_, box), qrange), avg, local, out);
                }
        return out;
    }

    template <typename Local>
    void raise(const CellRange& range, double value, Local&& local, std::vector<double>& out) const {
        if (range.empty) return;
        for (std::int64_t y = range.lo[1]; y < range.hi[1]; ++y)
            for (std::int64_t x = range.lo[0]; x < range.hi[0]; ++x) {
                double& slot = out[local(d_.cell_index({x, y}))];
                slot = std::max(slot, value);
            }
    }

    const OperatorRep& t_;
    const GridDomain& d_;
    const Vector& b_;
    const Vector& f_;
    int m_;
    double p0_;
    double q0_;
    double theta_ = 0.0;
    std::vector<DyadicLattice> lattices_;
    SparseFamily& family_;
    DominationReport& report_;
};

double safe_ratio(double num, double den) {
    if (num == 0.0) return 0.0;
    return den > 0.0 ? num / den : kInf;
}

}  // namespace

SparseConstruction construct_sparse(const OperatorRep& t, const Vector& b, int m, const Vector& f,
                                    const Vector& g, const Cube& q0_cube, double p0, double q0, double alpha) {
    const GridDomain& d = t.domain();
    if (m < 0) throw ParameterError("commutator order must be nonnegative");
    if (!(p0 >= 1.0 && q0 > p0)) throw ParameterError("need 1 <= p0 < q0");
    if (q0_cube.lattice != kBaseLattice) throw ParameterError("the starting cube must be a base-lattice cube");
    const Box top = cube_box(d, q0_cube);
    for (Index c = 0; c < d.cell_count(); ++c)
        if ((f[c] != 0.0 || g[c] != 0.0) && !box_contains_cell(d, top, c))
            throw SupportError("f and g must be supported in the starting cube");

    SparseConstruction out;
    DominationReport& rep = out.report;
    out.pre_merge.lattice = kBaseLattice;
    out.pre_merge.eta = 0.5;
    if (t.matrix().isZero(0.0)) {
        // Nothing to dominate: the top cube alone certifies the (zero) left side.
        out.pre_merge.cubes.push_back(q0_cube);
        out.pre_merge.witness.push_back(cells_of(d, q0_cube));
    } else {
        SparseBuilder builder(t, b, m, f, p0, q0, out.pre_merge, rep);
        builder.visit(q0_cube, 0);
    }
    rep.pre_merge_count = out.pre_merge.cubes.size();

    // Re-house each 3Q in the tripled lattice that contains it.
    const int lattice_count = d.dim == 1 ? 3 : 9;
    const double eta_merged = 1.0 / (2.0 * std::pow(3.0, d.dim));
    out.per_lattice.assign(static_cast<std::size_t>(lattice_count), SparseFamily{});
    rep.lattice_measure.assign(static_cast<std::size_t>(lattice_count), 0.0);
    for (int j = 0; j < lattice_count; ++j) {
        out.per_lattice[static_cast<std::size_t>(j)].lattice = j;
        out.per_lattice[static_cast<std::size_t>(j)].eta = eta_merged;
    }
    for (std::size_t i = 0; i < out.pre_merge.cubes.size(); ++i) {
        const Cube& q = out.pre_merge.cubes[i];
        const int j = lattice_of_triple(d, q);
        Cube r{j, q.level, q.coords};
        auto& fam = out.per_lattice[static_cast<std::size_t>(j)];
        fam.cubes.push_back(r);
        fam.witness.push_back(out.pre_merge.witness[i]);
        rep.lattice_measure[static_cast<std::size_t>(j)] += cube_measure(d, r);
    }
    const auto heaviest = std::max_element(rep.lattice_measure.begin(), rep.lattice_measure.end());
    out.merged = out.per_lattice[static_cast<std::size_t>(heaviest - rep.lattice_measure.begin())];
    rep.merged_count = out.merged.cubes.size();

    const Vector tb = commutator_apply(t.as_map(), b, m, f);
    rep.lhs = (tb.cwiseAbs().array() * g.cwiseAbs().array()).sum() * d.cell_measure();

    rep.form_b_on_f = sparse_form(d, out.merged, b, m, f, g, p0, q0, alpha, FormSide::BOnFirst);
    rep.form_b_on_g = sparse_form(d, out.merged, b, m, f, g, p0, q0, alpha, FormSide::BOnSecond);
    rep.c_two_term = safe_ratio(rep.lhs, rep.form_b_on_f + rep.form_b_on_g);
    for (const SparseFamily& fam : out.per_lattice) {
        if (fam.cubes.empty()) continue;
        rep.form_all_lattices += sparse_form(d, fam, b, m, f, g, p0, q0, alpha, FormSide::BOnFirst) +
                                 sparse_form(d, fam, b, m, f, g, p0, q0, alpha, FormSide::BOnSecond);
    }
    rep.c_all_lattices = safe_ratio(rep.lhs, rep.form_all_lattices);
    const double q0c = conjugate(q0);
    for (const Cube& q : out.pre_merge.cubes) {
        const Cube r{lattice_of_triple(d, q), q.level, q.coords};
        const double scale = std::pow(cube_measure(d, r), 1.0 + alpha / d.dim);
        for (double c : pair_averages(d, r, b, m, f, g, p0, q0c)) rep.form_full += c * scale;
    }
    rep.c_full = safe_ratio(rep.lhs, rep.form_full);
    return out;
}

double sparse_form(const GridDomain& d, const SparseFamily& s, const Vector& b, int m, const Vector& f,
                   const Vector& g, double p0, double q0, double alpha, FormSide side) {
    const SparsenessCheck check = verify_sparseness(d, s);
    if (!check.ok) throw SparsenessError("sparse form refused: " + check.message);
    const double q0c = conjugate(q0);
    double total = 0.0;
    for (const Cube& q : s.cubes) {
        const std::vector<Index> cells = cells_of(d, q);
        const double measure = cube_measure(d, q);
        const double bmean = mean_over(cells, b);
        auto osc = [&](Index c) { return std::pow(std::abs(b[c] - bmean), m); };
        double a1 = 0.0;
        double a2 = 0.0;
        if (side == FormSide::BOnFirst) {
            a1 = geometric_average(d, cells, measure, p0, [&](Index c) { return osc(c) * f[c]; });
            a2 = geometric_average(d, cells, measure, q0c, [&](Index c) { return g[c]; });
        } else {
            a1 = geometric_average(d, cells, measure, p0, [&](Index c) { return f[c]; });
            a2 = geometric_average(d, cells, measure, q0c, [&](Index c) { return osc(c) * g[c]; });
        }
        total += a1 * a2 * std::pow(measure, 1.0 + alpha / d.dim);
    }
    return total;
}

std::vector<double> pair_averages(const GridDomain& d, const Cube& q, const Vector& b, int m, const Vector& f,
                                  const Vector& g, double r, double t) {
    const std::vector<Index> cells = cells_of(d, q);
    const double measure = cube_measure(d, q);
    const double bmean = mean_over(cells, b);
    std::vector<double> out;
    for (int k = 0; k <= m; ++k) {
        const double left = geometric_average(d, cells, measure, r,
                                              [&](Index c) { return std::pow(std::abs(b[c] - bmean), m - k) * f[c]; });
        const double right = geometric_average(d, cells, measure, t,
                                               [&](Index c) { return std::pow(std::abs(b[c] - bmean), k) * g[c]; });
        out.push_back(left * right);
    }
    return out;
}

Vector sparse_operator(const GridDomain& d, const std::vector<Cube>& s, double r, double alpha, const Vector& f) {
    if (!(r > 0.0)) throw ParameterError("sparse operator exponent must be positive");
    if (f.size() > 0 && f.minCoeff() < 0.0) throw ParameterError("sparse operator needs a nonnegative input");
    Vector acc = Vector::Zero(d.cell_count());
    for (const Cube& q : s) {
        const std::vector<Index> cells = cells_of(d, q);
        double integral = 0.0;
        for (Index c : cells) integral += f[c];
        integral *= d.cell_measure();
        const double term = std::pow(std::pow(cube_measure(d, q), -alpha) * integral, r);
        for (Index c : cells) acc[c] += term;
    }
    return acc.array().pow(1.0 / r).matrix();
}

Vector iterated_sparse_avg(const GridDomain& d, const std::vector<Cube>& s, const Vector& nu, int k,
                           const Vector& f) {
    if (k < 0) throw ParameterError("iteration count must be nonnegative");
    Vector cur = f;
    for (int it = 0; it < k; ++it) {
        Vector next = Vector::Zero(d.cell_count());
        for (const Cube& q : s) {
            const std::vector<Index> cells = cells_of(d, q);
            double sum = 0.0;
            for (Index c : cells) sum += cur[c];
            const double avg = sum * d.cell_measure() / cube_measure(d, q);
            for (Index c : cells) next[c] += avg;
        }
        cur = (next.array() * nu.array()).matrix();
    }
    return cur;
}

StoppingResult stopping_family(const GridDomain& d, const std::vector<Cube>& s, const Vector& f, const Vector& u,
                               double r, const Cube& q0_cube) {
    if (!(r > 0.0)) throw ParameterError("stopping exponent must be positive");
    StoppingResult out;
    auto average = [&](const Cube& q) -> std::optional<double> {
        double mass = 0.0;
        double acc = 0.0;
        for (Index c : cells_of(d, q)) {
            mass += u[c];
            acc += std::pow(std::abs(f[c]), r) * u[c];
        }
        if (!(mass > 0.0)) return std::nullopt;
        return std::pow(acc / mass, 1.0 / r);
    };
    auto mass_of = [&](const Cube& q) {
        double mass = 0.0;
        for (Index c : cells_of(d, q)) mass += u[c];
        return mass * d.cell_measure();
    };
    const auto top_avg = average(q0_cube);
    if (!top_avg) throw DegenerateWeightError("weight has no mass on the top cube");
    out.family.push_back(q0_cube);
    std::vector<double> fam_avg{*top_avg};
    for (std::size_t head = 0; head < out.family.size(); ++head) {
        const Cube parent = out.family[head];
        const double level = fam_avg[head];
        std::vector<Cube> candidates;
        std::vector<double> cand_avg;
        for (const Cube& q : s) {
            if (!strictly_inside(d, q, parent)) continue;
            const auto a = average(q);
            if (!a) {
                out.warnings.push_back("weight has no mass on a visited cube; branch pruned");
                continue;
            }
            if (*a > 2.0 * level) {
                candidates.push_back(q);
                cand_avg.push_back(*a);
            }
        }
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            bool maximal = true;
            for (std::size_t j = 0; j < candidates.size() && maximal; ++j)
                if (j != i && (strictly_inside(d, candidates[i], candidates[j]) ||
                               (j < i && candidates[i] == candidates[j])))
                    maximal = false;
            if (maximal) {
                out.family.push_back(candidates[i]);
                fam_avg.push_back(cand_avg[i]);
            }
        }
    }
    out.verified = true;
    out.parent.assign(s.size(), -1);
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!inside(d, s[i], q0_cube)) continue;
        int best = -1;
        for (std::size_t j = 0; j < out.family.size(); ++j)
            if (inside(d, s[i], out.family[j]) &&
                (best < 0 || cube_box(d, out.family[j]).len < cube_box(d, out.family[static_cast<std::size_t>(best)]).len))
                best = static_cast<int>(j);
        out.parent[i] = best;
        const auto a = average(s[i]);
        if (a && best >= 0 && *a > 2.0 * fam_avg[static_cast<std::size_t>(best)] * (1.0 + 1e-12)) out.verified = false;
    }
    for (std::size_t j = 0; j < out.family.size(); ++j) out.carleson_sum += fam_avg[j] * mass_of(out.family[j]);
    return out;
}

TestingReport testing_norms(const GridDomain& d, const std::vector<Cube>& s, const Vector& u, const Vector& v,
                            const std::vector<double>& lambda, double p, double q, double r, double s_exp) {
    if (lambda.size() != s.size()) throw ParameterError("one lambda per cube is required");
    const double hn = d.cell_measure();
    const std::size_t count = s.size();
    std::vector<std::vector<Index>> cells(count);
    std::vector<double> tau(count), avg_u(count), avg_v(count), mass_u(count), mass_v(count);
    for (std::size_t i = 0; i < count; ++i) {
        cells[i] = cells_of(d, s[i]);
        const double measure = static_cast<double>(cells[i].size()) * hn;
        double su = 0.0;
        double sv = 0.0;
        for (Index c : cells[i]) {
            su += u[c];
            sv += v[c];
        }
        mass_u[i] = su * hn;
        mass_v[i] = sv * hn;
        if (!(mass_u[i] > 0.0) || !(mass_v[i] > 0.0)) throw DegenerateWeightError("testing weight has zero mass");
        avg_u[i] = mass_u[i] / measure;
        avg_v[i] = mass_v[i] / measure;
        const double v_power = std::isinf(s_exp) ? 1.0 : std::pow(avg_v[i], -1.0 / s_exp);
        tau[i] = std::pow(avg_u[i], 1.0 / r - 1.0) * v_power * lambda[i] / measure;
    }
    const double pc = conjugate(p);
    const double qc = conjugate(q);
    TestingReport rep;
    for (std::size_t ri = 0; ri < count; ++ri) {
        Vector tu = Vector::Zero(d.cell_count());
        Vector tv = Vector::Zero(d.cell_count());
        for (std::size_t i = 0; i < count; ++i) {
            if (!inside(d, s[i], s[ri])) continue;
            for (Index c : cells[i]) {
                tu[c] += tau[i] * avg_u[i];
                tv[c] += tau[i] * avg_v[i];
            }
        }
        const double z = weighted_lp_norm(tu, v, q, hn) / std::pow(mass_u[ri], 1.0 / p);
        const double zs = weighted_lp_norm(tv, u, pc, hn) / (std::isinf(qc) ? 1.0 : std::pow(mass_v[ri], 1.0 / qc));
        rep.zeta_terms.push_back(z);
        rep.zeta_star_terms.push_back(zs);
        rep.zeta = std::max(rep.zeta, z);
        rep.zeta_star = std::max(rep.zeta_star, zs);
    }
    return rep;
}

namespace {

double weight_mass(const GridDomain& d, const Cube& q, const Vector& w) {
    double m = 0.0;
    for (Index c : cells_of(d, q)) m += w[c];
    return m * d.cell_measure();
}

}  // namespace

double cov_norm_rhs(const GridDomain& d, const std::vector<Cube>& s, const std::vector<double>& lambda,
                    const Vector& w, double p) {
    if (!(p >= 1.0) || std::isinf(p)) throw ParameterError("COV formula needs 1 <= p < inf");
    if (lambda.size() != s.size()) throw ParameterError("one lambda per cube is required");
    std::vector<double> mass(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        mass[i] = weight_mass(d, s[i], w);
        if (!(mass[i] > 0.0)) throw DegenerateWeightError("weight has zero mass on a family cube");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        double inner = 0.0;
        for (std::size_t j = 0; j < s.size(); ++j)
            if (inside(d, s[j], s[i])) inner += lambda[j] * mass[j];
        total += lambda[i] * std::pow(inner / mass[i], p - 1.0) * mass[i];
    }
    return std::pow(total, 1.0 / p);
}

double cov_norm_direct(const GridDomain& d, const std::vector<Cube>& s, const std::vector<double>& lambda,
                       const Vector& w, double p) {
    if (lambda.size() != s.size()) throw ParameterError("one lambda per cube is required");
    Vector acc = Vector::Zero(d.cell_count());
    for (std::size_t i = 0; i < s.size(); ++i)
        for (Index c : cells_of(d, s[i])) acc[c] += lambda[i];
    return weighted_lp_norm(acc, w, p, d.cell_measure());
}

SparseSumBound sparse_sum_bound(const GridDomain& d, const std::vector<Cube>& s, const Vector& omega,
                                const Vector& sigma, double alpha, double beta, double gamma, const Cube& r,
                                double sigma_ainf, double omega_ainf) {
    if (alpha < 0.0 || beta < 0.0 || gamma < 0.0 || alpha + beta + gamma < 1.0)
        throw ParameterError("sparse sum bound needs nonnegative exponents with sum at least 1");
    auto term = [&](const Cube& q) {
        return std::pow(inside_measure(d, q), alpha) * std::pow(weight_mass(d, q, sigma), beta) *
               std::pow(weight_mass(d, q, omega), gamma);
    };
    SparseSumBound out;
    out.universal = alpha > 0.0;
    for (const Cube& q : s)
        if (inside(d, q, r)) out.lhs += term(q);
    out.rhs = term(r);
    if (!out.universal) out.rhs *= std::pow(sigma_ainf, beta) * std::pow(omega_ainf, gamma);
    out.ratio = out.rhs > 0.0 ? out.lhs / out.rhs : (out.lhs > 0.0 ? kInf : 0.0);
    return out;
}

}  // namespace sparsedom
