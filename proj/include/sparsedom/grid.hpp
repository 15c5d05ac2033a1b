#pragma once

#include <Eigen/Dense>

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace sparsedom {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Coord = std::array<std::int64_t, 2>;
using Point = std::array<double, 2>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Rectangular (square) domain cut into 2^(depth*dim) half-open cells.
// Cells are numbered x-fastest: index = iy * 2^depth + ix.
struct GridDomain {
    int dim = 1;
    Point origin{0.0, 0.0};
    double side = 1.0;
    int depth = 1;

    std::int64_t cells_per_axis() const noexcept { return std::int64_t{1} << depth; }
    Index cell_count() const noexcept;
    double cell_size() const noexcept { return side / static_cast<double>(cells_per_axis()); }
    double cell_measure() const noexcept;
    double measure() const noexcept;

    Coord cell_coords(Index cell) const noexcept;
    Index cell_index(const Coord& c) const noexcept;
    Point cell_center(Index cell) const noexcept;
    /// Cell holding a point of the closed-open domain, or nullopt outside.
    std::optional<Index> locate(const Point& x) const noexcept;

    bool operator==(const GridDomain&) const = default;
};

/// Validated constructor; origin must carry `dim` coordinates.
GridDomain make_domain(int dim, const std::vector<double>& origin, double side, int depth);

// Real data on the cells of a domain. Zero outside the domain.
struct GridFunction {
    GridDomain domain;
    Vector values;

    static GridFunction zeros(const GridDomain& d);
    static GridFunction constant(const GridDomain& d, double c);
    static GridFunction sample(const GridDomain& d, const std::function<double(const Point&)>& fn);

    Index size() const noexcept { return values.size(); }
    double operator[](Index i) const { return values[i]; }
    double& operator[](Index i) { return values[i]; }
};

/// L^p norm over the domain; p = inf gives the max norm.
double lp_norm(const GridFunction& f, double p);
/// L^p(w) norm, sum of |f|^p w h^n.
double weighted_lp_norm(const Vector& f, const Vector& w, double p, double cell_measure);

// Axis-aligned square of cells; may extend past the domain.
struct Box {
    Coord lo{0, 0};
    std::int64_t len = 1;

    bool operator==(const Box&) const = default;
};

struct CellRange {
    Coord lo{0, 0};
    Coord hi{0, 0};  // exclusive
    bool empty = true;
};

CellRange clip(const GridDomain& d, const Box& b) noexcept;
CellRange intersect(const CellRange& a, const CellRange& b) noexcept;
Index range_count(const GridDomain& d, const CellRange& r) noexcept;
Index cells_inside(const GridDomain& d, const Box& b) noexcept;
/// Geometric measure (len*h)^dim, regardless of the domain.
double box_measure(const GridDomain& d, const Box& b) noexcept;
double box_side(const GridDomain& d, const Box& b) noexcept;
std::vector<Index> box_cells(const GridDomain& d, const Box& b);
bool box_contains_cell(const GridDomain& d, const Box& b, Index cell) noexcept;
bool box_contains(const GridDomain& d, const Box& outer, const Box& inner) noexcept;
bool boxes_intersect(const GridDomain& d, const Box& a, const Box& b) noexcept;
/// Concentric dilation by an odd integer factor.
Box dilate(const GridDomain& d, const Box& b, std::int64_t factor);

template <typename Fn>
void for_each_cell(const GridDomain& d, const Box& b, Fn&& fn) {
    const CellRange r = clip(d, b);
    if (r.empty) return;
    const std::int64_t n = d.cells_per_axis();
    if (d.dim == 1) {
        for (std::int64_t x = r.lo[0]; x < r.hi[0]; ++x) fn(static_cast<Index>(x));
    } else {
        for (std::int64_t y = r.lo[1]; y < r.hi[1]; ++y)
            for (std::int64_t x = r.lo[0]; x < r.hi[0]; ++x) fn(static_cast<Index>(y * n + x));
    }
}

// Summed-area table for O(1) box sums of a cell array.
class BoxSums {
public:
    BoxSums(const GridDomain& d, const Vector& values);
    double sum(const Box& b) const noexcept;
    double sum(const CellRange& r) const noexcept;

private:
    GridDomain domain_;
    std::int64_t stride_ = 0;
    std::vector<double> table_;
};

inline constexpr int kBaseLattice = -1;

// Dyadic cube addressed by lattice, level and integer coordinates.
//
// lattice == kBaseLattice: the standard cubes [m l, (m+1) l) with l = side / 2^level.
// lattice in [0, 3^dim): tripled cubes [(m-1) l, (m+2) l) whose residues
// m mod 3 follow the lattice's per-axis class sequence.
struct Cube {
    int lattice = kBaseLattice;
    int level = 0;
    Coord coords{0, 0};

    auto operator<=>(const Cube&) const = default;
};

Box cube_box(const GridDomain& d, const Cube& q);
double side_length(const GridDomain& d, const Cube& q);
double cube_measure(const GridDomain& d, const Cube& q);
/// 3Q as a cell box.
Box triple(const GridDomain& d, const Cube& q);
std::vector<Cube> dyadic_children(const GridDomain& d, const Cube& q);
std::optional<Cube> dyadic_parent(const GridDomain& d, const Cube& q);

struct DyadicLattice {
    int shift = kBaseLattice;
    int coarsest_level = 0;
    int finest_level = 0;

    bool operator==(const DyadicLattice&) const = default;
};

/// Residue class (mod 3) of the tripled-lattice coordinates on one axis at a level.
int lattice_class(int shift, int axis, int level);

DyadicLattice base_lattice(const GridDomain& d);
/// The 3^dim lattices whose union is {3Q : Q dyadic}.
std::vector<DyadicLattice> three_lattices(const GridDomain& d);
/// Base lattice followed by the 3^dim tripled lattices; the default cube system.
std::vector<DyadicLattice> all_lattices(const GridDomain& d);

bool lattice_contains(const GridDomain& d, const DyadicLattice& lat, const Cube& q);
/// Lattice cubes at `level` that intersect the domain.
std::vector<Cube> cubes_at_level(const GridDomain& d, const DyadicLattice& lat, int level);
std::vector<Cube> enumerate_cubes(const GridDomain& d, const std::vector<DyadicLattice>& lats);
/// Lattice cubes at `level` whose box meets the given cell range.
std::vector<Cube> cubes_intersecting(const GridDomain& d, const DyadicLattice& lat, int level,
                                     const CellRange& range);
Cube cube_containing(const GridDomain& d, const DyadicLattice& lat, int level, Index cell);
/// Shift index of the tripled lattice holding 3Q for a base cube Q.
int lattice_of_triple(const GridDomain& d, const Cube& base_cube);

/// Cells of S_j(Q): Q for j = 0, 3^j Q minus 3^(j-1) Q otherwise, clipped to the domain.
std::vector<Index> annulus(const GridDomain& d, const Cube& q, int j);

/// <f>_{r,Q}: geometric |Q|, zero extension outside the domain. r = inf gives max |f|.
double average(const GridFunction& f, const Box& q, double r);
double average(const GridFunction& f, const Cube& q, double r);
/// <f>^u_{r,Q}; throws DegenerateWeightError when u(Q) = 0.
double weighted_average(const GridFunction& f, const Box& q, double r, const GridFunction& u);
/// osc_s(f; Q) over the cells of Q inside the domain; s = inf gives max - min.
double oscillation(const GridFunction& f, const Box& q, double s);
/// Same, on an explicit list of values.
double oscillation_of(std::vector<double> values, double s);

}  // namespace sparsedom
