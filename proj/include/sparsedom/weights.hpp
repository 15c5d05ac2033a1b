#pragma once

#include "sparsedom/grid.hpp"

#include <string>
#include <vector>

namespace sparsedom {

// Finite cube collection over which every characteristic is a maximum.
struct CubeSet {
    std::string id;
    std::vector<Cube> cubes;
};

/// All cubes of the base lattice and the 3^n tripled lattices, levels 0..depth.
CubeSet default_cubes(const GridDomain& d);
CubeSet lattice_cubes(const GridDomain& d, const std::vector<DyadicLattice>& lats, std::string id);

enum class Characteristic { Ap, Ainf, ReverseHolder, Apq, TwoWeight, BloomBmo };

const char* to_string(Characteristic c) noexcept;

struct WeightConstant {
    Characteristic which = Characteristic::Ap;
    std::vector<double> exponents;
    double value = 0.0;
    std::string cube_set;
    Cube argmax;
    std::vector<std::string> warnings;
};

/// Throws ParameterError unless every value is positive and finite.
void require_weight(const GridFunction& w);

/// |x - center|^exponent, the singular cell clamped to distance h/2.
GridFunction power_weight(const GridDomain& d, const Point& center, double exponent);

// Averages inside the characteristics are taken over Q intersected with the
// domain, so constant weights give exactly 1 on every cube.

/// max_Q <w>_Q <w^(1-p')>_Q^(p-1)
WeightConstant ap_constant(const GridFunction& w, double p, const CubeSet& cubes);
/// Fujii-Wilson form with M realized over `lattices`.
WeightConstant ainf_constant(const GridFunction& w, const CubeSet& cubes,
                             const std::vector<DyadicLattice>& lattices);
/// max_Q <w>_{r,Q} / <w>_Q; r = inf allowed.
WeightConstant rh_constant(const GridFunction& w, double r, const CubeSet& cubes);
/// max_Q <w^q>_Q <w^(-p')>_Q^(q/p')
WeightConstant apq_constant(const GridFunction& w, double p, double q, const CubeSet& cubes);
/// max_Q |Q|^alpha omega(Q)^beta sigma(Q)^gamma, measures taken on Q in the domain.
/// A warning is attached when alpha > 0 or alpha + beta + gamma < 0.
WeightConstant two_weight_constant(const GridFunction& omega, const GridFunction& sigma, double alpha,
                                   double beta, double gamma, const CubeSet& cubes);

/// (mu / lambda)^(1/m); m = 0 is refused.
GridFunction bloom_weight(const GridFunction& mu, const GridFunction& lambda, int m);
/// max_Q (1/nu(Q)) sum_Q |b - <b>_Q| h^n
WeightConstant bmo_nu(const GridFunction& b, const GridFunction& nu, const CubeSet& cubes);

}  // namespace sparsedom
