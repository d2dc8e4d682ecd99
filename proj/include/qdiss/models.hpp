// models.hpp — Particle in a polynomial potential and the damped two-level system

#pragma once

#include <array>
#include <vector>

#include "qdiss/environment.hpp"
#include "qdiss/operator_algebra.hpp"

namespace qdiss {

// V(Q) = sum_k c_k Q^k with degree <= 4.
struct Polynomial {
    std::array<double, 5> coefficients{};

    static Polynomial harmonic(double mass, double omega);

    double operator()(double x) const;
    double derivative(double x) const;
    Polynomial derivative() const;
    int degree() const;
};

struct ParticleModel {
    double mass = 1.0;
    Polynomial potential;
    double basis_omega = 1.0;  // frequency of the ladder basis
    HermitianOperator q;
    HermitianOperator p;
    HermitianOperator h;

    Index dim() const { return h.dim(); }
    // Friction acts through the position.
    CouplingChannel channel(double zeta) const;

    // Q^2, P^2 and the symmetrized PQ + QP as matrix products in the truncated basis.
    HermitianOperator qq() const;
    HermitianOperator pp() const;
    HermitianOperator pq_sym() const;
};

// Truncated harmonic-oscillator ladder representation with basis_dim >= 4 levels.
// basis_omega <= 0 picks sqrt(2 c_2 / m) when c_2 > 0 and 1 otherwise.
ParticleModel build_particle(double mass, const Polynomial& potential, Index basis_dim,
                             const PhysicalConstants& c = {}, double basis_omega = 0.0);

// Caldeira-Leggett friction coefficient for relaxation rate gamma: zeta = 2 gamma m.
double caldeira_leggett_zeta(double gamma, double mass);

struct TwoLevelModel {
    double omega;
    double gamma0;
    double temperature;
    double zeta;        // hbar gamma0 / (4 omega), shared by both channels
    double rate_gamma;  // 2 gamma0 k_B T / (hbar omega)
    HermitianOperator h;
    std::vector<CouplingChannel> channels;  // sigma1, sigma2
};

TwoLevelModel build_two_level(double omega, double gamma0, double temperature,
                              const PhysicalConstants& c = {});

// exp(-H / (k_B T)) / Z, with H shifted by its ground-state energy first.
DensityMatrix gibbs_state(const HermitianOperator& h, double temperature,
                          const PhysicalConstants& c = {});

// U rho_T U^dagger where rho_T is the thermal state of the ladder oscillator
// of frequency W = basis_omega (occupations ~ exp(-n hbar W / k_B T)) and U
// displaces to (<Q>, <P>) = (q0, p0). U orthonormalizes the columns of the
// N x N block of the exact displacement in level order, so low levels are
// displaced accurately and the truncation error sits on the highest levels.
DensityMatrix displaced_thermal_state(const ParticleModel& model, double temperature, double q0,
                                      double p0, const PhysicalConstants& c = {});

} // namespace qdiss
