// environment.hpp — Classical environment: bath state, entropy curve S_e(H_e),
// temperature and coupling-bracket coefficients
//
// A coupling channel with friction zeta defines the bracket
//
//     E^Q(A_e, B_e) = (dA_e/dH_e) zeta T_e (dB_e/dH_e),
//
// so that E_HH = zeta T_e, E_HS = zeta and E_SS = zeta / T_e.

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qdiss/operator_algebra.hpp"

namespace qdiss {

struct BathState {
    double energy = 0.0;
};

struct Interval {
    double lo;
    double hi;
    bool closed_lo = true;
    bool closed_hi = true;

    bool contains(double x) const;
};

class EntropyCurve {
public:
    virtual ~EntropyCurve() = default;

    virtual double entropy(double energy) const = 0;
    // dS_e/dH_e
    virtual double slope(double energy) const = 0;
    virtual Interval domain() const = 0;
    virtual std::string describe() const = 0;
};

// S_e = H_e / T0 + S0: a bath at constant temperature T0.
class LinearEntropyCurve final : public EntropyCurve {
public:
    explicit LinearEntropyCurve(double temperature, double offset = 0.0);

    double entropy(double energy) const override;
    double slope(double energy) const override;
    Interval domain() const override;
    std::string describe() const override;

private:
    double temperature_;
    double offset_;
};

// S_e = C ln(H_e), H_e > 0 (ideal bath with heat capacity C k_B-units).
class LogEntropyCurve final : public EntropyCurve {
public:
    explicit LogEntropyCurve(double capacity);

    double entropy(double energy) const override;
    double slope(double energy) const override;
    Interval domain() const override;
    std::string describe() const override;

private:
    double capacity_;
};

// Monotone piecewise-cubic (PCHIP) interpolation of tabulated (H_e, S_e).
class TabulatedEntropyCurve final : public EntropyCurve {
public:
    // Both columns strictly increasing, at least 4 points (monotone cubic interpolation needs them).
    TabulatedEntropyCurve(std::vector<double> energies, std::vector<double> entropies);
    ~TabulatedEntropyCurve() override;

    // Two whitespace-separated columns per line; '#' starts a comment.
    static std::shared_ptr<TabulatedEntropyCurve> from_file(const std::string& path);

    double entropy(double energy) const override;
    double slope(double energy) const override;
    Interval domain() const override;
    std::string describe() const override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// A classical observable of the scalar bath state, with its energy derivative.
struct ClassicalObservable {
    std::function<double(double)> value;
    std::function<double(double)> slope;

    static ClassicalObservable zero();
    static ClassicalObservable energy();
    static ClassicalObservable entropy(std::shared_ptr<const EntropyCurve> curve);
};

// Heat-bath environment. The classical Poisson bracket and the standard
// dissipative bracket are hooks for richer environments; both vanish for a
// bath described by its energy alone.
class BathModel {
public:
    explicit BathModel(std::shared_ptr<const EntropyCurve> curve);
    virtual ~BathModel() = default;

    const EntropyCurve& curve() const noexcept { return *curve_; }
    std::shared_ptr<const EntropyCurve> curve_ptr() const noexcept { return curve_; }

    // Throws DomainError if the energy lies outside the curve's domain.
    void require_in_domain(const BathState& state) const;
    double entropy(const BathState& state) const;

    virtual double poisson_bracket(const ClassicalObservable& a, const ClassicalObservable& b,
                                   const BathState& state) const;
    virtual double dissipative_bracket(const ClassicalObservable& a, const ClassicalObservable& b,
                                       const BathState& state) const;

private:
    std::shared_ptr<const EntropyCurve> curve_;
};

// 1 / (dS_e/dH_e). Throws DomainError out of domain or for non-positive slope.
double temperature(const BathModel& model, const BathState& state);

struct CouplingChannel {
    // zeta must be finite and >= 0.
    CouplingChannel(HermitianOperator coupling, double zeta, std::string label = {});

    HermitianOperator q;
    double zeta;
    std::string label;
};

struct BracketCoefficients {
    double e_hh = 0.0;
    double e_hs = 0.0;
    double e_ss = 0.0;

    // Smallest eigenvalue of [[e_hh, e_hs], [e_hs, e_ss]].
    double min_eigenvalue() const;
};

BracketCoefficients bracket_coefficients(const CouplingChannel& channel, const BathModel& model,
                                         const BathState& state);

// E^Q(A_e, B_e) for arbitrary classical observables.
double coupling_bracket(const CouplingChannel& channel, const BathModel& model,
                        const BathState& state, const ClassicalObservable& a,
                        const ClassicalObservable& b);

} // namespace qdiss
