// environment.cpp — Heat-bath environment and coupling brackets

#include "qdiss/environment.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

// Boost 1.74's pchip.hpp calls unqualified isnan without including it.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

#include "qdiss/errors.hpp"

namespace qdiss {

bool Interval::contains(double x) const
{
    if (!std::isfinite(x)) return false;
    const bool above = closed_lo ? x >= lo : x > lo;
    const bool below = closed_hi ? x <= hi : x < hi;
    return above && below;
}

LinearEntropyCurve::LinearEntropyCurve(double temperature, double offset)
    : temperature_(temperature), offset_(offset)
{
    if (!(std::isfinite(temperature) && temperature > 0.0)) {
        throw DomainError("LinearEntropyCurve: temperature must be finite and positive");
    }
}

double LinearEntropyCurve::entropy(double energy) const { return energy / temperature_ + offset_; }
double LinearEntropyCurve::slope(double) const { return 1.0 / temperature_; }

Interval LinearEntropyCurve::domain() const
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {-inf, inf, false, false};
}

std::string LinearEntropyCurve::describe() const
{
    std::ostringstream os;
    os << "linear(T=" << temperature_ << ")";
    return os.str();
}

LogEntropyCurve::LogEntropyCurve(double capacity) : capacity_(capacity)
{
    if (!(std::isfinite(capacity) && capacity > 0.0)) {
        throw DomainError("LogEntropyCurve: capacity C must be finite and positive");
    }
}

double LogEntropyCurve::entropy(double energy) const { return capacity_ * std::log(energy); }
double LogEntropyCurve::slope(double energy) const { return capacity_ / energy; }

Interval LogEntropyCurve::domain() const
{
    return {0.0, std::numeric_limits<double>::infinity(), false, false};
}

std::string LogEntropyCurve::describe() const
{
    std::ostringstream os;
    os << "log(C=" << capacity_ << ")";
    return os.str();
}

struct TabulatedEntropyCurve::Impl {
    double lo;
    double hi;
    std::size_t points;
    boost::math::interpolators::pchip<std::vector<double>> spline;
};

TabulatedEntropyCurve::TabulatedEntropyCurve(std::vector<double> energies,
                                             std::vector<double> entropies)
{
    if (energies.size() != entropies.size()) {
        throw DimensionError("TabulatedEntropyCurve: column lengths differ");
    }
    if (energies.size() < 4) {
        throw DomainError("TabulatedEntropyCurve: at least 4 points are required");
    }
    for (std::size_t i = 1; i < energies.size(); ++i) {
        if (!(energies[i] > energies[i - 1])) {
            throw DomainError("TabulatedEntropyCurve: energies must be strictly increasing");
        }
        if (!(entropies[i] > entropies[i - 1])) {
            throw DomainError("TabulatedEntropyCurve: entropies must be strictly increasing");
        }
    }
    const double lo = energies.front();
    const double hi = energies.back();
    const std::size_t n = energies.size();
    impl_ = std::unique_ptr<Impl>(new Impl{
        lo, hi, n,
        boost::math::interpolators::pchip<std::vector<double>>(std::move(energies),
                                                               std::move(entropies))});
}

TabulatedEntropyCurve::~TabulatedEntropyCurve() = default;

std::shared_ptr<TabulatedEntropyCurve> TabulatedEntropyCurve::from_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open entropy table '" + path + "'");
    std::vector<double> h;
    std::vector<double> s;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream row(line);
        double a = 0.0;
        double b = 0.0;
        if (!(row >> a)) continue;
        std::string rest;
        if (!(row >> b) || (row >> rest)) {
            std::ostringstream os;
            os << path << ":" << lineno << ": expected two numeric columns (H_e S_e)";
            throw DomainError(os.str());
        }
        h.push_back(a);
        s.push_back(b);
    }
    return std::make_shared<TabulatedEntropyCurve>(std::move(h), std::move(s));
}

double TabulatedEntropyCurve::entropy(double energy) const { return impl_->spline(energy); }
double TabulatedEntropyCurve::slope(double energy) const { return impl_->spline.prime(energy); }
Interval TabulatedEntropyCurve::domain() const { return {impl_->lo, impl_->hi, true, true}; }

std::string TabulatedEntropyCurve::describe() const
{
    std::ostringstream os;
    os << "tabulated(" << impl_->points << " points on [" << impl_->lo << ", " << impl_->hi << "])";
    return os.str();
}

ClassicalObservable ClassicalObservable::zero()
{
    return {[](double) { return 0.0; }, [](double) { return 0.0; }};
}

ClassicalObservable ClassicalObservable::energy()
{
    return {[](double h) { return h; }, [](double) { return 1.0; }};
}

ClassicalObservable ClassicalObservable::entropy(std::shared_ptr<const EntropyCurve> curve)
{
    return {[curve](double h) { return curve->entropy(h); },
            [curve](double h) { return curve->slope(h); }};
}

BathModel::BathModel(std::shared_ptr<const EntropyCurve> curve) : curve_(std::move(curve))
{
    if (!curve_) throw DomainError("BathModel: entropy curve is required");
}

void BathModel::require_in_domain(const BathState& state) const
{
    const Interval dom = curve_->domain();
    if (!dom.contains(state.energy)) {
        std::ostringstream os;
        os << "bath energy " << state.energy << " is outside the domain of " << curve_->describe();
        throw DomainError(os.str());
    }
}

double BathModel::entropy(const BathState& state) const
{
    require_in_domain(state);
    return curve_->entropy(state.energy);
}

double BathModel::poisson_bracket(const ClassicalObservable&, const ClassicalObservable&,
                                  const BathState&) const
{
    return 0.0;
}

double BathModel::dissipative_bracket(const ClassicalObservable&, const ClassicalObservable&,
                                      const BathState&) const
{
    return 0.0;
}

double temperature(const BathModel& model, const BathState& state)
{
    model.require_in_domain(state);
    const double slope = model.curve().slope(state.energy);
    if (!(std::isfinite(slope) && slope > 0.0)) {
        std::ostringstream os;
        os << "dS_e/dH_e = " << slope << " at H_e = " << state.energy
           << "; the bath temperature must be positive and finite";
        throw DomainError(os.str());
    }
    return 1.0 / slope;
}

CouplingChannel::CouplingChannel(HermitianOperator coupling, double zeta_, std::string label_)
    : q(std::move(coupling)), zeta(zeta_), label(std::move(label_))
{
    if (!(std::isfinite(zeta) && zeta >= 0.0)) {
        std::ostringstream os;
        os << "CouplingChannel: friction zeta = " << zeta
           << " must be >= 0 (the coupling bracket must be positive semidefinite)";
        throw DomainError(os.str());
    }
}

double BracketCoefficients::min_eigenvalue() const
{
    const double mean = 0.5 * (e_hh + e_ss);
    const double half_gap = std::hypot(0.5 * (e_hh - e_ss), e_hs);
    return mean - half_gap;
}

BracketCoefficients bracket_coefficients(const CouplingChannel& channel, const BathModel& model,
                                         const BathState& state)
{
    const double t = temperature(model, state);
    return {channel.zeta * t, channel.zeta, channel.zeta / t};
}

double coupling_bracket(const CouplingChannel& channel, const BathModel& model,
                        const BathState& state, const ClassicalObservable& a,
                        const ClassicalObservable& b)
{
    const double t = temperature(model, state);
    return a.slope(state.energy) * channel.zeta * t * b.slope(state.energy);
}

} // namespace qdiss
