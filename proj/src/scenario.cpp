// scenario.cpp — Scenario parsing, validation and assembly

#include "qdiss/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "qdiss/errors.hpp"
#include "qdiss/models.hpp"

namespace qdiss {

using nlohmann::json;
namespace fs = std::filesystem;

std::string Diagnostic::str() const
{
    std::ostringstream os;
    if (line > 0) os << "line " << line << ", column " << column << ": ";
    if (!field.empty()) os << field << ": ";
    os << message;
    return os.str();
}

namespace {

std::string summarize(const std::vector<Diagnostic>& diags)
{
    std::string out = "invalid scenario";
    for (const auto& d : diags) out += "\n  " + d.str();
    return out;
}

std::string join(const std::string& path, const std::string& key)
{
    return path.empty() ? key : path + "." + key;
}

enum class Bound { any, positive, non_negative };

// Accumulates diagnostics while walking the document.
class Checker {
public:
    std::vector<Diagnostic> diags;

    void error(const std::string& field, const std::string& message)
    {
        diags.push_back(Diagnostic{field, message, 0, 0});
    }

    bool ok() const { return diags.empty(); }

    const json* object(const json& parent, const std::string& key, const std::string& path,
                       bool required)
    {
        const std::string field = join(path, key);
        if (!parent.contains(key)) {
            if (required) error(field, "missing required block");
            return nullptr;
        }
        const json& v = parent.at(key);
        if (!v.is_object()) {
            error(field, "must be an object");
            return nullptr;
        }
        return &v;
    }

    std::optional<double> number(const json& obj, const std::string& key, const std::string& path,
                                 bool required, Bound bound = Bound::any)
    {
        const std::string field = join(path, key);
        if (!obj.contains(key)) {
            if (required) error(field, "missing required field");
            return std::nullopt;
        }
        const json& v = obj.at(key);
        if (!v.is_number()) {
            error(field, "must be a number");
            return std::nullopt;
        }
        const double x = v.get<double>();
        if (!std::isfinite(x)) {
            error(field, "must be finite");
            return std::nullopt;
        }
        if (bound == Bound::positive && !(x > 0.0)) {
            error(field, "must be > 0");
            return std::nullopt;
        }
        if (bound == Bound::non_negative && !(x >= 0.0)) {
            error(field, "must be >= 0");
            return std::nullopt;
        }
        return x;
    }

    std::optional<long long> integer(const json& obj, const std::string& key, const std::string& path,
                                     bool required, long long lo, long long hi)
    {
        const std::string field = join(path, key);
        if (!obj.contains(key)) {
            if (required) error(field, "missing required field");
            return std::nullopt;
        }
        const json& v = obj.at(key);
        if (!v.is_number_integer()) {
            error(field, "must be an integer");
            return std::nullopt;
        }
        const long long x = v.get<long long>();
        if (x < lo || x > hi) {
            error(field, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
            return std::nullopt;
        }
        return x;
    }

    std::optional<std::string> string(const json& obj, const std::string& key, const std::string& path,
                                      bool required, const std::vector<std::string>& choices = {})
    {
        const std::string field = join(path, key);
        if (!obj.contains(key)) {
            if (required) error(field, "missing required field");
            return std::nullopt;
        }
        const json& v = obj.at(key);
        if (!v.is_string()) {
            error(field, "must be a string");
            return std::nullopt;
        }
        std::string s = v.get<std::string>();
        if (!choices.empty() && std::find(choices.begin(), choices.end(), s) == choices.end()) {
            std::string list;
            for (const auto& c : choices) list += (list.empty() ? "" : ", ") + ("\"" + c + "\"");
            error(field, "unknown value \"" + s + "\"; expected one of " + list);
            return std::nullopt;
        }
        return s;
    }

    void allow_only(const json& obj, const std::string& path, std::initializer_list<const char*> keys)
    {
        for (const auto& [key, value] : obj.items()) {
            (void)value;
            bool known = false;
            for (const char* k : keys) known = known || key == k;
            if (!known) error(join(path, key), "unknown field");
        }
    }
};

std::shared_ptr<const EntropyCurve> parse_curve(Checker& ck, const json& bath, const fs::path& base)
{
    const std::string path = "bath.entropy_curve";
    const json* curve = ck.object(bath, "entropy_curve", "bath", true);
    if (!curve) return nullptr;
    const auto type = ck.string(*curve, "type", path, true, {"linear", "log", "tabulated"});
    if (!type) return nullptr;
    if (*type == "linear") {
        ck.allow_only(*curve, path, {"type", "temperature", "offset"});
        const auto t = ck.number(*curve, "temperature", path, true, Bound::positive);
        const auto off = ck.number(*curve, "offset", path, false);
        if (!t) return nullptr;
        return std::make_shared<LinearEntropyCurve>(*t, off.value_or(0.0));
    }
    if (*type == "log") {
        ck.allow_only(*curve, path, {"type", "heat_capacity"});
        const auto c = ck.number(*curve, "heat_capacity", path, true, Bound::positive);
        if (!c) return nullptr;
        return std::make_shared<LogEntropyCurve>(*c);
    }
    ck.allow_only(*curve, path, {"type", "file"});
    const auto file = ck.string(*curve, "file", path, true);
    if (!file) return nullptr;
    const fs::path resolved = base / *file;
    if (!fs::exists(resolved)) {
        ck.error(join(path, "file"), "referenced file does not exist: " + resolved.string());
        return nullptr;
    }
    try {
        return TabulatedEntropyCurve::from_file(resolved.string());
    } catch (const std::exception& e) {
        ck.error(join(path, "file"), e.what());
        return nullptr;
    }
}

// Rows of d real entries, or of 2d entries read as interleaved (re, im) pairs.
// Commas and whitespace both separate entries; '#' starts a comment.
std::optional<Matrix> read_matrix_file(Checker& ck, const std::string& field, const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        ck.error(field, "cannot read matrix file " + path.string());
        return std::nullopt;
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        std::vector<double> row;
        std::string tok;
        while (ls >> tok) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(tok, &used));
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                ck.error(field, "matrix file " + path.filename().string() + ": cannot parse \"" + tok + "\"");
                return std::nullopt;
            }
        }
        if (!row.empty()) rows.push_back(std::move(row));
    }
    const auto d = static_cast<Index>(rows.size());
    if (d == 0) {
        ck.error(field, "matrix file is empty");
        return std::nullopt;
    }
    const std::size_t width = rows.front().size();
    const bool complex_pairs = width == 2 * rows.size();
    if (!(width == rows.size() || complex_pairs)) {
        ck.error(field, "matrix file must have d rows of d (real) or 2d (re, im) entries");
        return std::nullopt;
    }
    Matrix m(d, d);
    for (Index i = 0; i < d; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        if (r.size() != width) {
            ck.error(field, "matrix file row " + std::to_string(i + 1) + " has a different length");
            return std::nullopt;
        }
        for (Index j = 0; j < d; ++j) {
            const auto k = static_cast<std::size_t>(j);
            m(i, j) = complex_pairs ? Complex(r[2 * k], r[2 * k + 1]) : Complex(r[k], 0.0);
        }
    }
    return m;
}

struct ModelParts {
    ModelKind kind;
    HermitianOperator h;
    std::vector<CouplingChannel> channels;
    std::vector<NamedObservable> observables;
    std::optional<ParticleModel> particle;
    std::optional<double> rate_hint;
};

Matrix projector(Index dim, Index k)
{
    Matrix m = Matrix::Zero(dim, dim);
    m(k, k) = 1.0;
    return m;
}

} // namespace

ScenarioInvalid::ScenarioInvalid(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(summarize(diagnostics)), diagnostics_(std::move(diagnostics))
{
}

json read_json_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioIOError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw ScenarioIOError("error while reading " + path.string());
    const std::string text = buf.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t byte = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        int line = 1;
        int column = 1;
        for (std::size_t i = 0; i < byte; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        std::string msg = e.what();
        if (const auto pos = msg.find("] "); pos != std::string::npos) msg.erase(0, pos + 2);
        throw ScenarioInvalid({Diagnostic{"", "JSON syntax error: " + msg, line, column}});
    }
}

std::vector<std::string> available_observables(ModelKind model)
{
    if (model == ModelKind::two_level) return {"H", "sigma1", "sigma2", "sigma3", "excited", "ground"};
    return {"H", "Q", "P", "QQ", "PP", "PQ_sym"};
}

std::vector<Diagnostic> validate_scenario(const json& doc, const fs::path& base_dir,
                                          std::optional<Scenario>* out)
{
    Checker ck;
    if (!doc.is_object()) {
        ck.error("", "scenario must be a JSON object");
        return ck.diags;
    }
    ck.allow_only(doc, "", {"id", "description", "units", "constants", "system", "bath",
                            "initial_state", "integrator", "output", "compare"});

    const auto id = ck.string(doc, "id", "", false);
    ck.string(doc, "description", "", false);

    // Units and constants
    PhysicalConstants constants;
    if (const auto units = ck.string(doc, "units", "", true, {"natural", "SI"})) {
        constants = *units == "SI" ? PhysicalConstants::si() : PhysicalConstants::natural();
    }
    if (const json* c = ck.object(doc, "constants", "", false)) {
        ck.allow_only(*c, "constants", {"hbar", "k_B"});
        if (auto v = ck.number(*c, "hbar", "constants", false, Bound::positive)) constants.hbar = *v;
        if (auto v = ck.number(*c, "k_B", "constants", false, Bound::positive)) constants.k_B = *v;
    }

    // System
    std::optional<ModelKind> kind;
    std::optional<double> omega, mass, basis_omega;
    std::optional<long long> basis_dim;
    Polynomial potential;
    if (const json* sys = ck.object(doc, "system", "", true)) {
        if (const auto model = ck.string(*sys, "model", "system", true, {"two_level", "particle"})) {
            if (*model == "two_level") {
                kind = ModelKind::two_level;
                ck.allow_only(*sys, "system", {"model", "omega"});
                omega = ck.number(*sys, "omega", "system", true, Bound::positive);
            } else {
                kind = ModelKind::particle;
                ck.allow_only(*sys, "system", {"model", "mass", "basis_dim", "basis_omega", "omega", "potential"});
                mass = ck.number(*sys, "mass", "system", false, Bound::positive);
                if (!mass && !sys->contains("mass")) mass = 1.0;
                basis_dim = ck.integer(*sys, "basis_dim", "system", true, 4, 128);
                basis_omega = ck.number(*sys, "basis_omega", "system", false, Bound::positive);
                const bool has_omega = sys->contains("omega");
                const bool has_poly = sys->contains("potential");
                if (has_omega == has_poly) {
                    ck.error("system", "give exactly one of \"omega\" (harmonic) or \"potential\" (coefficients)");
                } else if (has_omega) {
                    omega = ck.number(*sys, "omega", "system", true, Bound::positive);
                    if (omega && mass) potential = Polynomial::harmonic(*mass, *omega);
                } else {
                    const json& pc = sys->at("potential");
                    if (!pc.is_array() || pc.empty() || pc.size() > 5) {
                        ck.error("system.potential", "must be an array of 1 to 5 coefficients c0..c4");
                    } else {
                        for (std::size_t k = 0; k < pc.size(); ++k) {
                            if (!pc[k].is_number() || !std::isfinite(pc[k].get<double>())) {
                                ck.error("system.potential." + std::to_string(k), "must be a finite number");
                            } else {
                                potential.coefficients[k] = pc[k].get<double>();
                            }
                        }
                    }
                }
            }
        }
    }

    // Bath
    std::shared_ptr<const EntropyCurve> curve;
    std::optional<double> initial_energy, zeta, gamma0, gamma;
    if (const json* bath = ck.object(doc, "bath", "", true)) {
        ck.allow_only(*bath, "bath", {"entropy_curve", "initial_energy", "zeta", "gamma0", "gamma"});
        curve = parse_curve(ck, *bath, base_dir);
        initial_energy = ck.number(*bath, "initial_energy", "bath", true);
        const int given = static_cast<int>(bath->contains("zeta")) + static_cast<int>(bath->contains("gamma0")) +
                          static_cast<int>(bath->contains("gamma"));
        if (given != 1) {
            ck.error("bath", "give exactly one of \"zeta\", \"gamma0\" (two_level) or \"gamma\" (particle)");
        }
        if (bath->contains("zeta")) {
            if (bath->at("zeta").is_number() && !(bath->at("zeta").get<double>() >= 0.0)) {
                ck.error("bath.zeta", "friction must be >= 0 (the coupling bracket must be positive semidefinite)");
            } else {
                zeta = ck.number(*bath, "zeta", "bath", true);
            }
        }
        if (bath->contains("gamma0")) {
            if (kind && *kind != ModelKind::two_level) ck.error("bath.gamma0", "only valid for the two_level model");
            gamma0 = ck.number(*bath, "gamma0", "bath", true, Bound::non_negative);
        }
        if (bath->contains("gamma")) {
            if (kind && *kind != ModelKind::particle) ck.error("bath.gamma", "only valid for the particle model");
            gamma = ck.number(*bath, "gamma", "bath", true, Bound::non_negative);
        }
    }

    // Integrator
    IntegratorConfig cfg;
    if (const json* in = ck.object(doc, "integrator", "", true)) {
        const std::string p = "integrator";
        ck.allow_only(*in, p, {"method", "dt", "t_end", "rtol", "atol", "p_floor", "projection_tol",
                               "min_step", "max_step"});
        if (const auto m = ck.string(*in, "method", p, false, {"rk4", "rk45"})) {
            cfg.method = *m == "rk4" ? Method::rk4_fixed : Method::rk45_adaptive;
        }
        if (auto v = ck.number(*in, "t_end", p, true, Bound::positive)) cfg.t_end = *v;
        if (auto v = ck.number(*in, "dt", p, false, Bound::positive)) cfg.dt = *v;
        if (auto v = ck.number(*in, "rtol", p, false, Bound::positive)) cfg.rtol = *v;
        if (auto v = ck.number(*in, "atol", p, false, Bound::positive)) cfg.atol = *v;
        if (auto v = ck.number(*in, "p_floor", p, false, Bound::positive)) cfg.p_floor = *v;
        if (auto v = ck.number(*in, "projection_tol", p, false, Bound::positive)) cfg.projection_tol = *v;
        if (auto v = ck.number(*in, "min_step", p, false, Bound::positive)) cfg.min_step = *v;
        if (auto v = ck.number(*in, "max_step", p, false, Bound::positive)) cfg.max_step = *v;
    }

    // Output
    std::vector<std::string> observable_names;
    std::vector<std::pair<std::string, std::string>> correlation_names;
    if (const json* o = ck.object(doc, "output", "", false)) {
        ck.allow_only(*o, "output", {"observables", "correlations", "stride"});
        if (auto s = ck.integer(*o, "stride", "output", false, 1, 1000000000)) {
            cfg.monitor_stride = static_cast<std::size_t>(*s);
        }
        if (o->contains("observables")) {
            const json& list = o->at("observables");
            if (!list.is_array()) {
                ck.error("output.observables", "must be an array of observable names");
            } else {
                for (std::size_t k = 0; k < list.size(); ++k) {
                    if (!list[k].is_string()) {
                        ck.error("output.observables." + std::to_string(k), "must be a string");
                    } else {
                        observable_names.push_back(list[k].get<std::string>());
                    }
                }
            }
        }
        if (o->contains("correlations")) {
            const json& list = o->at("correlations");
            if (!list.is_array()) {
                ck.error("output.correlations", "must be an array of [A, B] name pairs");
            } else {
                for (std::size_t k = 0; k < list.size(); ++k) {
                    const json& pr = list[k];
                    if (!pr.is_array() || pr.size() != 2 || !pr[0].is_string() || !pr[1].is_string()) {
                        ck.error("output.correlations." + std::to_string(k), "must be a pair of observable names");
                    } else {
                        correlation_names.emplace_back(pr[0].get<std::string>(), pr[1].get<std::string>());
                    }
                }
            }
        }
    }

    double agreement_tol = 1e-6;
    if (const json* c = ck.object(doc, "compare", "", false)) {
        ck.allow_only(*c, "compare", {"agreement_tol"});
        if (auto v = ck.number(*c, "agreement_tol", "compare", false, Bound::positive)) agreement_tol = *v;
    }

    // Initial state (shape only; values are checked during assembly)
    const json* init = ck.object(doc, "initial_state", "", true);
    std::optional<std::string> init_type;
    if (init) {
        init_type = ck.string(*init, "type", "initial_state", true,
                              {"gibbs", "diagonal", "matrix_file", "displaced_thermal", "maximally_mixed"});
        if (init_type == "gibbs") ck.allow_only(*init, "initial_state", {"type", "temperature"});
        if (init_type == "diagonal") ck.allow_only(*init, "initial_state", {"type", "populations"});
        if (init_type == "matrix_file") ck.allow_only(*init, "initial_state", {"type", "file"});
        if (init_type == "maximally_mixed") ck.allow_only(*init, "initial_state", {"type"});
        if (init_type == "displaced_thermal") {
            ck.allow_only(*init, "initial_state", {"type", "temperature", "q0", "p0"});
            if (kind && *kind != ModelKind::particle) {
                ck.error("initial_state.type", "\"displaced_thermal\" is only available for the particle model");
            }
        }
    }

    if (!ck.ok() || !kind || !curve || !initial_energy || !init_type) return ck.diags;

    // Assembly: the remaining checks need the constructed objects.
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        ck.error("integrator", e.what());
    }

    auto model = std::make_shared<BathModel>(curve);
    const BathState bath0{*initial_energy};
    double t_bath = 0.0;
    try {
        t_bath = temperature(*model, bath0);
    } catch (const std::exception& e) {
        ck.error("bath.initial_energy", e.what());
    }
    if (!ck.ok()) return ck.diags;

    std::optional<ModelParts> parts;
    try {
        if (*kind == ModelKind::two_level) {
            TwoLevelModel tl = build_two_level(*omega, gamma0.value_or(0.0), t_bath, constants);
            std::vector<CouplingChannel> channels;
            for (const auto& ch : tl.channels) {
                channels.emplace_back(ch.q, zeta ? *zeta : ch.zeta, ch.label);
            }
            const double z = channels.front().zeta;
            // gamma = 8 zeta k_B T / hbar^2 for zeta = hbar gamma0 / (4 omega)
            const double rate = 8.0 * z * constants.k_B * t_bath / (constants.hbar * constants.hbar);
            std::vector<NamedObservable> obs{
                {"H", tl.h.matrix()},
                {"sigma1", pauli::sigma1()},
                {"sigma2", pauli::sigma2()},
                {"sigma3", pauli::sigma3()},
                {"excited", projector(2, 0)},
                {"ground", projector(2, 1)},
            };
            parts = ModelParts{ModelKind::two_level, tl.h, std::move(channels), std::move(obs), std::nullopt,
                               rate > 0.0 ? std::optional<double>(rate) : std::nullopt};
        } else {
            ParticleModel pm = build_particle(*mass, potential, static_cast<Index>(*basis_dim), constants,
                                              basis_omega.value_or(0.0));
            const double z = zeta ? *zeta : caldeira_leggett_zeta(gamma.value_or(0.0), *mass);
            std::vector<CouplingChannel> channels{pm.channel(z)};
            std::vector<NamedObservable> obs{
                {"H", pm.h.matrix()},   {"Q", pm.q.matrix()},   {"P", pm.p.matrix()},
                {"QQ", pm.qq().matrix()}, {"PP", pm.pp().matrix()}, {"PQ_sym", pm.pq_sym().matrix()},
            };
            const double rate = z / (2.0 * *mass);
            parts = ModelParts{ModelKind::particle, pm.h, std::move(channels), std::move(obs), pm,
                               rate > 0.0 ? std::optional<double>(rate) : std::nullopt};
        }
    } catch (const std::exception& e) {
        ck.error("system", e.what());
        return ck.diags;
    }

    const auto find_obs = [&](const std::string& name) -> const NamedObservable* {
        for (const auto& o : parts->observables) {
            if (o.name == name) return &o;
        }
        return nullptr;
    };
    const auto unknown_name = [&](const std::string& field, const std::string& name) {
        std::string list;
        for (const auto& n : available_observables(*kind)) list += (list.empty() ? "" : ", ") + n;
        ck.error(field, "unknown observable \"" + name + "\"; available: " + list);
    };

    std::vector<NamedObservable> tracked;
    if (observable_names.empty() && !(doc.contains("output") && doc["output"].contains("observables"))) {
        tracked = parts->observables;
    }
    std::set<std::string> seen;
    for (std::size_t k = 0; k < observable_names.size(); ++k) {
        const auto* o = find_obs(observable_names[k]);
        if (!o) {
            unknown_name("output.observables." + std::to_string(k), observable_names[k]);
        } else if (!seen.insert(o->name).second) {
            ck.error("output.observables." + std::to_string(k), "duplicate observable \"" + o->name + "\"");
        } else {
            tracked.push_back(*o);
        }
    }
    std::vector<CorrelationPair> correlations;
    for (std::size_t k = 0; k < correlation_names.size(); ++k) {
        const auto* a = find_obs(correlation_names[k].first);
        const auto* b = find_obs(correlation_names[k].second);
        const std::string field = "output.correlations." + std::to_string(k);
        if (!a) unknown_name(field, correlation_names[k].first);
        if (!b) unknown_name(field, correlation_names[k].second);
        if (a && b) correlations.push_back(CorrelationPair{a->name + "_" + b->name, a->op, b->op});
    }

    // Initial state
    std::optional<DensityMatrix> rho0;
    const Index dim = parts->h.dim();
    try {
        if (*init_type == "gibbs") {
            if (auto t = ck.number(*init, "temperature", "initial_state", true, Bound::positive)) {
                rho0 = gibbs_state(parts->h, *t, constants);
            }
        } else if (*init_type == "maximally_mixed") {
            rho0 = DensityMatrix::maximally_mixed(dim);
        } else if (*init_type == "displaced_thermal") {
            const auto t = ck.number(*init, "temperature", "initial_state", true, Bound::positive);
            const auto q0 = ck.number(*init, "q0", "initial_state", false);
            const auto p0 = ck.number(*init, "p0", "initial_state", false);
            if (t) rho0 = displaced_thermal_state(*parts->particle, *t, q0.value_or(0.0), p0.value_or(0.0), constants);
        } else if (*init_type == "diagonal") {
            const json& pops = init->contains("populations") ? init->at("populations") : json();
            if (!pops.is_array() || static_cast<Index>(pops.size()) != dim) {
                ck.error("initial_state.populations", "must be an array of " + std::to_string(dim) + " numbers");
            } else {
                std::vector<double> p;
                for (const auto& x : pops) {
                    if (!x.is_number()) {
                        ck.error("initial_state.populations", "entries must be numbers");
                        break;
                    }
                    p.push_back(x.get<double>());
                }
                if (p.size() == pops.size()) {
                    try {
                        rho0 = DensityMatrix::diagonal(p);
                    } catch (const std::exception& e) {
                        ck.error("initial_state.populations", e.what());
                    }
                }
            }
        } else {
            if (auto file = ck.string(*init, "file", "initial_state", true)) {
                const fs::path resolved = base_dir / *file;
                if (!fs::exists(resolved)) {
                    ck.error("initial_state.file", "referenced file does not exist: " + resolved.string());
                } else if (auto m = read_matrix_file(ck, "initial_state.file", resolved)) {
                    if (m->rows() != dim) {
                        ck.error("initial_state.file", "matrix dimension " + std::to_string(m->rows()) +
                                                           " does not match the system dimension " +
                                                           std::to_string(dim));
                    } else {
                        try {
                            rho0 = DensityMatrix(*m);
                        } catch (const std::exception& e) {
                            ck.error("initial_state.file", e.what());
                        }
                    }
                }
            }
        }
    } catch (const std::exception& e) {
        ck.error("initial_state", e.what());
    }

    if (!ck.ok() || !rho0) {
        if (ck.ok()) ck.error("initial_state", "could not construct the initial state");
        return ck.diags;
    }

    if (out) {
        SpectralOptions options;
        options.p_floor = cfg.p_floor;
        try {
            SystemSpec spec(parts->h, parts->channels, model, constants, options);
            out->emplace(Scenario{id.value_or("scenario"), *kind, std::move(spec), CoupledState{*rho0, bath0}, cfg,
                                  std::move(tracked), std::move(correlations), parts->rate_hint, agreement_tol});
        } catch (const std::exception& e) {
            ck.error("", e.what());
        }
    }
    return ck.diags;
}

Scenario build_scenario(const json& doc, const fs::path& base_dir)
{
    std::optional<Scenario> out;
    auto diags = validate_scenario(doc, base_dir, &out);
    if (!diags.empty()) throw ScenarioInvalid(std::move(diags));
    if (!out) throw ScenarioInvalid({Diagnostic{"", "scenario could not be assembled", 0, 0}});
    return std::move(*out);
}

Scenario load_scenario(const fs::path& path)
{
    json doc = read_json_file(path);
    if (doc.is_object() && !doc.contains("id")) doc["id"] = path.stem().string();
    return build_scenario(doc, path.parent_path());
}

void set_dotted(json& doc, const std::string& path, const json& value)
{
    json* cur = &doc;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = path.find('.', start);
        const std::string seg = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (seg.empty()) throw ScenarioInvalid({Diagnostic{path, "empty path segment", 0, 0}});
        json* next = nullptr;
        if (cur->is_array()) {
            if (!std::all_of(seg.begin(), seg.end(), [](unsigned char ch) { return std::isdigit(ch); })) {
                throw ScenarioInvalid({Diagnostic{path, "segment \"" + seg + "\" must index an array", 0, 0}});
            }
            const std::size_t idx = std::stoul(seg);
            if (idx >= cur->size()) {
                throw ScenarioInvalid({Diagnostic{path, "array index " + seg + " out of range", 0, 0}});
            }
            next = &(*cur)[idx];
        } else if (cur->is_object() || cur->is_null()) {
            next = &(*cur)[seg];
        } else {
            throw ScenarioInvalid({Diagnostic{path, "segment \"" + seg + "\" descends into a scalar", 0, 0}});
        }
        if (dot == std::string::npos) {
            *next = value;
            return;
        }
        cur = next;
        start = dot + 1;
    }
}

} // namespace qdiss
