#include "impfac/config.hpp"

#include <cmath>
#include <fstream>

#include "impfac/gramian.hpp"
#include "impfac/rng.hpp"

namespace impfac {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path, what);
}

const json& need(const json& doc, const std::string& key, const std::string& path) {
    auto it = doc.find(key);
    if (it == doc.end()) fail(path + "." + key, "missing field");
    return *it;
}

double need_number(const json& doc, const std::string& key, const std::string& path) {
    const json& v = need(doc, key, path);
    if (!v.is_number()) fail(path + "." + key, "expected a number");
    return v.get<double>();
}

double opt_number(const json& doc, const std::string& key, double fallback) {
    auto it = doc.find(key);
    return it == doc.end() ? fallback : it->get<double>();
}

std::string need_string(const json& doc, const std::string& key, const std::string& path) {
    const json& v = need(doc, key, path);
    if (!v.is_string()) fail(path + "." + key, "expected a string");
    return v.get<std::string>();
}

Vec parse_vector(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    Vec out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) fail(path + "[" + std::to_string(i) + "]", "expected a number");
        const double x = v[i].get<double>();
        if (!std::isfinite(x)) fail(path + "[" + std::to_string(i) + "]", "non-finite entry");
        out.push_back(x);
    }
    return out;
}

Mat parse_matrix(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of rows");
    std::size_t cols = 0;
    Mat out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        Vec row = parse_vector(v[i], path + "[" + std::to_string(i) + "]");
        if (i == 0) {
            cols = row.size();
            if (cols == 0) fail(path + "[0]", "empty row");
            out = Mat(v.size(), cols);
        } else if (row.size() != cols) {
            fail(path + "[" + std::to_string(i) + "]", "ragged row");
        }
        for (std::size_t j = 0; j < cols; ++j) out(i, j) = row[j];
    }
    return out;
}

json vector_to_json(const Vec& v) {
    json a = json::array();
    for (double x : v) a.push_back(x);
    return a;
}

json matrix_to_json(const Mat& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols; ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

Vec parse_state_spec(const json& spec, const std::string& path, std::size_t N, Rng stream) {
    const std::string kind = need_string(spec, "kind", path);
    if (kind == "zero") return Vec(N, 0.0);
    if (kind == "explicit") {
        Vec v = parse_vector(need(spec, "coords", path), path + ".coords");
        if (v.size() != N) fail(path + ".coords", "length != state dimension");
        return v;
    }
    if (kind == "eigenmode") {
        const auto mode = static_cast<std::size_t>(need_number(spec, "mode", path));
        if (mode < 1 || mode > N) fail(path + ".mode", "mode out of range");
        return unit_vector(N, mode - 1);
    }
    if (kind == "smooth_random") {
        const double decay = need_number(spec, "decay", path);
        if (!(decay > 0.5)) fail(path + ".decay", "decay must exceed 1/2");
        std::uint64_t seed = stream.seed();
        if (auto it = spec.find("seed"); it != spec.end()) seed = it->get<std::uint64_t>();
        return build_target_smooth_random(decay, seed, N);
    }
    fail(path + ".kind", "unknown kind '" + kind + "'");
}

}  // namespace

Nonlinearity make_bounded_nonlinearity(std::size_t dim, double amplitude, double state_gain,
                                       std::size_t forcing_mode, std::size_t sense_mode,
                                       std::size_t output_mode) {
    if (forcing_mode < 1 || forcing_mode > dim || sense_mode < 1 || sense_mode > dim ||
        output_mode < 1 || output_mode > dim)
        throw IndexOutOfRange("bounded nonlinearity: mode index out of range");
    Nonlinearity mu;
    mu.kind = GrowthKind::Bounded;
    mu.bound = std::abs(amplitude) + std::abs(state_gain);
    const std::size_t fi = forcing_mode - 1, si = sense_mode - 1, oi = output_mode - 1;
    mu.eval = [=](double t, const Vec& z) {
        Vec out(z.size(), 0.0);
        out[fi] += amplitude * std::cos(t);
        out[oi] += state_gain * std::tanh(z[si]);
        return out;
    };
    return mu;
}

Nonlinearity make_linear_growth_nonlinearity(double d_coef, double g_bound) {
    Nonlinearity mu;
    mu.kind = GrowthKind::LinearGrowth;
    mu.d_coef = d_coef;
    mu.g_bound = g_bound;
    const double c = d_coef * g_bound;
    mu.eval = [c](double, const Vec& z) { return scale(c, z); };
    return mu;
}

namespace {
RunConfig parse_config_impl(const json& doc);
}

RunConfig parse_config(const json& doc) {
    try {
        return parse_config_impl(doc);
    } catch (const nlohmann::json::exception& e) {
        fail("$", std::string("malformed value: ") + e.what());
    }
}

namespace {
RunConfig parse_config_impl(const json& doc) {
    RunConfig cfg;
    if (!doc.is_object()) fail("$", "config must be a JSON object");
    if (auto it = doc.find("schema"); it != doc.end()) cfg.schema = it->get<int>();
    if (cfg.schema != 1) fail("schema", "unsupported schema version");
    if (auto it = doc.find("seed"); it != doc.end()) cfg.seed = it->get<std::uint64_t>();
    Rng root(cfg.seed);

    // --- system ----------------------------------------------------------
    const json& sys_spec = need(doc, "system", "$");
    const std::string sys_kind = need_string(sys_spec, "kind", "system");

    ImpulseSchedule schedule;
    {
        const json& sched = need(sys_spec, "schedule", "system");
        schedule.horizon = need_number(sched, "horizon", "system.schedule");
        if (auto it = sched.find("impulse_times"); it != sched.end())
            schedule.impulse_times = parse_vector(*it, "system.schedule.impulse_times");
        try {
            schedule.validate();
        } catch (const ConfigError& e) {
            fail("system." + e.field_path, "invalid schedule");
        }
    }

    if (sys_kind == "heat") {
        HeatConfig hc;
        hc.modes = static_cast<std::size_t>(need_number(sys_spec, "modes", "system"));
        hc.schedule = schedule;
        const std::string conv = sys_spec.value("convention", std::string("dirichlet"));
        if (conv == "dirichlet")
            hc.convention = EigenConvention::Dirichlet;
        else if (conv == "literal")
            hc.convention = EigenConvention::Literal;
        else
            fail("system.convention", "expected 'dirichlet' or 'literal'");
        cfg.system = build_heat(hc);
    } else if (sys_kind == "explicit") {
        const std::string backend = need_string(sys_spec, "backend", "system");
        if (backend == "spectral") {
            SpectralSemigroup sg;
            sg.decay_rates = parse_vector(need(sys_spec, "rates", "system"), "system.rates");
            if (sg.decay_rates.empty()) fail("system.rates", "empty rate list");
            cfg.system.semigroup = sg;
        } else if (backend == "dense") {
            DenseSemigroup dg;
            dg.generator = parse_matrix(need(sys_spec, "generator", "system"), "system.generator");
            if (dg.generator.rows != dg.generator.cols) fail("system.generator", "must be square");
            cfg.system.semigroup = dg;
        } else {
            fail("system.backend", "expected 'spectral' or 'dense'");
        }
        cfg.system.control_map =
            parse_matrix(need(sys_spec, "control_map", "system"), "system.control_map");
        if (auto it = sys_spec.find("jumps"); it != sys_spec.end()) {
            for (std::size_t k = 0; k < it->size(); ++k)
                cfg.system.jumps.push_back(parse_matrix((*it)[k], "system.jumps[" + std::to_string(k) + "]"));
        }
        if (auto it = sys_spec.find("impulse_maps"); it != sys_spec.end()) {
            for (std::size_t k = 0; k < it->size(); ++k)
                cfg.system.impulse_maps.push_back(
                    parse_matrix((*it)[k], "system.impulse_maps[" + std::to_string(k) + "]"));
        }
        cfg.system.schedule = schedule;
        cfg.system.initial_state = Vec(cfg.system.dim(), 0.0);
    } else {
        fail("system.kind", "expected 'heat' or 'explicit'");
    }

    if (auto it = sys_spec.find("initial_state"); it != sys_spec.end())
        cfg.system.initial_state = parse_state_spec(*it, "system.initial_state", cfg.system.dim(),
                                                    root.stream(2));
    cfg.system.validate();

    // --- subspace ----------------------------------------------------------
    const std::size_t N = cfg.system.dim();
    if (auto it = doc.find("subspace"); it != doc.end()) {
        if (it->contains("vectors")) {
            const json& vs = (*it)["vectors"];
            std::vector<Vec> spanning;
            for (std::size_t i = 0; i < vs.size(); ++i) {
                Vec v = parse_vector(vs[i], "subspace.vectors[" + std::to_string(i) + "]");
                if (v.size() != N) fail("subspace.vectors[" + std::to_string(i) + "]", "length != N");
                spanning.push_back(std::move(v));
            }
            cfg.subspace =
                spanning.empty() ? ProjectionSubspace::empty(N) : orthonormalize(spanning, 1e-10);
        } else {
            const auto d = static_cast<std::size_t>(need_number(*it, "dim", "subspace"));
            if (d > N) fail("subspace.dim", "dim exceeds state dimension");
            cfg.subspace = build_subspace(d, N);
        }
    } else {
        cfg.subspace = ProjectionSubspace::empty(N);
    }

    // --- target ------------------------------------------------------------
    if (auto it = doc.find("target"); it != doc.end()) {
        const std::string kind = need_string(*it, "kind", "target");
        if (kind == "free_final") {
            cfg.target = matvec(free_final_map(cfg.system), cfg.system.initial_state);
        } else {
            cfg.target = parse_state_spec(*it, "target", N, root.stream(1));
        }
    } else {
        cfg.target = Vec(N, 0.0);
    }

    // --- alphas ------------------------------------------------------------
    if (auto it = doc.find("alphas"); it != doc.end()) {
        cfg.alphas = parse_vector(*it, "alphas");
        for (std::size_t i = 0; i < cfg.alphas.size(); ++i) {
            if (!(cfg.alphas[i] > 0.0)) fail("alphas[" + std::to_string(i) + "]", "must be positive");
            if (i > 0 && !(cfg.alphas[i] < cfg.alphas[i - 1]))
                fail("alphas[" + std::to_string(i) + "]", "must be strictly descending");
        }
    } else {
        cfg.alphas = Vec{1.0, 0.1, 0.01};
    }
    if (cfg.alphas.empty()) fail("alphas", "empty grid");

    // --- quadrature ----------------------------------------------------------
    if (auto it = doc.find("quadrature"); it != doc.end()) {
        cfg.quadrature.order = static_cast<int>(opt_number(*it, "order", 20));
        cfg.quadrature.panels_per_interval = static_cast<int>(opt_number(*it, "panels", 1));
        try {
            cfg.quadrature.validate();
        } catch (const std::exception& e) {
            fail("quadrature", e.what());
        }
    }

    // --- nonlinearity ----------------------------------------------------------
    if (auto it = doc.find("nonlinearity"); it != doc.end()) {
        const std::string kind = need_string(*it, "kind", "nonlinearity");
        if (kind == "zero") {
            cfg.nonlinearity = Nonlinearity::zero();
        } else if (kind == "bounded") {
            cfg.nonlinearity = make_bounded_nonlinearity(
                N, need_number(*it, "amplitude", "nonlinearity"),
                opt_number(*it, "state_gain", 0.0),
                static_cast<std::size_t>(opt_number(*it, "forcing_mode", 1)),
                static_cast<std::size_t>(opt_number(*it, "sense_mode", 1)),
                static_cast<std::size_t>(opt_number(*it, "output_mode", 1)));
        } else if (kind == "linear_growth") {
            cfg.nonlinearity = make_linear_growth_nonlinearity(
                need_number(*it, "d_coef", "nonlinearity"), need_number(*it, "g_bound", "nonlinearity"));
        } else {
            fail("nonlinearity.kind", "unknown kind '" + kind + "'");
        }
    }

    // --- picard ----------------------------------------------------------
    if (auto it = doc.find("picard"); it != doc.end()) {
        cfg.picard.tol = opt_number(*it, "tol", 1e-10);
        cfg.picard.max_iter = static_cast<int>(opt_number(*it, "max_iter", 100));
        cfg.picard.damping = opt_number(*it, "damping", 1.0);
        try {
            cfg.picard.validate();
        } catch (const std::exception& e) {
            fail("picard", e.what());
        }
    }

    if (auto it = doc.find("output"); it != doc.end()) cfg.output_path = it->get<std::string>();

    // --- normalized document (defaults materialized) -------------------------
    json raw;
    raw["schema"] = cfg.schema;
    raw["seed"] = cfg.seed;
    {
        json s;
        s["kind"] = "explicit";
        if (is_spectral(cfg.system.semigroup)) {
            s["backend"] = "spectral";
            s["rates"] = vector_to_json(std::get<SpectralSemigroup>(cfg.system.semigroup).decay_rates);
        } else {
            s["backend"] = "dense";
            s["generator"] = matrix_to_json(std::get<DenseSemigroup>(cfg.system.semigroup).generator);
        }
        s["control_map"] = matrix_to_json(cfg.system.control_map);
        json jumps = json::array(), imaps = json::array();
        for (const Mat& B : cfg.system.jumps) jumps.push_back(matrix_to_json(B));
        for (const Mat& D : cfg.system.impulse_maps) imaps.push_back(matrix_to_json(D));
        s["jumps"] = jumps;
        s["impulse_maps"] = imaps;
        s["schedule"] = {{"horizon", cfg.system.schedule.horizon},
                         {"impulse_times", vector_to_json(cfg.system.schedule.impulse_times)}};
        s["initial_state"] = {{"kind", "explicit"}, {"coords", vector_to_json(cfg.system.initial_state)}};
        raw["system"] = s;
    }
    {
        json vs = json::array();
        for (std::size_t j = 0; j < cfg.subspace.dim(); ++j) {
            Vec col(N);
            for (std::size_t i = 0; i < N; ++i) col[i] = cfg.subspace.basis(i, j);
            vs.push_back(vector_to_json(col));
        }
        raw["subspace"] = {{"vectors", vs}};
    }
    raw["target"] = {{"kind", "explicit"}, {"coords", vector_to_json(cfg.target)}};
    raw["alphas"] = vector_to_json(cfg.alphas);
    raw["quadrature"] = {{"order", cfg.quadrature.order},
                         {"panels", cfg.quadrature.panels_per_interval}};
    if (auto it = doc.find("nonlinearity"); it != doc.end())
        raw["nonlinearity"] = *it;
    else
        raw["nonlinearity"] = {{"kind", "zero"}};
    raw["picard"] = {{"tol", cfg.picard.tol},
                     {"max_iter", cfg.picard.max_iter},
                     {"damping", cfg.picard.damping}};
    if (!cfg.output_path.empty()) raw["output"] = cfg.output_path;
    cfg.raw = std::move(raw);
    return cfg;
}
}  // namespace

RunConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const std::exception& e) {
        fail("$", std::string("JSON parse failure: ") + e.what());
    }
    return parse_config(doc);
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("$", "cannot open config file '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config_text(text);
}

}  // namespace impfac
