#include "qlis/config.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>
#include <toml.hpp>

#include "qlis/scan.hpp"

namespace qlis {

using json = nlohmann::ordered_json;

namespace {

struct Ctx {
    std::string origin;
    std::map<std::string, int> lines;
};

[[noreturn]] void fail(const Ctx& c, const std::string& path, const std::string& msg)
{
    std::ostringstream os;
    os << c.origin;
    auto it = c.lines.find(path);
    if (it != c.lines.end())
        os << ":" << it->second;
    os << ": field '" << path << "': " << msg;
    throw ConfigError(os.str());
}

std::string join(const std::string& base, const std::string& key)
{
    return base.empty() ? key : base + "." + key;
}

class Table {
public:
    Table(const json& j, std::string path, const Ctx& c) : j_(j), path_(std::move(path)), c_(c)
    {
        if (!j.is_object())
            fail(c_, path_, "expected a table");
    }

    bool has(const std::string& k) const { return j_.contains(k); }

    double num(const std::string& k, double def)
    {
        if (!take(k))
            return def;
        const json& v = j_.at(k);
        if (!v.is_number())
            fail(c_, join(path_, k), "expected a number");
        return v.get<double>();
    }
    double req_num(const std::string& k)
    {
        if (!has(k))
            fail(c_, join(path_, k), "required field is missing");
        return num(k, 0.0);
    }
    int integer(const std::string& k, int def)
    {
        if (!take(k))
            return def;
        const json& v = j_.at(k);
        if (!v.is_number_integer())
            fail(c_, join(path_, k), "expected an integer");
        return v.get<int>();
    }
    bool boolean(const std::string& k, bool def)
    {
        if (!take(k))
            return def;
        const json& v = j_.at(k);
        if (!v.is_boolean())
            fail(c_, join(path_, k), "expected true or false");
        return v.get<bool>();
    }
    std::string str(const std::string& k, const std::string& def)
    {
        if (!take(k))
            return def;
        const json& v = j_.at(k);
        if (!v.is_string())
            fail(c_, join(path_, k), "expected a string");
        return v.get<std::string>();
    }
    std::string req_str(const std::string& k)
    {
        if (!has(k))
            fail(c_, join(path_, k), "required field is missing");
        return str(k, "");
    }
    std::vector<std::string> strs(const std::string& k, const std::vector<std::string>& def)
    {
        if (!take(k))
            return def;
        const json& v = j_.at(k);
        std::vector<std::string> out;
        if (!v.is_array())
            fail(c_, join(path_, k), "expected an array of strings");
        for (const auto& e : v) {
            if (!e.is_string())
                fail(c_, join(path_, k), "expected an array of strings");
            out.push_back(e.get<std::string>());
        }
        return out;
    }
    const json* sub(const std::string& k)
    {
        if (!take(k))
            return nullptr;
        return &j_.at(k);
    }
    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key()))
                fail(c_, join(path_, it.key()), "unknown key");
    }
    const std::string& path() const { return path_; }

private:
    bool take(const std::string& k)
    {
        used_.insert(k);
        return j_.contains(k);
    }
    const json& j_;
    std::string path_;
    const Ctx& c_;
    std::set<std::string> used_;
};

void require_positive(const Ctx& c, const std::string& path, double v)
{
    if (!(v > 0.0))
        fail(c, path, "must be positive");
}

void require_one_of(const Ctx& c, const std::string& path, const std::string& v, std::set<std::string> allowed)
{
    if (!allowed.count(v)) {
        std::string list;
        for (const auto& a : allowed)
            list += (list.empty() ? "" : ", ") + a;
        fail(c, path, "'" + v + "' is not one of {" + list + "}");
    }
}

std::set<std::string> allowed_axes(Experiment e, const std::string& gate_mode)
{
    switch (e) {
    case Experiment::hom_scan:
        return {"tau_s", "bs_delay_s", "t_a_s", "t_b_s"};
    case Experiment::spdc_otoc:
        return {"tau_s", "bs_delay_s", "t_a_s"};
    case Experiment::phase_cycle:
        return {"theta_rad"};
    case Experiment::td_gate:
        return gate_mode == "fixed_delay" ? std::set<std::string>{"tau_s"}
                                          : std::set<std::string>{"t_a_bar_s", "t_b_bar_s"};
    case Experiment::tf_map:
        return {"t_s_bar_s", "omega_i_bar_rad_per_s"};
    case Experiment::algebra_check:
        return {};
    }
    return {};
}

ExperimentConfig parse_json_value(json root, const Ctx& c, const std::string& base_dir)
{
    ExperimentConfig cfg;
    Table top(root, "", c);
    int version = top.integer("schema_version", -1);
    if (version != kConfigSchemaVersion)
        fail(c, "schema_version", "expected " + std::to_string(kConfigSchemaVersion));
    std::string exp = top.req_str("experiment");
    try {
        cfg.experiment = parse_experiment(exp);
    } catch (const ConfigError& e) {
        fail(c, "experiment", e.what());
    }
    const bool needs_physics = cfg.experiment != Experiment::algebra_check;

    if (const json* s = top.sub("state")) {
        Table t(*s, "state", c);
        StateSpec& st = cfg.state;
        st.kind = t.req_str("kind");
        require_one_of(c, "state.kind", st.kind, {"gaussian_pair", "delta_pair", "spdc"});
        st.grid_points = t.integer("grid_points", st.grid_points);
        if (st.grid_points < 8 || st.grid_points > 8192)
            fail(c, "state.grid_points", "must lie in [8, 8192]");
        st.grid_center_rad_per_s = t.num("grid_center_rad_per_s", st.grid_center_rad_per_s);
        st.grid_spacing_rad_per_s = t.req_num("grid_spacing_rad_per_s");
        require_positive(c, "state.grid_spacing_rad_per_s", st.grid_spacing_rad_per_s);
        st.center_a_rad_per_s = t.num("center_a_rad_per_s", st.grid_center_rad_per_s);
        st.center_b_rad_per_s = t.num("center_b_rad_per_s", st.grid_center_rad_per_s);
        st.arrival_a_s = t.num("arrival_a_s", 0.0);
        st.arrival_b_s = t.num("arrival_b_s", 0.0);
        st.chirp_a_s2 = t.num("chirp_a_s2", 0.0);
        if (st.kind == "gaussian_pair") {
            st.sigma_rad_per_s = t.req_num("sigma_rad_per_s");
            require_positive(c, "state.sigma_rad_per_s", st.sigma_rad_per_s);
        } else if (st.kind == "delta_pair") {
            st.eps_s = t.req_num("eps_s");
            require_positive(c, "state.eps_s", st.eps_s);
        } else {
            st.sigma_p_rad_per_s = t.req_num("sigma_p_rad_per_s");
            st.entanglement_time_s = t.req_num("entanglement_time_s");
            require_positive(c, "state.sigma_p_rad_per_s", st.sigma_p_rad_per_s);
            require_positive(c, "state.entanglement_time_s", st.entanglement_time_s);
            st.pump_center_rad_per_s =
                t.num("pump_center_rad_per_s", st.center_a_rad_per_s + st.center_b_rad_per_s);
        }
        t.finish();
    } else if (needs_physics) {
        fail(c, "state", "required table is missing");
    }

    if (const json* m = top.sub("matter")) {
        Table t(*m, "matter", c);
        MatterSpec& ms = cfg.matter;
        std::string file = t.str("file", "");
        ms.model = t.str("model", file.empty() ? "v_system" : "");
        if (!file.empty() && !ms.model.empty())
            fail(c, "matter.model", "give either 'file' or 'model', not both");
        if (!file.empty()) {
            std::filesystem::path p(file);
            if (p.is_relative())
                p = std::filesystem::path(base_dir) / p;
            p = std::filesystem::absolute(p).lexically_normal();
            if (!std::filesystem::exists(p))
                fail(c, "matter.file", "file '" + p.string() + "' does not exist");
            ms.file = p.string();
            root["matter"]["file"] = ms.file;
        } else {
            require_one_of(c, "matter.model", ms.model, {"v_system", "two_level"});
        }
        ms.w1_rad_per_s = t.num("w1_rad_per_s", ms.w1_rad_per_s);
        ms.w2_rad_per_s = t.num("w2_rad_per_s", ms.w2_rad_per_s);
        ms.coupling_rad_per_s = t.num("coupling_rad_per_s", ms.coupling_rad_per_s);
        ms.w0_rad_per_s = t.num("w0_rad_per_s", ms.w0_rad_per_s);
        ms.mu_a = t.num("mu_a", ms.mu_a);
        ms.mu_b = t.num("mu_b", ms.mu_b);
        ms.decoupled = t.boolean("decoupled", false);
        t.finish();
    } else if (needs_physics) {
        fail(c, "matter", "required table is missing");
    }

    if (const json* s = top.sub("interaction")) {
        Table t(*s, "interaction", c);
        InteractionSpec& in = cfg.interaction;
        in.lambda = t.num("lambda", in.lambda);
        if (!(in.lambda >= 0.0))
            fail(c, "interaction.lambda", "must be non-negative");
        in.bs_delay_s = t.num("bs_delay_s", 0.0);
        in.wavepacket_delay_s = t.num("wavepacket_delay_s", 0.0);
        in.r_a_s = t.num("r_a_s", 0.0);
        in.r_b_s = t.num("r_b_s", 0.0);
        in.t_a_s = t.num("t_a_s", 0.0);
        in.t_b_s = t.num("t_b_s", 0.0);
        in.beam_splitter = t.boolean("beam_splitter", true);
        in.has_t_star = t.has("t_star_s");
        in.t_star_s = t.num("t_star_s", 0.0);
        in.theta_rad = t.num("theta_rad", 0.0);
        in.contributions = t.strs("contributions", in.contributions);
        for (size_t i = 0; i < in.contributions.size(); ++i)
            require_one_of(c, "interaction.contributions", in.contributions[i], {"otoc_term", "all_fourth_order"});
        if (in.contributions.empty())
            fail(c, "interaction.contributions", "must name at least one contribution");
        in.bs_delay_follows_tau = t.boolean("bs_delay_follows_tau", false);
        in.t_a_follows_tau = t.boolean("t_a_follows_tau", false);
        if (in.r_a_s < 0.0 || in.r_b_s < 0.0)
            fail(c, "interaction.r_a_s", "detector distances must be non-negative");
        t.finish();
    }

    if (const json* s = top.sub("gates")) {
        Table t(*s, "gates", c);
        GateSpec& g = cfg.gates;
        g.mode = t.str("mode", g.mode);
        require_one_of(c, "gates.mode", g.mode, {"window", "fixed_delay"});
        g.width_a_s = t.num("width_a_s", g.width_a_s);
        g.width_b_s = t.num("width_b_s", g.width_b_s);
        g.idler_width_rad_per_s = t.num("idler_width_rad_per_s", g.idler_width_rad_per_s);
        g.tstar_margin_widths = t.num("tstar_margin_widths", g.tstar_margin_widths);
        require_positive(c, "gates.width_a_s", g.width_a_s);
        require_positive(c, "gates.width_b_s", g.width_b_s);
        require_positive(c, "gates.idler_width_rad_per_s", g.idler_width_rad_per_s);
        require_positive(c, "gates.tstar_margin_widths", g.tstar_margin_widths);
        t.finish();
    }

    if (const json* s = top.sub("scan")) {
        if (!s->is_array())
            fail(c, "scan", "expected an array of tables ([[scan]])");
        const std::set<std::string> allowed = allowed_axes(cfg.experiment, cfg.gates.mode);
        std::set<std::string> seen;
        for (size_t i = 0; i < s->size(); ++i) {
            std::string path = "scan[" + std::to_string(i) + "]";
            Table t((*s)[i], path, c);
            AxisSpec a;
            a.name = t.req_str("name");
            require_one_of(c, path + ".name", a.name, allowed);
            if (!seen.insert(a.name).second)
                fail(c, path + ".name", "axis '" + a.name + "' appears twice");
            a.min = t.req_num("min");
            a.max = t.req_num("max");
            a.points = t.integer("points", 1);
            if (a.points < 1 || a.points > 100000)
                fail(c, path + ".points", "must lie in [1, 100000]");
            if (a.points > 1 && !(a.max > a.min))
                fail(c, path + ".max", "must exceed min when points > 1");
            t.finish();
            cfg.scan.push_back(a);
        }
    }
    if (needs_physics && cfg.scan.empty())
        fail(c, "scan", "scan experiments need at least one axis");
    if (cfg.experiment == Experiment::tf_map && cfg.scan.size() != 2)
        fail(c, "scan", "tf-map needs the axes t_s_bar_s and omega_i_bar_rad_per_s");
    if (cfg.experiment == Experiment::spdc_otoc && cfg.state.kind != "spdc")
        fail(c, "state.kind", "spdc-otoc needs an spdc state");

    if (const json* s = top.sub("algebra")) {
        Table t(*s, "algebra", c);
        cfg.algebra_n_max = t.integer("n_max", cfg.algebra_n_max);
        if (cfg.algebra_n_max < 1 || cfg.algebra_n_max > 12)
            fail(c, "algebra.n_max", "must lie in [1, 12]");
        t.finish();
    }
    if (const json* s = top.sub("narrowband")) {
        Table t(*s, "narrowband", c);
        cfg.narrowband_dt_s = t.num("dt_s", cfg.narrowband_dt_s);
        require_positive(c, "narrowband.dt_s", cfg.narrowband_dt_s);
        t.finish();
    }
    if (const json* s = top.sub("output")) {
        Table t(*s, "output", c);
        cfg.output_path = t.str("path", "");
        cfg.output_format = t.str("format", "csv");
        require_one_of(c, "output.format", cfg.output_format, {"csv", "json"});
        t.finish();
    }
    top.finish();
    cfg.canonical_json = root.dump();
    return cfg;
}

json toml_to_json(const toml::node& n, const std::string& path, Ctx& c)
{
    c.lines[path] = int(n.source().begin.line);
    if (const auto* t = n.as_table()) {
        json o = json::object();
        for (const auto& [k, v] : *t)
            o[std::string(k.str())] = toml_to_json(v, join(path, std::string(k.str())), c);
        return o;
    }
    if (const auto* a = n.as_array()) {
        json o = json::array();
        for (size_t i = 0; i < a->size(); ++i)
            o.push_back(toml_to_json(*a->get(i), path + "[" + std::to_string(i) + "]", c));
        return o;
    }
    if (auto v = n.value<int64_t>(); v && n.is_integer())
        return *v;
    if (auto v = n.value<double>(); v && n.is_floating_point())
        return *v;
    if (auto v = n.value<bool>())
        return *v;
    if (auto v = n.value<std::string>())
        return *v;
    fail(c, path, "unsupported TOML value type (dates and times are not used)");
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError(path + ": cannot open config file");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

Experiment parse_experiment(const std::string& name)
{
    static const std::map<std::string, Experiment> names{{"hom-scan", Experiment::hom_scan},
        {"spdc-otoc", Experiment::spdc_otoc}, {"phase-cycle", Experiment::phase_cycle},
        {"td-gate", Experiment::td_gate}, {"tf-map", Experiment::tf_map},
        {"algebra-check", Experiment::algebra_check}};
    auto it = names.find(name);
    if (it == names.end())
        throw ConfigError("unknown experiment '" + name + "'");
    return it->second;
}

std::string experiment_name(Experiment e)
{
    switch (e) {
    case Experiment::hom_scan:
        return "hom-scan";
    case Experiment::spdc_otoc:
        return "spdc-otoc";
    case Experiment::phase_cycle:
        return "phase-cycle";
    case Experiment::td_gate:
        return "td-gate";
    case Experiment::tf_map:
        return "tf-map";
    case Experiment::algebra_check:
        return "algebra-check";
    }
    return "";
}

std::vector<double> AxisSpec::values() const
{
    std::vector<double> v(static_cast<size_t>(points));
    for (int i = 0; i < points; ++i)
        v[size_t(i)] = points == 1 ? min : min + (max - min) * i / (points - 1);
    return v;
}

std::string ExperimentConfig::hash() const
{
    return fnv1a_hex(canonical_json);
}

ExperimentConfig parse_config_json(const std::string& text, const std::string& origin, const std::string& base_dir)
{
    Ctx c{origin, {}};
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": invalid JSON: " + e.what());
    }
    return parse_json_value(std::move(root), c, base_dir);
}

ExperimentConfig parse_config_toml(const std::string& text, const std::string& origin, const std::string& base_dir)
{
    Ctx c{origin, {}};
    toml::table tbl;
    try {
        tbl = toml::parse(text, origin);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << origin << ":" << e.source().begin.line << ": " << e.description();
        throw ConfigError(os.str());
    }
    json root = toml_to_json(tbl, "", c);
    return parse_json_value(std::move(root), c, base_dir);
}

ExperimentConfig load_config(const std::string& path)
{
    std::string text = read_file(path);
    std::string base = std::filesystem::absolute(std::filesystem::path(path)).parent_path().string();
    if (std::filesystem::path(path).extension() == ".toml")
        return parse_config_toml(text, path, base);
    return parse_config_json(text, path, base);
}

ExperimentConfig refined(const ExperimentConfig& cfg)
{
    json root = json::parse(cfg.canonical_json);
    if (root.contains("state"))
        root["state"]["grid_points"] = 2 * cfg.state.grid_points;
    root["narrowband"]["dt_s"] = 0.5 * cfg.narrowband_dt_s;
    Ctx c{"<refined>", {}};
    return parse_json_value(std::move(root), c, ".");
}

} // namespace qlis
