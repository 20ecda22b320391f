#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qlis/matter.hpp"

namespace qlis {

using nlohmann::json;

namespace {

// Row-major list of [re, im] pairs.
CMatrix matrix_from_pairs(const json& j, int dim, const std::string& what)
{
    if (!j.is_array() || int(j.size()) != dim * dim)
        throw ValidationError("matter file: '" + what + "' must hold dim*dim [re, im] pairs");
    CMatrix m(dim, dim);
    for (int k = 0; k < dim * dim; ++k) {
        const json& p = j[size_t(k)];
        if (!p.is_array() || p.size() != 2)
            throw ValidationError("matter file: '" + what + "' entries must be [re, im] pairs");
        m(k / dim, k % dim) = cplx(p[0].get<double>(), p[1].get<double>());
    }
    return m;
}

CVector vector_from_pairs(const json& j, int dim, const std::string& what)
{
    if (!j.is_array() || int(j.size()) != dim)
        throw ValidationError("matter file: '" + what + "' must hold dim [re, im] pairs");
    CVector v(dim);
    for (int k = 0; k < dim; ++k) {
        const json& p = j[size_t(k)];
        if (!p.is_array() || p.size() != 2)
            throw ValidationError("matter file: '" + what + "' entries must be [re, im] pairs");
        v[k] = cplx(p[0].get<double>(), p[1].get<double>());
    }
    return v;
}

json pairs(const CMatrix& m)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            out.push_back({m(i, j).real(), m(i, j).imag()});
    return out;
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where)
{
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            ok = ok || it.key() == a;
        if (!ok)
            throw ValidationError("matter file: unknown key '" + it.key() + "' in " + where);
    }
}

} // namespace

MatterSystem matter_from_json_text(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("matter file: malformed JSON: ") + e.what());
    }
    try {
        reject_unknown(j, {"schema", "schema_version", "dim", "energies_rad_per_s", "couplings_rad_per_s",
                              "channels", "initial_state", "description"},
            "top level");
        if (j.value("schema", "") != "qlis.matter" || j.value("schema_version", 0) != 1)
            throw ValidationError("matter file: expected schema 'qlis.matter' version 1");
        const int dim = j.at("dim").get<int>();
        if (dim < 1 || dim > 64)
            throw ValidationError("matter file: dim must be between 1 and 64");
        const auto& en = j.at("energies_rad_per_s");
        if (!en.is_array() || int(en.size()) != dim)
            throw ValidationError("matter file: energies_rad_per_s must list dim values");
        CMatrix H = CMatrix::Zero(dim, dim);
        for (int k = 0; k < dim; ++k)
            H(k, k) = en[size_t(k)].get<double>();
        if (j.contains("couplings_rad_per_s")) {
            for (const json& c : j.at("couplings_rad_per_s")) {
                reject_unknown(c, {"i", "j", "re", "im"}, "couplings_rad_per_s entry");
                int a = c.at("i").get<int>(), b = c.at("j").get<int>();
                if (a < 0 || b < 0 || a >= dim || b >= dim || a == b)
                    throw ValidationError("matter file: coupling indices must be distinct levels");
                cplx v(c.at("re").get<double>(), c.value("im", 0.0));
                H(a, b) = v;
                H(b, a) = std::conj(v);
            }
        }
        std::map<std::string, CMatrix> channels;
        for (auto it = j.at("channels").begin(); it != j.at("channels").end(); ++it)
            channels[it.key()] = matrix_from_pairs(it.value(), dim, "channels." + it.key());

        const json& init = j.at("initial_state");
        reject_unknown(init, {"level", "vector", "density_matrix"}, "initial_state");
        if (init.contains("level")) {
            int l = init.at("level").get<int>();
            if (l < 0 || l >= dim)
                throw ValidationError("matter file: initial level out of range");
            CVector v = CVector::Zero(dim);
            v[l] = 1.0;
            return MatterSystem(H, channels, v);
        }
        if (init.contains("vector"))
            return MatterSystem(H, channels, vector_from_pairs(init.at("vector"), dim, "initial_state.vector"));
        if (init.contains("density_matrix"))
            return MatterSystem(H, channels,
                matrix_from_pairs(init.at("density_matrix"), dim, "initial_state.density_matrix"));
        throw ValidationError("matter file: initial_state needs 'level', 'vector' or 'density_matrix'");
    } catch (const json::exception& e) {
        throw ValidationError(std::string("matter file: ") + e.what());
    }
}

MatterSystem load_matter_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("matter file: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return matter_from_json_text(ss.str());
}

std::string matter_to_json_text(const MatterSystem& sys)
{
    const int d = sys.dim();
    json j;
    j["schema"] = "qlis.matter";
    j["schema_version"] = 1;
    j["dim"] = d;
    json en = json::array();
    for (int k = 0; k < d; ++k)
        en.push_back(sys.hamiltonian()(k, k).real());
    j["energies_rad_per_s"] = en;
    json cp = json::array();
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b)
            if (sys.hamiltonian()(a, b) != cplx(0.0))
                cp.push_back({{"i", a}, {"j", b}, {"re", sys.hamiltonian()(a, b).real()},
                    {"im", sys.hamiltonian()(a, b).imag()}});
    j["couplings_rad_per_s"] = cp;
    json ch = json::object();
    for (const auto& name : sys.channel_names())
        ch[name] = pairs(sys.dipole(name));
    j["channels"] = ch;
    j["initial_state"] = {{"density_matrix", pairs(sys.initial_density())}};
    return j.dump(2);
}

} // namespace qlis
