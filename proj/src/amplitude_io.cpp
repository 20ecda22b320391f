#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "qlis/photon_states.hpp"

namespace qlis {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json grid_json(const FrequencyGrid& g)
{
    return json{{"n_points", g.n_points}, {"omega_min_rad_per_s", g.omega_min}, {"omega_max_rad_per_s", g.omega_max}};
}

FrequencyGrid grid_from_json(const json& j)
{
    return FrequencyGrid::make(j.at("n_points").get<int>(), j.at("omega_min_rad_per_s").get<double>(),
        j.at("omega_max_rad_per_s").get<double>());
}

} // namespace

void write_amplitude(const TwoPhotonAmplitude& phi, const std::string& base_path, PayloadFormat fmt)
{
    fs::path base(base_path);
    fs::path header = base;
    header += ".json";
    fs::path payload = base;
    payload += fmt == PayloadFormat::binary ? ".bin" : ".csv";

    json h;
    h["schema"] = "qlis.amplitude";
    h["schema_version"] = 1;
    h["kind"] = "two_photon";
    h["grid_a"] = grid_json(phi.grid_a());
    h["grid_b"] = grid_json(phi.grid_b());
    h["layout"] = "row-major Phi[i_a][i_b], entry (re, im)";
    h["encoding"] = fmt == PayloadFormat::binary ? "f64le" : "csv";
    h["payload"] = payload.filename().string();

    const CMatrix& v = phi.values();
    if (fmt == PayloadFormat::binary) {
        std::ofstream out(payload, std::ios::binary);
        if (!out)
            throw ValidationError("write_amplitude: cannot open " + payload.string());
        for (Eigen::Index i = 0; i < v.rows(); ++i)
            for (Eigen::Index j = 0; j < v.cols(); ++j) {
                double re = v(i, j).real(), im = v(i, j).imag();
                out.write(reinterpret_cast<const char*>(&re), sizeof re);
                out.write(reinterpret_cast<const char*>(&im), sizeof im);
            }
    } else {
        std::ofstream out(payload);
        if (!out)
            throw ValidationError("write_amplitude: cannot open " + payload.string());
        out << std::setprecision(17);
        for (Eigen::Index i = 0; i < v.rows(); ++i)
            for (Eigen::Index j = 0; j < v.cols(); ++j)
                out << v(i, j).real() << ',' << v(i, j).imag() << '\n';
    }
    std::ofstream out(header);
    if (!out)
        throw ValidationError("write_amplitude: cannot open " + header.string());
    out << h.dump(2) << '\n';
}

TwoPhotonAmplitude read_amplitude(const std::string& header_path)
{
    std::ifstream in(header_path);
    if (!in)
        throw ValidationError("read_amplitude: cannot open " + header_path);
    json h;
    try {
        in >> h;
    } catch (const json::exception& e) {
        throw ValidationError("read_amplitude: malformed header: " + std::string(e.what()));
    }
    if (h.value("schema", "") != "qlis.amplitude" || h.value("schema_version", 0) != 1)
        throw ValidationError("read_amplitude: unsupported schema in " + header_path);
    FrequencyGrid ga = grid_from_json(h.at("grid_a"));
    FrequencyGrid gb = grid_from_json(h.at("grid_b"));
    fs::path payload = fs::path(header_path).parent_path() / h.at("payload").get<std::string>();
    std::string enc = h.at("encoding").get<std::string>();

    CMatrix v(ga.n_points, gb.n_points);
    if (enc == "f64le") {
        std::ifstream p(payload, std::ios::binary);
        if (!p)
            throw ValidationError("read_amplitude: cannot open payload " + payload.string());
        for (Eigen::Index i = 0; i < v.rows(); ++i)
            for (Eigen::Index j = 0; j < v.cols(); ++j) {
                double re = 0, im = 0;
                p.read(reinterpret_cast<char*>(&re), sizeof re);
                p.read(reinterpret_cast<char*>(&im), sizeof im);
                if (!p)
                    throw ValidationError("read_amplitude: payload shorter than header declares");
                v(i, j) = cplx(re, im);
            }
    } else if (enc == "csv") {
        std::ifstream p(payload);
        if (!p)
            throw ValidationError("read_amplitude: cannot open payload " + payload.string());
        std::string line;
        for (Eigen::Index i = 0; i < v.rows(); ++i)
            for (Eigen::Index j = 0; j < v.cols(); ++j) {
                if (!std::getline(p, line))
                    throw ValidationError("read_amplitude: payload shorter than header declares");
                std::istringstream ls(line);
                double re = 0, im = 0;
                char comma = 0;
                ls >> re >> comma >> im;
                if (!ls || comma != ',')
                    throw ValidationError("read_amplitude: bad csv row: " + line);
                v(i, j) = cplx(re, im);
            }
    } else {
        throw ValidationError("read_amplitude: unknown encoding " + enc);
    }
    return TwoPhotonAmplitude(ga, gb, v);
}

} // namespace qlis
