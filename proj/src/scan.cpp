#include "qlis/scan.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace qlis {

std::string fnv1a_hex(const std::string& text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

std::string format_double(double x)
{
    if (x == 0.0)
        return "0"; // also folds -0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

size_t SignalScan::n_points() const
{
    size_t n = 1;
    for (const auto& a : axes)
        n *= a.values.size();
    return axes.empty() ? 1 : n;
}

std::vector<double> SignalScan::point(size_t index) const
{
    std::vector<double> p(axes.size());
    for (size_t k = axes.size(); k-- > 0;) {
        const size_t m = axes[k].values.size();
        p[k] = axes[k].values[index % m];
        index /= m;
    }
    return p;
}

void SignalScan::add_column(const std::string& label, std::vector<cplx> values)
{
    if (values.size() != n_points())
        throw ValidationError("SignalScan: column '" + label + "' has the wrong number of points");
    labels.push_back(label);
    columns.push_back(std::move(values));
}

const std::vector<cplx>& SignalScan::column(const std::string& label) const
{
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label)
            return columns[i];
    throw LookupError("SignalScan: no column '" + label + "'");
}

void SignalScan::validate() const
{
    for (const auto& a : axes)
        if (a.values.empty())
            throw ValidationError("SignalScan: axis '" + a.name + "' is empty");
    for (size_t c = 0; c < columns.size(); ++c) {
        if (columns[c].size() != n_points())
            throw ValidationError("SignalScan: column '" + labels[c] + "' has the wrong number of points");
        for (const cplx& v : columns[c])
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw ValidationError("SignalScan: non-finite value in column '" + labels[c] + "'");
    }
}

std::string SignalScan::to_csv() const
{
    validate();
    std::ostringstream os;
    os << "# config_hash=" << config_hash << "\n";
    for (const auto& a : axes)
        os << a.name << ",";
    os << "re,im,contribution\n";
    for (size_t i = 0; i < n_points(); ++i) {
        std::vector<double> p = point(i);
        for (size_t c = 0; c < columns.size(); ++c) {
            for (double x : p)
                os << format_double(x) << ",";
            os << format_double(columns[c][i].real()) << "," << format_double(columns[c][i].imag()) << ","
               << labels[c] << "\n";
        }
    }
    return os.str();
}

std::string SignalScan::to_json() const
{
    validate();
    nlohmann::ordered_json j;
    j["schema"] = "qlis.scan/1";
    j["config_hash"] = config_hash;
    j["config"] = config_json.empty() ? nlohmann::ordered_json::object() : nlohmann::ordered_json::parse(config_json);
    j["axes"] = nlohmann::ordered_json::array();
    for (const auto& a : axes)
        j["axes"].push_back({{"name", a.name}, {"values", a.values}});
    j["contributions"] = nlohmann::ordered_json::array();
    for (size_t c = 0; c < columns.size(); ++c) {
        std::vector<double> re, im;
        for (const cplx& v : columns[c]) {
            re.push_back(v.real());
            im.push_back(v.imag());
        }
        j["contributions"].push_back({{"label", labels[c]}, {"re", re}, {"im", im}});
    }
    return j.dump(2) + "\n";
}

} // namespace qlis
