#pragma once

#include <string>
#include <vector>

#include "qlis/types.hpp"

namespace qlis {

struct ScanAxis {
    std::string name; // carries its unit suffix, e.g. "tau_s"
    std::vector<double> values;
};

// Values on the outer product of the axes, last axis fastest. One column per
// contribution label.
struct SignalScan {
    std::vector<ScanAxis> axes;
    std::vector<std::string> labels;
    std::vector<std::vector<cplx>> columns;
    std::string config_json; // canonical config echo
    std::string config_hash;

    size_t n_points() const;
    std::vector<double> point(size_t index) const;
    void add_column(const std::string& label, std::vector<cplx> values);
    const std::vector<cplx>& column(const std::string& label) const;
    void validate() const;

    // One row per (point, contribution): axis values, re, im, label.
    std::string to_csv() const;
    std::string to_json() const;
};

// 64-bit FNV-1a of the text, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

std::string format_double(double x);

} // namespace qlis
