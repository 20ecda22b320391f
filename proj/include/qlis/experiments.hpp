#pragma once

#include <string>
#include <vector>

#include "qlis/config.hpp"
#include "qlis/matter.hpp"
#include "qlis/scan.hpp"
#include "qlis/signal_engine.hpp"

namespace qlis {

struct RunOptions {
    int jobs = 0; // 0: OpenMP default
};

struct ExperimentResult {
    SignalScan scan;
    std::string summary;
    std::vector<std::string> warnings;
    bool passed = true; // algebra-check: all residuals within 1e-10
};

TwoPhotonAmplitude build_state(const ExperimentConfig& cfg);
MatterSystem build_matter(const ExperimentConfig& cfg);
HomConfig build_hom(const ExperimentConfig& cfg);

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {});

// Largest change of any column between a run and its refined() rerun, relative
// to the largest magnitude of that column.
double richardson_change(const ExperimentConfig& cfg, const RunOptions& opt = {});

} // namespace qlis
