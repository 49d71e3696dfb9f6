#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clearnet/finmodel.hpp"
#include "clearnet/fpcore.hpp"
#include "clearnet/mcharness.hpp"
#include "clearnet/netgraph.hpp"

namespace clearnet::config {

// One network size to run, with optional degree-window half-widths around the
// expected lender/borrower count (used only for regular graphs).
struct RunSpec {
    std::size_t n = 0;
    std::optional<std::uint32_t> lender_dev;
    std::optional<std::uint32_t> borrower_dev;
};

struct ExperimentConfig {
    std::string kind = "limit";  // limit | mc | sweep | graph-diag
    netgraph::ModelParams model;
    finmodel::FinanceParams finance;

    std::string graph = "er";  // er | regular
    std::vector<RunSpec> runs;
    std::size_t paths = 1;
    std::uint64_t seed = 1;
    std::string sweep_var = "yc";  // yc | dc | kappa | w
    std::vector<double> grid;
    fpcore::FPConfig fp;
    std::string preset_name;

    mcharness::GraphKind graph_kind(const RunSpec& run) const;
};

// Parses the single-document JSON config ({"model": .., "finance": ..,
// "experiment": ..}). Throws std::invalid_argument on malformed input.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);

// Embedded experiment presets (stored as JSON, parsed through the same
// loader). Throws std::invalid_argument for unknown names.
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();
std::string preset_json(const std::string& name);

// "a:b:step" -> ascending grid, inclusive of b up to rounding.
std::vector<double> parse_grid(const std::string& text);

}  // namespace clearnet::config
