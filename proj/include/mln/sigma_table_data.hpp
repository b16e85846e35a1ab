#pragma once

// Built-in sigma calibration table (see tools: calibrate-sigma regenerates
// the shipped data/sigma_table.tsv and this header).

#include "mln/degrees.hpp"

namespace mln {
namespace detail {
// columns: sigma, expected tau
inline constexpr double kSigmaTableData[][2] = {
    {0.0, 1.000000},
    {0.01, 0.977633},
    {0.02, 0.955665},
    {0.03, 0.934097},
    {0.05, 0.892162},
    {0.075, 0.841993},
    {0.1, 0.794324},
    {0.125, 0.749155},
    {0.15, 0.706486},
    {0.2, 0.628645},
    {0.25, 0.560715},
    {0.3, 0.502282},
    {0.35, 0.452472},
    {0.4, 0.410133},
    {0.45, 0.374077},
    {0.5, 0.343226},
    {0.6, 0.293640},
    {0.7, 0.255887},
    {0.8, 0.226382},
    {0.9, 0.202782},
    {1.0, 0.183524},
    {1.2, 0.154064},
    {1.4, 0.132648},
    {1.7, 0.109680},
    {2.0, 0.093449},
    {2.5, 0.074926},
    {3.0, 0.062514},
    {3.5, 0.053623},
    {4.0, 0.046943},
    {5.0, 0.037575},
    {6.0, 0.031322},
    {8.0, 0.023499},
    {10.0, 0.018802},
    {12.0, 0.015669},
    {16.0, 0.011753},
    {20.0, 0.009403},
};
inline constexpr unsigned long long kSigmaTableNCal = 1000000ULL;
}  // namespace detail

inline const SigmaTable& SigmaTable::builtin() {
    static const SigmaTable table = [] {
        std::vector<double> sigma, tau;
        for (const auto& row : detail::kSigmaTableData) {
            sigma.push_back(row[0]);
            tau.push_back(row[1]);
        }
        return SigmaTable(std::move(sigma), std::move(tau),
                          detail::kSigmaTableNCal);
    }();
    return table;
}

}  // namespace mln
