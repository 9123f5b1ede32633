#pragma once

#include "sdeconv/benchmark.hpp"
#include "sdeconv/image.hpp"

namespace sdeconv {

// PSNR-vs-lambda curves, one polyline per config, lambda on a log axis.
// Throws std::invalid_argument when the summary holds no finite values.
Image plot_series(const SweepSummary& summary, int width = 900, int height = 600);

// Per-config min/median/max of the best-over-lambda PSNR, drawn as a
// vertical whisker with horizontal ticks (median highlighted).
Image plot_summary_bars(const SweepSummary& summary, int width = 900, int height = 600);

} // namespace sdeconv
