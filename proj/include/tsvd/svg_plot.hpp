#pragma once

// Self-contained SVG box plots of per-replication efficiencies, one box per
// (procedure, norm) pair.

#include <string>
#include <vector>

#include "tsvd/mc_harness.hpp"

namespace tsvd {

struct BoxGlyph {
    std::string procedure;
    /// "strong" or "weak"
    std::string norm;
    Quartiles stats;
    /// Tukey whiskers: the most extreme finite data within 1.5 IQR of the box.
    double whisker_low = 0.0;
    double whisker_high = 0.0;
    std::size_t count = 0;
};

/// Glyphs in first-appearance order of the procedures, strong before weak.
std::vector<BoxGlyph> box_glyphs(const std::vector<ReplicationRecord>& records);

/// Each box is a <g class="box"> element carrying data-procedure, data-norm,
/// data-q1, data-median and data-q3 attributes. The metadata string is
/// embedded verbatim (escaped) in a <metadata> element.
std::string render_box_plot(const std::vector<BoxGlyph>& glyphs, const std::string& title,
                            const std::string& metadata = {});

}  // namespace tsvd
