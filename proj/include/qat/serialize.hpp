#pragma once

#include "qat/expansion.hpp"

#include <string>

namespace qat {

// JSON text form: base set, dimension, and per-mode frequency coefficients with
// row-major real/imaginary coefficient arrays. Round-trips exactly (shortest
// round-trip double formatting).
std::string series_to_json(const FourierSeries& series, int indent = -1);
FourierSeries series_from_json(const std::string& text);

std::string expansion_to_json(const QatExpansion& expansion, int indent = -1);
QatExpansion expansion_from_json(const std::string& text);

}  // namespace qat
