#pragma once

#include <iosfwd>
#include <string>

#include "mousepose/forest.hpp"

namespace mousepose {

// Versioned, self-describing text format: a header (format version, mode,
// feature family, training parameters), then each tree's reachable nodes in
// preorder with explicit child indices. Floats carry 17 significant digits,
// so parsing reproduces them bit-exactly and save -> load -> save is
// byte-identical.
void saveForest(const Forest& forest, std::ostream& out);
void saveForest(const Forest& forest, const std::string& path);

// Throws std::runtime_error with a description on version mismatch or a
// corrupt file.
Forest loadForest(std::istream& in);
Forest loadForest(const std::string& path);

}  // namespace mousepose
