#pragma once

#include "segfuse/types.hpp"

namespace segfuse {

/// Hard pseudo label per pixel: argmax over classes, ties to the smallest index.
LabelMap unify(const ProbMap& prob);

/// One-hot probability form of a label map with no unlabeled pixels.
ProbMap one_hot(const LabelMap& labels);

}  // namespace segfuse
