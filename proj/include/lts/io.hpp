#pragma once

#include "lts/types.hpp"

#include <string>

namespace lts {

/// Reads a header-labelled CSV. One column (named by `response`) becomes the
/// response; an optional 0/1 column named "reliable" marks rows exempt from
/// flagging; everything else is a feature. Missing or non-numeric cells are
/// rejected.
Dataset read_csv(const std::string& path, const std::string& response);

/// Writes the dataset with full round-trip precision.
void write_csv(const std::string& path, const Dataset& data,
               const std::string& response_name = "y");

GroundTruth read_truth_json(const std::string& path);
void write_truth_json(const std::string& path, const GroundTruth& truth);

}  // namespace lts
