#pragma once

// JSON form of an identified model. Real numbers are written as decimal
// strings with 17 significant digits so that a round trip is exact; the
// training dataset is embedded so that loading rebuilds the evaluation
// context.

#include <filesystem>
#include <string>

#include "fdid/identify.hpp"

namespace fdid {

std::string model_to_json(const Model& m, int indent = 2);
// Throws Parse on malformed documents.
Model model_from_json(const std::string& text);

void save_model(const Model& m, const std::filesystem::path& path);
// Throws NotFound when the file is missing.
Model load_model(const std::filesystem::path& path);

// "{:.17g}" formatting and its inverse ("inf", "-inf" and "nan" included).
std::string exact_string(double v);
double parse_exact(const std::string& s);

}  // namespace fdid
