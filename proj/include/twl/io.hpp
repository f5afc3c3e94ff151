#pragma once

#include "twl/corona.hpp"
#include "twl/stopping_form.hpp"

#include <json.hpp>

#include <filesystem>

namespace twl {

using json = nlohmann::ordered_json;

json to_json(const GridSpec& g);
GridSpec grid_from_json(const json& j);

json to_json(const Cube& q);
Cube cube_from_json(const json& j);

// {"n":1,"atoms":[{"x":[..],"w":..}, ...]}
json to_json(const AtomicMeasure& mu);
AtomicMeasure measure_from_json(const json& j);

// [{"level":k,"index":[..],"a":[bits],"coef":v}, ...]
json to_json(const CoefficientMap& c, int n);

json to_json(const PairCollection& p);
PairCollection pairs_from_json(const json& j);

// nested tree with per-node cube, alpha, corona size and checks
json stopping_tree_json(const GridSpec& g, const AtomicMeasure& sigma, const Eigen::VectorXd& f,
                        const StoppingData& s);

json read_json(const std::filesystem::path& p);
void write_text(const std::filesystem::path& p, const std::string& text);

}  // namespace twl
