#pragma once

// nlohmann::json conversions for configuration and metadata types. Readers
// accept partial objects: missing keys keep the type's default.

#include <json.hpp>

#include "cirsense/dataset.hpp"
#include "cirsense/dsp.hpp"
#include "cirsense/sim.hpp"
#include "cirsense/sweep.hpp"

namespace cirsense {

using json = nlohmann::json;

void to_json(json& j, const Point& p);
void from_json(const json& j, Point& p);
void to_json(json& j, const SweepConfig& c);
void from_json(const json& j, SweepConfig& c);
void to_json(json& j, const ClutterPoint& c);
void from_json(const json& j, ClutterPoint& c);
void to_json(json& j, const Target& t);
void from_json(const json& j, Target& t);
void to_json(json& j, const Scene& s);
void from_json(const json& j, Scene& s);
void to_json(json& j, const LabLayout& l);
void from_json(const json& j, LabLayout& l);
void to_json(json& j, const GridSpec& g);
void from_json(const json& j, GridSpec& g);
void to_json(json& j, const FeatureOptions& f);
void from_json(const json& j, FeatureOptions& f);
void to_json(json& j, const FeatureLayout& f);
void from_json(const json& j, FeatureLayout& f);
void to_json(json& j, const SplitSpec& s);
void from_json(const json& j, SplitSpec& s);
void to_json(json& j, const DatasetInfo& d);
void from_json(const json& j, DatasetInfo& d);

}  // namespace cirsense
