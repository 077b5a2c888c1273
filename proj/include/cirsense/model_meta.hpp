#pragma once

#include <string>
#include <vector>

#include "cirsense/dsp.hpp"

namespace cirsense {

/// What a checkpoint needs to be applied to new data: the feature encoding
/// and the receivers (in order) whose links the model consumes.
struct ModelMeta {
  FeatureOptions features;
  std::vector<int> receiver_ids;
  std::string config_snapshot;

  friend bool operator==(const ModelMeta&, const ModelMeta&) = default;
};

}  // namespace cirsense
