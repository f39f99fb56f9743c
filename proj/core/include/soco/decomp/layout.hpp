#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace soco::decomp {

// A run of `count` equally sized entity feature units of one kind.
struct EntityBlock {
  std::string kind;  // e.g. "landmark", "agent"
  std::size_t width = 2;
  std::size_t count = 0;
  friend bool operator==(const EntityBlock&, const EntityBlock&) = default;
};

// How a cooperative observation splits into self features and entity units,
// and which entity kind seeds the solo views (one view per unit of that kind).
struct ObservationLayout {
  std::size_t self_width = 0;
  std::vector<EntityBlock> blocks;
  std::string view_kind;
  std::size_t solo_view_width = 0;

  std::size_t observation_width() const;
  // G_i: number of solo views produced per observation.
  std::size_t view_count() const;
  // Throws ConfigError if the layout is internally inconsistent.
  void validate() const;

  friend bool operator==(const ObservationLayout&, const ObservationLayout&) = default;
};

// Layout of an N-agent spread observation; views are [self(4), landmark_k(2)].
ObservationLayout spread_layout(std::size_t n_agents);

nlohmann::json layout_to_json(const ObservationLayout& layout);
ObservationLayout layout_from_json(const nlohmann::json& j);

struct EntityFeatures {
  std::string kind;
  std::vector<double> values;
};

struct Decomposition {
  std::vector<double> self;             // o^{i,0}
  std::vector<EntityFeatures> entities;  // o^{i,k}, k = 1..K_i, in layout order
};

Decomposition decompose(std::span<const double> obs, const ObservationLayout& layout);

// Concatenates self and entity parts back into one observation.
std::vector<double> recompose(const Decomposition& parts);

// G_i solo views, each [self, entity_k] for every entity of the view kind.
// Returned as one row-major [G_i, solo_view_width] buffer.
std::vector<double> build_solo_views(std::span<const double> obs,
                                     const ObservationLayout& layout);

}  // namespace soco::decomp
