#include "soco/decomp/layout.hpp"

#include <set>

#include "soco/error.hpp"

namespace soco::decomp {

std::size_t ObservationLayout::observation_width() const {
  std::size_t w = self_width;
  for (const auto& b : blocks) w += b.width * b.count;
  return w;
}

std::size_t ObservationLayout::view_count() const {
  std::size_t g = 0;
  for (const auto& b : blocks) {
    if (b.kind == view_kind) g += b.count;
  }
  return g;
}

void ObservationLayout::validate() const {
  if (self_width == 0) throw ConfigError("layout: self_width must be positive");
  std::size_t view_entity_width = 0;
  for (const auto& b : blocks) {
    if (b.width == 0 || b.kind.empty()) {
      throw ConfigError("layout: entity blocks need a kind and a positive width");
    }
    if (b.kind == view_kind) {
      if (view_entity_width != 0 && view_entity_width != b.width) {
        throw ConfigError("layout: view entities must share one width");
      }
      view_entity_width = b.width;
    }
  }
  if (view_count() == 0) {
    throw ConfigError("layout: no entity of view kind '" + view_kind + "'");
  }
  if (self_width + view_entity_width != solo_view_width) {
    throw ConfigError("layout: solo_view_width must equal self width plus one view entity");
  }
}

ObservationLayout spread_layout(std::size_t n_agents) {
  ObservationLayout layout;
  layout.self_width = 4;
  layout.blocks.push_back({"landmark", 2, n_agents});
  if (n_agents > 1) layout.blocks.push_back({"agent", 2, n_agents - 1});
  layout.view_kind = "landmark";
  layout.solo_view_width = 6;
  return layout;
}

nlohmann::json layout_to_json(const ObservationLayout& layout) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : layout.blocks) {
    blocks.push_back({{"kind", b.kind}, {"width", b.width}, {"count", b.count}});
  }
  return {{"self_width", layout.self_width},
          {"blocks", blocks},
          {"view_kind", layout.view_kind},
          {"solo_view_width", layout.solo_view_width}};
}

ObservationLayout layout_from_json(const nlohmann::json& j) {
  static const std::set<std::string> kKeys = {"self_width", "blocks", "view_kind",
                                              "solo_view_width"};
  static const std::set<std::string> kBlockKeys = {"kind", "width", "count"};
  try {
    for (const auto& [key, _] : j.items()) {
      if (!kKeys.contains(key)) throw ConfigError("layout: unknown key '" + key + "'");
    }
    ObservationLayout layout;
    layout.self_width = j.at("self_width").get<std::size_t>();
    for (const auto& b : j.at("blocks")) {
      for (const auto& [key, _] : b.items()) {
        if (!kBlockKeys.contains(key)) {
          throw ConfigError("layout block: unknown key '" + key + "'");
        }
      }
      layout.blocks.push_back({b.at("kind").get<std::string>(),
                               b.at("width").get<std::size_t>(),
                               b.at("count").get<std::size_t>()});
    }
    layout.view_kind = j.at("view_kind").get<std::string>();
    layout.solo_view_width = j.at("solo_view_width").get<std::size_t>();
    layout.validate();
    return layout;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("layout: ") + e.what());
  }
}

namespace {

void require_width(std::span<const double> obs, const ObservationLayout& layout) {
  if (obs.size() != layout.observation_width()) {
    throw ShapeError("observation width " + std::to_string(obs.size()) +
                     " does not match layout width " +
                     std::to_string(layout.observation_width()));
  }
}

}  // namespace

Decomposition decompose(std::span<const double> obs, const ObservationLayout& layout) {
  require_width(obs, layout);
  Decomposition parts;
  parts.self.assign(obs.begin(), obs.begin() + static_cast<std::ptrdiff_t>(layout.self_width));
  std::size_t offset = layout.self_width;
  for (const auto& b : layout.blocks) {
    for (std::size_t k = 0; k < b.count; ++k) {
      auto unit = obs.subspan(offset, b.width);
      parts.entities.push_back({b.kind, {unit.begin(), unit.end()}});
      offset += b.width;
    }
  }
  return parts;
}

std::vector<double> recompose(const Decomposition& parts) {
  std::vector<double> obs(parts.self);
  for (const auto& e : parts.entities) obs.insert(obs.end(), e.values.begin(), e.values.end());
  return obs;
}

std::vector<double> build_solo_views(std::span<const double> obs,
                                     const ObservationLayout& layout) {
  require_width(obs, layout);
  std::vector<double> views;
  views.reserve(layout.view_count() * layout.solo_view_width);
  const auto self = obs.first(layout.self_width);
  std::size_t offset = layout.self_width;
  for (const auto& b : layout.blocks) {
    for (std::size_t k = 0; k < b.count; ++k) {
      if (b.kind == layout.view_kind) {
        views.insert(views.end(), self.begin(), self.end());
        auto unit = obs.subspan(offset, b.width);
        views.insert(views.end(), unit.begin(), unit.end());
      }
      offset += b.width;
    }
  }
  return views;
}

}  // namespace soco::decomp
