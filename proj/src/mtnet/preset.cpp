#include "mtrl/mtnet/preset.hpp"

#include "mtrl/error.hpp"

namespace mtrl::mtnet {

using nn::Activation;

PresetName preset_from_string(std::string_view name) {
  if (name == "mfqi") return PresetName::mfqi;
  if (name == "mdqn_q") return PresetName::mdqn_q;
  if (name == "mddpg_actor") return PresetName::mddpg_actor;
  if (name == "mddpg_critic") return PresetName::mddpg_critic;
  throw ConfigError("unknown architecture preset '" + std::string(name) + "'");
}

std::string_view to_string(PresetName name) {
  switch (name) {
    case PresetName::mfqi: return "mfqi";
    case PresetName::mdqn_q: return "mdqn_q";
    case PresetName::mddpg_actor: return "mddpg_actor";
    case PresetName::mddpg_critic: return "mddpg_critic";
  }
  return "mfqi";
}

ArchitecturePreset make_preset(PresetName name) {
  ArchitecturePreset p;
  p.name = name;
  switch (name) {
    case PresetName::mfqi:
      p.shared = {{30, Activation::sigmoid}, {30, Activation::sigmoid}};
      p.head_activation = Activation::linear;
      break;
    case PresetName::mdqn_q:
      p.input_block = {{80, Activation::relu}};
      p.shared = {{80, Activation::relu}, {80, Activation::sigmoid}};
      p.head_activation = Activation::linear;
      break;
    case PresetName::mddpg_actor:
      p.input_block = {{600, Activation::relu}};
      p.shared = {{500, Activation::relu}};
      p.head_activation = Activation::tanh;
      break;
    case PresetName::mddpg_critic:
      p.input_block = {{600, Activation::relu}};
      p.shared = {{500, Activation::sigmoid}};
      p.head_activation = Activation::linear;
      p.action_into_trunk = true;
      break;
  }
  return p;
}

ArchitecturePreset resize_preset(ArchitecturePreset preset, Eigen::Index input_width,
                                 const std::vector<Eigen::Index>& shared_widths) {
  if (shared_widths.size() != preset.shared.size()) {
    throw ConfigError("preset " + std::string(to_string(preset.name)) + " has " +
                      std::to_string(preset.shared.size()) + " trunk layers, got " +
                      std::to_string(shared_widths.size()) + " widths");
  }
  if (!preset.input_block.empty() && input_width <= 0) throw ConfigError("input block width must be positive");
  for (auto& l : preset.input_block) l.width = input_width;
  for (std::size_t i = 0; i < shared_widths.size(); ++i) {
    if (shared_widths[i] <= 0) throw ConfigError("trunk width must be positive");
    preset.shared[i].width = shared_widths[i];
  }
  return preset;
}

}  // namespace mtrl::mtnet
