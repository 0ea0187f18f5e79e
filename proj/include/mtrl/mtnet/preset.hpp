#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mtrl/nn/dense_net.hpp"

namespace mtrl::mtnet {

enum class PresetName { mfqi, mdqn_q, mddpg_actor, mddpg_critic };

PresetName preset_from_string(std::string_view name);
std::string_view to_string(PresetName name);

// Section layouts of a shared-representation network. Every task gets the
// same input-block layout; head width is the task's output arity.
struct ArchitecturePreset {
  PresetName name = PresetName::mfqi;
  std::vector<nn::LayerSpec> input_block;
  std::vector<nn::LayerSpec> shared;
  nn::Activation head_activation = nn::Activation::linear;
  // Critic networks receive the action concatenated to the trunk input.
  bool action_into_trunk = false;
};

// Reference layouts:
//   mfqi          no private input layers, trunk 30 sigmoid -> 30 sigmoid, linear heads
//   mdqn_q        input 80 relu, trunk 80 relu -> 80 sigmoid, linear heads
//   mddpg_actor   input 600 relu, trunk 500 relu, tanh heads
//   mddpg_critic  input 600 relu, trunk 500 sigmoid (+ action input), one linear unit
ArchitecturePreset make_preset(PresetName name);

// Same activations, different widths: `input_width` replaces every input-block
// width, `shared_widths` the trunk widths (must match the trunk depth).
ArchitecturePreset resize_preset(ArchitecturePreset preset, Eigen::Index input_width,
                                 const std::vector<Eigen::Index>& shared_widths);

}  // namespace mtrl::mtnet
