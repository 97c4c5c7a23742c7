#pragma once

#include <cstddef>
#include <memory>

#include "orange/nn/layers.hpp"

namespace orange::nn {

// Parameter names follow the torchvision module paths (conv1.weight,
// layer2.0.downsample.1.running_var, features.3.squeeze.weight, ...) so a
// converted torchvision state dict maps one-to-one onto these networks.

// ResNet-18: 7x7/2 stem, 3x3/2 max pool, four stages of two basic blocks
// (64/128/256/512 channels, stride 2 entering stages 2-4), global average
// pool, linear head "fc".
std::unique_ptr<Sequential> make_resnet18(std::size_t num_classes);

enum class SqueezeNetVersion { V1_0, V1_1 };

// SqueezeNet: stem conv, eight fire modules interleaved with 3x3/2 ceil-mode
// max pools, then dropout(0.5), 1x1 conv head "classifier.1", ReLU, global
// average pool.
std::unique_ptr<Sequential> make_squeezenet(SqueezeNetVersion version, std::size_t num_classes);

}  // namespace orange::nn
