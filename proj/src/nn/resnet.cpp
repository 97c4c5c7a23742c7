#include "orange/nn/networks.hpp"

namespace orange::nn {

namespace {

std::unique_ptr<Sequential> make_stage(std::size_t in, std::size_t out, std::size_t stride) {
    auto stage = std::make_unique<Sequential>();
    stage->emplace<BasicBlock>("0", in, out, stride);
    stage->emplace<BasicBlock>("1", out, out, 1);
    return stage;
}

}  // namespace

std::unique_ptr<Sequential> make_resnet18(std::size_t num_classes) {
    auto net = std::make_unique<Sequential>();
    net->emplace<Conv2d>("conv1", 3, 64, 7, 2, 3, false, ConvInit::KaimingNormalFanOut).set_input_grad(false);
    net->emplace<BatchNorm2d>("bn1", 64);
    net->emplace<ReLU>("relu");
    net->emplace<MaxPool2d>("maxpool", 3, 2, 1, false);
    net->add("layer1", make_stage(64, 64, 1));
    net->add("layer2", make_stage(64, 128, 2));
    net->add("layer3", make_stage(128, 256, 2));
    net->add("layer4", make_stage(256, 512, 2));
    net->emplace<GlobalAvgPool>("avgpool");
    net->emplace<Linear>("fc", 512, num_classes);
    return net;
}

}  // namespace orange::nn
