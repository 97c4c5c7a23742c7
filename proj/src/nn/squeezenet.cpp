#include "orange/nn/networks.hpp"

#include <string>

namespace orange::nn {

std::unique_ptr<Sequential> make_squeezenet(SqueezeNetVersion version, std::size_t num_classes) {
    auto features = std::make_unique<Sequential>();
    std::size_t index = 0;
    auto next = [&index] { return std::to_string(index++); };
    auto pool = [&] { features->emplace<MaxPool2d>(next(), 3, 2, 0, true); };
    auto fire = [&](std::size_t in, std::size_t squeeze, std::size_t expand) {
        features->emplace<Fire>(next(), in, squeeze, expand, expand);
    };

    if (version == SqueezeNetVersion::V1_0) {
        features->emplace<Conv2d>(next(), 3, 96, 7, 2, 0, true, ConvInit::KaimingUniformFanIn).set_input_grad(false);
        features->emplace<ReLU>(next());
        pool();
        fire(96, 16, 64);
        fire(128, 16, 64);
        fire(128, 32, 128);
        pool();
        fire(256, 32, 128);
        fire(256, 48, 192);
        fire(384, 48, 192);
        fire(384, 64, 256);
        pool();
        fire(512, 64, 256);
    } else {
        features->emplace<Conv2d>(next(), 3, 64, 3, 2, 0, true, ConvInit::KaimingUniformFanIn).set_input_grad(false);
        features->emplace<ReLU>(next());
        pool();
        fire(64, 16, 64);
        fire(128, 16, 64);
        pool();
        fire(128, 32, 128);
        fire(256, 32, 128);
        pool();
        fire(256, 48, 192);
        fire(384, 48, 192);
        fire(384, 64, 256);
        fire(512, 64, 256);
    }

    auto classifier = std::make_unique<Sequential>();
    classifier->emplace<Dropout>("0", 0.5);
    classifier->emplace<Conv2d>("1", 512, num_classes, 1, 1, 0, true, ConvInit::SmallNormal);
    classifier->emplace<ReLU>("2");
    classifier->emplace<GlobalAvgPool>("3");

    auto net = std::make_unique<Sequential>();
    net->add("features", std::move(features));
    net->add("classifier", std::move(classifier));
    return net;
}

}  // namespace orange::nn
