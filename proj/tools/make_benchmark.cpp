// Writes the synthetic identity benchmark (images, landmarks, protocol).
#include "facesynth/pipeline/synthetic_benchmark.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"Write the synthetic face identification/verification benchmark"};
    std::string out;
    facesynth::pipeline::SyntheticBenchmarkSpec spec;
    app.add_option("--out", out, "output directory")->required();
    app.add_option("--identities", spec.identities)->capture_default_str();
    app.add_option("--seed", spec.seed)->capture_default_str();
    app.add_option("--train-images", spec.train_images)->capture_default_str();
    app.add_option("--landmark-noise", spec.landmark_noise)->capture_default_str();
    CLI11_PARSE(app, argc, argv);
    try {
        const auto protocol = facesynth::pipeline::write_synthetic_benchmark(out, spec);
        std::cout << "templates " << protocol.templates.size() << ", pairs " << protocol.pairs.size()
                  << ", training items " << protocol.train_items.size() << "\n";
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}
