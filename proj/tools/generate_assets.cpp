// Regenerates the bundled shape set and blendshape basis under a data directory.
#include "facesynth/error.hpp"
#include "facesynth/synth/assets.hpp"
#include "facesynth/synth/generic_head.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"Write the procedural shape set and blendshape basis"};
    std::string out = FACESYNTH_DATA_DIR;
    app.add_option("--out", out, "data directory")->capture_default_str();
    CLI11_PARSE(app, argc, argv);
    try {
        namespace fs = std::filesystem;
        const auto shapes = facesynth::synth::make_shape_set();
        fs::create_directories(fs::path(out) / "shapes");
        fs::create_directories(fs::path(out) / "blendshapes");
        facesynth::synth::save_shape_set((fs::path(out) / "shapes").string(), shapes);
        facesynth::synth::save_blendshape_basis((fs::path(out) / "blendshapes").string(),
                                                facesynth::synth::make_blendshape_basis(shapes.at(0)));
        std::cout << "wrote " << out << "\n";
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}
