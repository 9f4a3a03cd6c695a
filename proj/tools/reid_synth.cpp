// reid-synth: write synthetic person crops and parser masks for demos and tests.

#include <CLI11.hpp>

#include <cstdio>

#include "reid/error.hpp"
#include "reid/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate synthetic person crops with LIP-palette parser masks"};
  app.require_subcommand(1);

  auto* corpus = app.add_subcommand("corpus", "Flat image/mask directories for `reid index`");
  std::string images, masks;
  std::size_t count = 100, views = 4;
  std::uint64_t seed = 1;
  corpus->add_option("--images", images, "Output image directory")->required();
  corpus->add_option("--masks", masks, "Output mask directory")->required();
  corpus->add_option("-n,--count", count, "Number of crops")->capture_default_str();
  corpus->add_option("--views", views, "Crops per identity")->check(CLI::PositiveNumber)->capture_default_str();
  corpus->add_option("--seed", seed)->capture_default_str();

  auto* market = app.add_subcommand("market", "Market1501-style layout for `reid evaluate`");
  std::string root;
  std::size_t identities = 50, gallery_views = 4, distractors = 50;
  market->add_option("--root", root, "Dataset root")->required();
  market->add_option("--masks", masks, "Mask root")->required();
  market->add_option("--identities", identities)->capture_default_str();
  market->add_option("--gallery-views", gallery_views)->capture_default_str();
  market->add_option("--distractors", distractors)->capture_default_str();
  market->add_option("--seed", seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  try {
    if (*corpus) reid::synth::write_corpus(images, masks, count, views, seed);
    if (*market) reid::synth::write_market_dataset(root, masks, identities, gallery_views, distractors, seed);
  } catch (const reid::Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", std::string(reid::error_code_name(e.code())).c_str(), e.what());
    return 2;
  }
  return 0;
}
