#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "zopn/output.hpp"
#include "zopn/problems.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write a synthetic binary classification dataset in LIBSVM format"};
  long samples = 200;
  long features = 20;
  double density = 0.5;
  double noise = 0.05;
  std::uint64_t seed = 0;
  std::string out;
  app.add_option("--samples", samples)->check(CLI::PositiveNumber);
  app.add_option("--features", features)->check(CLI::PositiveNumber);
  app.add_option("--density", density)->check(CLI::Range(1e-6, 1.0));
  app.add_option("--label-noise", noise)->check(CLI::Range(0.0, 0.5));
  app.add_option("--seed", seed);
  app.add_option("--out", out)->required();
  CLI11_PARSE(app, argc, argv);

  try {
    const zopn::Dataset data = zopn::make_synthetic_classification(samples, features, density, seed, noise);
    zopn::write_text_file(out, zopn::serialize_libsvm(data));
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}
