// Regenerates data/golden/<env>.txt: a fixed open-loop action sequence and the resulting states.
// Run after changing env_constants.hpp (and bump its kVersion).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "rlsp/continuous_env.hpp"
#include "rlsp/golden.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_golden <output dir>\n";
    return 1;
  }
  for (const auto& name : rlsp::env_names()) {
    const std::string path = std::string(argv[1]) + "/" + name + ".txt";
    std::ofstream out(path);
    if (!out) {
      std::cerr << "cannot write " << path << "\n";
      return 1;
    }
    rlsp::golden::write(out, rlsp::golden::record(rlsp::make_env(name)));
    std::cout << "wrote " << path << "\n";
  }
  return 0;
}
