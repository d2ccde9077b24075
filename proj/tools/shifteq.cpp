#include <iostream>
#include <string>
#include <vector>

#include "shifteq/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  // progress events are a side channel; certificates go to stdout only
  shifteq::progress_sink() = [](const shifteq::json& j) { std::cerr << j.dump() << "\n"; };
  shifteq::cli::ExecResult res = shifteq::cli::execute(args);
  std::cout << res.output;
  return res.exit_code;
}
