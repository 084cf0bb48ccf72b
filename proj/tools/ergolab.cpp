#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  using namespace ergolab::cli;
  RunConfig config;
  try {
    config = parse_args(argc, argv);
  } catch (const help_request& h) {
    std::cout << h.what();
    return ExitCode::ok;
  } catch (const usage_error& e) {
    std::cerr << "ergolab: " << e.what() << "\n";
    return ExitCode::usage;
  }
  return run(config);
}
