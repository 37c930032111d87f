#include <exception>
#include <iostream>
#include <stdexcept>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"selective prediction and calibration toolkit"};
  app.require_subcommand(1);

  int exit_code = 0;
  selcal::cli::register_gen_data(app, exit_code);
  selcal::cli::register_train(app, exit_code);
  selcal::cli::register_eval(app, exit_code);
  selcal::cli::register_calibrate(app, exit_code);
  selcal::cli::register_gradcheck(app, exit_code);
  selcal::cli::register_softrank(app, exit_code);
  selcal::cli::register_weights(app, exit_code);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << "run '" << (argc > 0 ? argv[0] : "selcal") << " --help' for usage\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return exit_code;
}
