#pragma once

#include <CLI11.hpp>

namespace selcal::cli {

// Each register function wires one subcommand onto the app. Commands that
// can fail a check (gradcheck) report through exit_code; hard errors throw.
void register_gen_data(CLI::App& app, int& exit_code);
void register_train(CLI::App& app, int& exit_code);
void register_eval(CLI::App& app, int& exit_code);
void register_calibrate(CLI::App& app, int& exit_code);
void register_gradcheck(CLI::App& app, int& exit_code);
void register_softrank(CLI::App& app, int& exit_code);
void register_weights(CLI::App& app, int& exit_code);

}  // namespace selcal::cli
