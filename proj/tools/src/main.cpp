#include <CLI11.hpp>

#include <algorithm>
#include <exception>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmds.hpp"
#include "common.hpp"
#include "wgmm/errors.hpp"

// Exit codes: 0 success, 2 usage error (bad flags, bad config keys, invalid
// parameter combinations), 3 data error (missing/malformed files, schema
// violations), 4 numerical failure.
int main(int argc, char** argv) {
    CLI::App app{"Online Gaussian mixture learning and multi-source domain "
                 "adaptation under Wasserstein geometry"};
    app.set_version_flag("--version", WGMM_VERSION);
    app.require_subcommand(1);

    wgmmcli::register_gen(app);
    wgmmcli::register_fit_stream(app);
    wgmmcli::register_fit_offline(app);
    wgmmcli::register_msda(app);
    wgmmcli::register_eval(app);
    wgmmcli::register_inspect(app);

    try {
        std::vector<std::string> args;
        for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
        args = wgmmcli::merge_config_args(args);
        std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
        app.parse(args);
        return wgmmcli::kExitOk;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return wgmmcli::kExitUsage;
    } catch (const wgmm::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return wgmmcli::kExitData;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return wgmmcli::kExitData;
    } catch (const wgmm::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return wgmmcli::kExitNumeric;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return wgmmcli::kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return wgmmcli::kExitNumeric;
    }
}
