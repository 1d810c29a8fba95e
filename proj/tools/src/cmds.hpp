#pragma once

namespace CLI {
class App;
}

namespace wgmmcli {

void register_gen(CLI::App& app);
void register_fit_stream(CLI::App& app);
void register_fit_offline(CLI::App& app);
void register_msda(CLI::App& app);
void register_eval(CLI::App& app);
void register_inspect(CLI::App& app);

}  // namespace wgmmcli
