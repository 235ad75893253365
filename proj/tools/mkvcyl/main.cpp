#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mkvcyl/errors.hpp"
#include "mkvcyl/parallel.hpp"
#include "mkvcyl_cli/config.hpp"
#include "mkvcyl_cli/run.hpp"

int main(int argc, char** argv)
{
    using namespace mkvcyl;

    CLI::App app{"McKean-Vlasov equations driven by weighted cylindrical fBm"};
    std::string command, config_path, out_dir;
    unsigned threads = 0;
    app.add_option("command", command, "simulate | fixpoint | girsanov-check | metric | fbm-test")
        ->required()
        ->check(CLI::IsMember(cli::command_names()));
    app.add_option("--config", config_path, "YAML run configuration")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (overrides output.dir)");
    app.add_option("--threads", threads, "worker threads, 0 = all cores");
    CLI11_PARSE(app, argc, argv);

    set_threads(threads);

    cli::RunManifest man;
    try {
        auto cfg = cli::load_config(config_path);
        if (!cfg.command.name.empty() && cfg.command.name != command)
            throw ConfigError("config is for '" + cfg.command.name + "', not '" + command + "'");
        cfg.command.name = command;
        if (!out_dir.empty()) cfg.output.dir = out_dir;
        man = cli::run(cfg);
    } catch (const ConfigError& e) {
        man.command = command;
        man.status = "error";
        man.error_kind = e.kind();
        man.error_message = e.what();
    } catch (const std::exception& e) {
        man.command = command;
        man.status = "error";
        man.error_kind = "IOError";
        man.error_message = e.what();
    }
    if (man.status != "ok") {
        nlohmann::ordered_json err{{"status", "error"}, {"kind", man.error_kind}, {"message", man.error_message}};
        std::cerr << err.dump() << "\n";
    } else {
        std::cout << man.to_json()["results"].dump() << "\n";
    }
    return man.exit_code();
}
