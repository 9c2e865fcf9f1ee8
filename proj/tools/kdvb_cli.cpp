#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kdvb/app.hpp"

using namespace kdvb;

int main(int argc, char** argv)
{
    CLI::App cli{"Generalized KdV-Burgers solver and large-time asymptotics harness"};
    cli.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::string> overrides;

    auto add_common = [&](CLI::App* sub, bool with_out) {
        sub->add_option("config", config_path, "Config file of dotted key=value lines")->required();
        sub->add_option("--override", overrides, "Extra key=value, applied after the file")->take_all();
        if (with_out) sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
    };
    CLI::App* run = cli.add_subcommand("run", "Evolve a datum and optionally run an experiment");
    add_common(run, true);
    CLI::App* constants = cli.add_subcommand("constants", "Print delta, d, beta and tail constants");
    add_common(constants, false);
    CLI::App* compare = cli.add_subcommand("compare", "Diff a snapshot against a reference");
    add_common(compare, true);
    CLI::App* profiles = cli.add_subcommand("profiles", "Write chi, eta, V, Z profiles");
    add_common(profiles, true);

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return cli.exit(e) == 0 ? 0 : app::exit_config;
    }

    return app::guarded(
        [&] {
            Config raw = Config::load(config_path);
            for (const auto& o : overrides) raw.apply_override(o);
            const app::RunConfig rc = app::resolve(raw);
            if (run->parsed()) return app::cmd_run(rc, out_dir, std::cout);
            if (constants->parsed()) return app::cmd_constants(rc, std::cout);
            if (compare->parsed()) return app::cmd_compare(rc, out_dir, std::cout);
            return app::cmd_profiles(rc, out_dir, std::cout);
        },
        std::cerr);
}
