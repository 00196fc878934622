#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "switchsim/descriptor.hpp"
#include "switchsim/errors.hpp"
#include "switchsim/experiment.hpp"

namespace {

struct CommonFlags {
    std::string descriptor;
    std::uint64_t seed = 0;
    std::string out_dir;
    int workers = 1;
    std::string format;
    int cutoff = 3;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool descriptor_required) {
    CLI::Option* opt =
        cmd->add_option("-d,--descriptor", flags.descriptor, "experiment descriptor file");
    if (descriptor_required) opt->required();
    cmd->add_option("--seed", flags.seed, "override the RNG seed");
    cmd->add_option("--out", flags.out_dir, "override the output directory");
    cmd->add_option("--workers", flags.workers, "override the worker count")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--format", flags.format, "override the output format")
        ->check(CLI::IsMember({"csv", "json"}));
}

} // namespace

int main(int argc, char** argv) {
    using namespace switchsim;

    CLI::App app{"two-photon conditional-phase switch simulator"};
    app.require_subcommand(1);

    CommonFlags flags;
    CLI::App* fig3 = app.add_subcommand("fig3", "one reference scan, fringe fits, phase lag");
    CLI::App* fig4 = app.add_subcommand("fig4", "pump-phase sweep with closed-form overlay");
    CLI::App* validate = app.add_subcommand("validate", "built-in validation checks");
    CLI::App* calibrate = app.add_subcommand("calibrate", "amplitudes derived from the rates");
    add_common(fig3, flags, true);
    add_common(fig4, flags, true);
    add_common(validate, flags, false);
    add_common(calibrate, flags, true);
    validate->add_option("--cutoff", flags.cutoff, "truncation cutoff for the exact checks")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    CLI::App* cmd = app.get_subcommands().front();
    try {
        ExperimentDescriptor desc{};
        if (!flags.descriptor.empty()) desc = load_descriptor(flags.descriptor);
        apply_env_overrides(desc);
        // Flags win over the environment, which wins over the descriptor.
        if (cmd->count("--seed")) desc.seed = flags.seed;
        if (cmd->count("--out")) desc.out_dir = flags.out_dir;
        if (cmd->count("--workers")) desc.workers = flags.workers;
        if (cmd->count("--format"))
            desc.format = flags.format == "json" ? OutputFormat::json : OutputFormat::csv;
        if (cmd == validate && cmd->count("--cutoff")) desc.cutoff = flags.cutoff;

        RunResult result;
        if (cmd == fig3)
            result = run_fig3(desc);
        else if (cmd == fig4)
            result = run_fig4(desc);
        else if (cmd == validate)
            result = run_validate(desc);
        else
            result = run_calibrate(desc);
        return result.exit_code;
    } catch (const DescriptorError& e) {
        std::cerr << "descriptor error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
