#include "coex/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "coex/derive.hpp"
#include "coex/parser.hpp"
#include "coex/printer.hpp"
#include "coex/script.hpp"
#include "coex/sqlgen.hpp"
#include "coex/verify.hpp"

namespace coex::cli {

namespace {

namespace fs = std::filesystem;

struct UniverseOptions {
    std::int64_t min = 0;
    std::int64_t max = 10;
    std::size_t max_size = 3;
    std::string mode = "exhaustive";
    std::uint64_t seed = 0;
    std::uint64_t samples = 1000;
    std::vector<std::string> strings;

    verify::Universe build() const {
        verify::Universe u;
        if (min > max) throw CLI::ValidationError("--min must not exceed --max");
        for (std::int64_t v = min; v <= max; ++v) u.ints.push_back(v);
        u.strings = strings;
        u.max_relation_size = max_size;
        u.mode = mode == "sampled" ? verify::Universe::Mode::Sampled
                                   : verify::Universe::Mode::Exhaustive;
        u.samples = samples;
        u.seed = seed;
        return u;
    }
};

void add_universe_flags(CLI::App* cmd, UniverseOptions& opts) {
    cmd->add_option("--min", opts.min, "Smallest integer constant in the universe");
    cmd->add_option("--max", opts.max, "Largest integer constant in the universe");
    cmd->add_option("--max-size", opts.max_size, "Largest relation size enumerated");
    cmd->add_option("--mode", opts.mode, "Verification mode")
        ->check(CLI::IsMember({"exhaustive", "sampled"}));
    cmd->add_option("--seed", opts.seed, "Seed for sampled mode");
    cmd->add_option("--samples", opts.samples, "Cases drawn in sampled mode");
    cmd->add_option("--strings", opts.strings,
                    "String constants for key columns (comma separated)")
        ->delimiter(',');
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot write " + path.string());
    out << content;
}

int cmd_derive(const std::string& spec_path, const std::string& out_dir,
               const UniverseOptions& opts, bool verbose, std::ostream& out, std::ostream& err) {
    derive::BxSpec spec;
    try {
        spec = derive::load_bx_spec(read_file(spec_path));
    } catch (const derive::FragmentError& e) {
        err << "fragment violation: step 1: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "step 1: " << e.what() << "\n";
        return 1;
    }
    derive::DerivedBx derived;
    try {
        derived = derive::derive_all(spec, opts.build());
    } catch (const derive::DeriveError& e) {
        err << e.what() << "\n";
        return 1;
    }
    fs::create_directories(out_dir);
    auto emit = [&](const char* name, const datalog::Program& program) {
        fs::path path = fs::path(out_dir) / name;
        write_file(path, datalog::printer::to_string(program));
        if (verbose) out << "wrote " << path.string() << "\n";
    };
    emit("get.dl", derived.get);
    emit("putdelta_prime.dl", derived.putdelta_prime);
    emit("undef.dl", derived.undef);
    emit("get_prime.dl", derived.get_prime);
    return 0;
}

int cmd_verify(const std::string& spec_path, const std::string& get_override,
               const std::string& undef_override, const std::string& json_path,
               const UniverseOptions& opts, std::ostream& out, std::ostream& err) {
    derive::BxSpec spec;
    try {
        spec = derive::load_bx_spec(read_file(spec_path));
    } catch (const Error& e) {
        err << e.what() << "\n";
        return 1;
    }
    verify::Universe u = opts.build();

    std::vector<verify::VerificationReport> reports;
    if (spec.putdelta.rules.empty()) {
        err << "warning: spec has no putdelta rules; all checks are vacuous\n";
        for (auto law : {verify::Law::GetPut, verify::Law::PutGet, verify::Law::Totality}) {
            reports.push_back({law, true, 0, std::nullopt, "vacuous: empty spec"});
        }
    } else {
        derive::DerivedBx derived;
        try {
            derived = derive::derive_all_unverified(spec);
            if (!get_override.empty()) {
                derived.get = datalog::parse_program(read_file(get_override));
            }
            if (!undef_override.empty()) {
                derived.undef = datalog::parse_program(read_file(undef_override));
            }
        } catch (const Error& e) {
            err << e.what() << "\n";
            return 1;
        }
        reports.push_back(verify::check_getput(derived.get, spec.putdelta, u));
        reports.push_back(verify::check_putget(derived.get, spec.putdelta, u));
        reports.push_back(
            verify::check_totality(spec.putdelta, derived.undef, derived.get_prime, u));
    }
    bool all_pass = true;
    for (const auto& report : reports) {
        out << report.text() << "\n";
        all_pass = all_pass && report.pass;
    }
    if (!json_path.empty()) {
        write_file(json_path, verify::reports_json(reports) + "\n");
    }
    return all_pass ? 0 : 1;
}

int cmd_simulate(const std::string& script_path, const UniverseOptions& opts, std::ostream& out,
                 std::ostream& err) {
    std::string text = read_file(script_path);
    try {
        auto result = runtime::run_script(text, fs::path(script_path).parent_path(), opts.build(),
                                          out);
        if (!result.ok()) {
            err << result.failed_expectations << " expectation(s) failed\n";
            return 1;
        }
        return 0;
    } catch (const runtime::ScriptError& e) {
        err << script_path << ":" << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return 1;
    }
}

int cmd_emit_sql(const std::string& spec_path, const std::string& out_dir,
                 const UniverseOptions& opts, bool verbose, std::ostream& out,
                 std::ostream& err) {
    derive::DerivedBx derived;
    try {
        derived = derive::derive_all(derive::load_bx_spec(read_file(spec_path)), opts.build());
    } catch (const Error& e) {
        err << e.what() << "\n";
        return 1;
    }
    std::vector<std::pair<std::string, std::string>> files;
    try {
        files = sqlgen::render_files(sqlgen::emit_sql(derived));
    } catch (const sqlgen::SqlGenError& e) {
        err << e.what() << "\n";
        return 1;
    }
    fs::create_directories(out_dir);
    for (const auto& [name, content] : files) {
        fs::path path = fs::path(out_dir) / name;
        write_file(path, content);
        if (verbose) out << "wrote " << path.string() << "\n";
    }
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Derivation engine and runtime for co-existing database schema versions"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string spec_path, out_dir = ".", script_path, get_override, undef_override, json_path;
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Verbose output");

    UniverseOptions derive_opts;
    derive_opts.max_size = 2;  // keeps derive-time verification fast
    auto* derive_cmd =
        app.add_subcommand("derive", "Derive get, putdelta', undef and get' from a spec");
    derive_cmd->add_option("--spec", spec_path, "Input .dl spec")->required();
    derive_cmd->add_option("--out", out_dir, "Output directory");
    add_universe_flags(derive_cmd, derive_opts);

    UniverseOptions verify_opts;
    auto* verify_cmd =
        app.add_subcommand("verify", "Check GetPut, PutGet and Totality by brute force");
    verify_cmd->add_option("--spec", spec_path, "Input .dl spec")->required();
    verify_cmd->add_option("--get", get_override, "Use this get program instead of deriving");
    verify_cmd->add_option("--undef", undef_override,
                           "Use this undef program instead of deriving");
    verify_cmd->add_option("--json", json_path, "Write the machine-readable report here");
    add_universe_flags(verify_cmd, verify_opts);

    UniverseOptions simulate_opts;
    simulate_opts.max = 8;
    simulate_opts.max_size = 2;
    simulate_opts.strings = {"a"};
    auto* simulate_cmd = app.add_subcommand("simulate", "Replay a .cosx simulation script");
    simulate_cmd->add_option("--script", script_path, "Input .cosx script")->required();
    add_universe_flags(simulate_cmd, simulate_opts);

    UniverseOptions sql_opts;
    sql_opts.max_size = 2;
    auto* sql_cmd = app.add_subcommand("emit-sql", "Emit CREATE VIEW and trigger SQL");
    sql_cmd->add_option("--spec", spec_path, "Input .dl spec")->required();
    sql_cmd->add_option("--out", out_dir, "Output directory");
    add_universe_flags(sql_cmd, sql_opts);

    std::vector<char*> argv;
    std::vector<std::string> storage = args;
    std::string program_name = "coex";
    argv.push_back(program_name.data());
    for (auto& arg : storage) argv.push_back(arg.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return 2;
    }

    try {
        if (derive_cmd->parsed()) {
            return cmd_derive(spec_path, out_dir, derive_opts, verbose, out, err);
        }
        if (verify_cmd->parsed()) {
            return cmd_verify(spec_path, get_override, undef_override, json_path, verify_opts,
                              out, err);
        }
        if (simulate_cmd->parsed()) {
            return cmd_simulate(script_path, simulate_opts, out, err);
        }
        if (sql_cmd->parsed()) {
            return cmd_emit_sql(spec_path, out_dir, sql_opts, verbose, out, err);
        }
    } catch (const std::ios_base::failure& e) {
        err << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace coex::cli
