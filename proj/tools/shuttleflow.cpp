#include <shuttleflow/citygen.hpp>
#include <shuttleflow/config.hpp>
#include <shuttleflow/scenario.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace shuttleflow;

namespace {

int cmd_run(const std::string& config_path, const std::string& out_dir, unsigned parallel, const std::string& only) {
    const auto cfg = Config::parse(io::read_file(config_path), config_path);
    auto matrix = MatrixConfig::from_config(cfg, fs::path(config_path).parent_path());
    auto scenarios = build_matrix(matrix);
    if (!only.empty()) {
        const auto it = std::find_if(scenarios.begin(), scenarios.end(), [&](const Scenario& s) { return s.name == only; });
        if (it == scenarios.end()) throw Error("no scenario named " + only);
        std::vector<Scenario> picked;
        for (const auto& s : scenarios) {
            if (s.name == only || s.name == it->baseline) picked.push_back(s);
        }
        scenarios = std::move(picked);
        std::erase_if(matrix.reduction_scenarios, [&](const std::string& n) { return n != only; });
    }
    const auto inputs = load_inputs(matrix);
    const auto start = std::chrono::steady_clock::now();
    const auto result = run_matrix(scenarios, inputs, matrix, parallel);
    write_reports(out_dir, result, matrix);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    int failed = 0;
    for (const auto& o : result.outcomes) {
        if (o.ok) {
            std::cout << o.scenario.name << "  agents=" << o.agents << " fleet=" << o.required_fleet
                      << " vkt=" << format_fixed(o.vkt.total(), 1) << "km"
                      << " wait=" << format_fixed(o.waiting.overall.mean_min, 2) << "min"
                      << " occ=" << format_fixed(o.occupancy.rate(), 3) << "\n";
        } else {
            ++failed;
            std::cout << o.scenario.name << "  FAILED: " << o.error << "\n";
        }
    }
    std::cout << result.outcomes.size() << " scenarios in " << format_fixed(secs, 1) << " s, reports in " << out_dir << "\n";
    return failed == 0 ? 0 : 1;
}

int cmd_report(const std::string& dir) {
    std::vector<nlohmann::json> summaries;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto summary = entry.path() / "summary.json";
        if (entry.is_directory() && fs::exists(summary)) summaries.push_back(nlohmann::json::parse(io::read_file(summary.string())));
    }
    if (summaries.empty()) throw Error("no */summary.json under " + dir);
    const auto cmp = build_comparison(std::move(summaries));
    io::write_file((fs::path(dir) / "comparison.csv").string(), cmp.csv);
    io::write_file((fs::path(dir) / "comparison_long.csv").string(), cmp.long_csv);
    std::cout << cmp.csv;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"shuttleflow: car bans served by shared autonomous shuttles"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run a scenario matrix");
    std::string config_path;
    std::string out_dir = "reports";
    unsigned parallel = 1;
    std::string only;
    run->add_option("--config", config_path, "Matrix config file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Report directory");
    run->add_option("--parallel", parallel, "Scenarios run concurrently")->check(CLI::PositiveNumber);
    run->add_option("--scenario", only, "Run one scenario (and its baseline), e.g. SC1.3");

    auto* gen = app.add_subcommand("gen-city", "Generate a synthetic city fixture");
    std::string size = "mini";
    std::uint64_t seed = 1;
    std::string fixture_dir = "fixtures";
    gen->add_option("--size", size, "mini or small")->check(CLI::IsMember({"mini", "small"}));
    gen->add_option("--seed", seed, "Generator seed");
    gen->add_option("--out", fixture_dir, "Output directory");

    auto* report = app.add_subcommand("report", "Rebuild comparison tables from scenario summaries");
    std::string compare_dir;
    report->add_option("--compare", compare_dir, "Report directory")->required()->check(CLI::ExistingDirectory);

    auto* config = app.add_subcommand("config", "Configuration helpers");
    bool dump = false;
    config->add_flag("--dump", dump, "Print every config key with its default");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(config_path, out_dir, parallel, only);
        if (*gen) {
            const auto city = generate_city(CityParams::for_size(size), seed);
            write_city(city, fixture_dir, seed);
            std::cout << "wrote " << city.network.nodes().size() << " nodes, " << city.network.links().size() << " links, "
                      << city.population.size() << " agents to " << fixture_dir << "\n";
            return 0;
        }
        if (*report) return cmd_report(compare_dir);
        if (*config) {
            if (!dump) {
                std::cerr << "config: nothing to do (try --dump)\n";
                return 2;
            }
            std::cout << default_config_text();
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
