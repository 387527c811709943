// Batch driver for sequences of sparse linear systems: solve a manifest,
// generate example sequences, or re-verify a manifest with invariant checks.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "recyklos/recyklos.hpp"

namespace fs = std::filesystem;

namespace {

// matrix/rhs paths in generated manifests are relative to the manifest file
recyklos::SequenceManifest load_rebased(const std::string& manifest_path) {
    recyklos::SequenceManifest man = recyklos::load_manifest(manifest_path);
    const fs::path base = fs::path(manifest_path).parent_path();
    for (recyklos::SystemSpec& s : man.systems) {
        if (!s.matrix_path.empty() && fs::path(s.matrix_path).is_relative())
            s.matrix_path = (base / s.matrix_path).string();
        if (!s.rhs_path.empty() && fs::path(s.rhs_path).is_relative())
            s.rhs_path = (base / s.rhs_path).string();
    }
    return man;
}

int cmd_solve(const std::string& manifest_path, const std::string& out_path,
              const std::string& csv_path) {
    const recyklos::SequenceManifest man = load_rebased(manifest_path);
    const std::vector<recyklos::ConvergenceRecord> records = recyklos::run_sequence(man);
    recyklos::emit_report(records, "json", out_path);
    if (!csv_path.empty()) recyklos::emit_report(records, "csv", csv_path);
    bool all_ok = !records.empty();
    for (const recyklos::ConvergenceRecord& r : records) all_ok = all_ok && r.converged;
    std::cout << records.size() << " record(s), "
              << (all_ok ? "all converged" : "convergence failures present") << "\n";
    return all_ok ? 0 : 1;
}

int cmd_gen(const recyklos::GenSpec& spec, const std::string& out_dir) {
    const std::vector<recyklos::GeneratedSystem> systems = recyklos::generate_sequence(spec);
    fs::create_directories(out_dir);
    nlohmann::ordered_json man;
    man["systems"] = nlohmann::ordered_json::array();
    char name[64];
    for (std::size_t i = 0; i < systems.size(); ++i) {
        std::snprintf(name, sizeof(name), "system_%02zu.mtx", i);
        const std::string mpath = (fs::path(out_dir) / name).string();
        recyklos::write_matrix_market(systems[i].a, mpath);
        std::snprintf(name, sizeof(name), "rhs_%02zu.mtx", i);
        const std::string rpath = (fs::path(out_dir) / name).string();
        std::vector<std::tuple<std::size_t, std::size_t, double>> t;
        for (std::size_t r = 0; r < systems[i].b.size(); ++r)
            t.emplace_back(r, 0, systems[i].b[r]);
        recyklos::write_matrix_market(
            recyklos::CsrMatrix::from_triplets(systems[i].b.size(), 1, std::move(t)), rpath);
        nlohmann::ordered_json s;
        s["matrix"] = fs::path(mpath).filename().string();
        s["rhs"] = fs::path(rpath).filename().string();
        s["symmetric"] = systems[i].symmetric;
        s["spd"] = systems[i].spd;
        man["systems"].push_back(s);
    }
    man["solver"] = {{"kind", systems[0].spd ? "rcg" : "rgmres"},
                     {"m", 50},
                     {"tol", 1e-8},
                     {"maxit", 2000}};
    man["selector"] = {{"kind", systems[0].spd ? "ritz_window" : "harmonic_ritz"},
                       {"k", 10},
                       {"which", "smallest"}};
    man["warm_start"] = false;
    man["recycle_across_systems"] = true;
    std::ofstream f(fs::path(out_dir) / "manifest.json");
    if (!f) throw recyklos::IoError("cannot write manifest.json in " + out_dir);
    f << man.dump(2) << "\n";
    std::cout << "wrote " << systems.size() << " system(s) to " << out_dir << "\n";
    return 0;
}

int cmd_verify(const std::string& manifest_path) {
    const recyklos::SequenceManifest man = load_rebased(manifest_path);
    const bool ok = recyklos::verify_manifest(man);
    std::cout << (ok ? "verification passed" : "verification FAILED") << "\n";
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"recyklos: Krylov solvers with subspace recycling for system sequences"};
    app.require_subcommand(1);

    std::string manifest_path, out_path, csv_path, out_dir;
    recyklos::GenSpec spec;

    CLI::App* solve = app.add_subcommand("solve", "solve every system in a manifest");
    solve->add_option("--manifest", manifest_path, "manifest JSON path")->required();
    solve->add_option("--out", out_path, "JSON report path")->required();
    solve->add_option("--csv", csv_path, "optional CSV report path");

    CLI::App* gen = app.add_subcommand("gen", "generate a system sequence + manifest");
    gen->add_option("--kind", spec.kind, "laplacian2d | diag_perturb")->required();
    gen->add_option("--n", spec.n, "system dimension")->required();
    gen->add_option("--count", spec.count, "number of systems")->default_val(1);
    gen->add_option("--perturb", spec.perturb, "relative perturbation in [0,1)")
        ->default_val(0.0);
    gen->add_option("--seed", spec.seed, "RNG seed")->default_val(0);
    gen->add_option("--out", out_dir, "output directory")->required();

    CLI::App* verify = app.add_subcommand("verify", "re-solve with invariant checks on");
    verify->add_option("--manifest", manifest_path, "manifest JSON path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(manifest_path, out_path, csv_path);
        if (gen->parsed()) return cmd_gen(spec, out_dir);
        if (verify->parsed()) return cmd_verify(manifest_path);
    } catch (const recyklos::Error& e) {
        std::cerr << "recyklos: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
