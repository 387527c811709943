#ifndef RECYKLOS_MANIFEST_HPP
#define RECYKLOS_MANIFEST_HPP

#include <chrono>
#include <cstddef>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "recyklos/csr.hpp"
#include "recyklos/errors.hpp"
#include "recyklos/generate.hpp"
#include "recyklos/matrix_market.hpp"
#include "recyklos/recycle_solvers.hpp"
#include "recyklos/selection.hpp"
#include "recyklos/solvers.hpp"

namespace recyklos {

struct SolverConfig {
    std::string kind = "gmres"; // gmres|fom|minres|cg|rgmres|rfom|rminres|rcg
    std::size_t m = 50;         // restart length
    double tol = 1e-8;
    std::size_t maxit = 1000;
};

struct SystemSpec {
    std::string matrix_path;
    std::string rhs_path; // empty: b = ones
    bool symmetric = false;
    bool spd = false;
    std::vector<double> shifts; // nonempty: shifted-family solve
};

/// The CLI driver configuration. Systems come either from explicit paths or
/// from an inline generator spec.
struct SequenceManifest {
    std::vector<SystemSpec> systems;
    GenSpec generator; // used when generator.kind is nonempty
    SolverConfig solver;
    SelectorSpec selector;
    bool warm_start = false;
    bool recycle_across_systems = false;
    bool timing = false; // off: wall_ms reported as 0 so reports are byte-stable
};

struct ConvergenceRecord {
    std::size_t system = 0;
    bool has_shift = false;
    double shift = 0.0;
    std::vector<double> resnorms;
    std::size_t iterations = 0;
    std::size_t matvecs = 0;
    double wall_ms = 0.0;
    std::size_t recycle_dim = 0;
    std::string termination = "maxiter";
    bool converged = false;

    bool operator==(const ConvergenceRecord&) const = default;
};

// ---------------------------------------------------------------------------
// JSON (de)serialization
// ---------------------------------------------------------------------------

inline SelectorKind selector_kind_from_string(const std::string& s) {
    if (s == "harmonic_ritz") return SelectorKind::HarmonicRitz;
    if (s == "ritz" || s == "ritz_window") return SelectorKind::Ritz;
    if (s == "pod") return SelectorKind::PodSnapshots;
    if (s == "previous_solutions") return SelectorKind::PreviousSolutions;
    if (s == "none" || s.empty()) return SelectorKind::None;
    throw InvalidInput("unknown selector kind '" + s + "'");
}

inline SequenceManifest parse_manifest(const nlohmann::json& j) {
    SequenceManifest m;
    if (j.contains("generator")) {
        const auto& g = j.at("generator");
        m.generator.kind = g.at("kind").get<std::string>();
        m.generator.n = g.at("n").get<std::size_t>();
        m.generator.count = g.value("count", std::size_t{1});
        m.generator.perturb = g.value("perturb", 0.0);
        m.generator.seed = g.value("seed", std::uint64_t{0});
    }
    if (j.contains("systems")) {
        for (const auto& s : j.at("systems")) {
            SystemSpec spec;
            spec.matrix_path = s.at("matrix").get<std::string>();
            spec.rhs_path = s.value("rhs", std::string());
            spec.symmetric = s.value("symmetric", false);
            spec.spd = s.value("spd", false);
            if (s.contains("shifts")) spec.shifts = s.at("shifts").get<std::vector<double>>();
            m.systems.push_back(std::move(spec));
        }
    }
    if (m.systems.empty() && m.generator.kind.empty())
        throw InvalidInput("manifest: needs at least one system (or a generator)");
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        m.solver.kind = s.value("kind", std::string("gmres"));
        m.solver.m = s.value("m", std::size_t{50});
        m.solver.tol = s.value("tol", 1e-8);
        m.solver.maxit = s.value("maxit", std::size_t{1000});
    }
    if (j.contains("selector")) {
        const auto& s = j.at("selector");
        m.selector.kind = selector_kind_from_string(s.value("kind", std::string("none")));
        m.selector.k = s.value("k", std::size_t{0});
        m.selector.p = s.value("p", std::size_t{0});
        const std::string w = s.value("which", std::string("smallest"));
        if (w == "smallest")
            m.selector.which = Which::SmallestMagnitude;
        else if (w == "largest")
            m.selector.which = Which::LargestMagnitude;
        else
            throw InvalidInput("manifest: selector which must be smallest|largest");
    }
    m.warm_start = j.value("warm_start", false);
    m.recycle_across_systems = j.value("recycle_across_systems", false);
    m.timing = j.value("timing", false);
    for (const SystemSpec& s : m.systems)
        if (s.spd && !s.symmetric) throw InvalidInput("manifest: spd requires symmetric");
    return m;
}

inline SequenceManifest load_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open manifest " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("manifest " + path + ": " + e.what());
    }
    return parse_manifest(j);
}

inline nlohmann::ordered_json record_to_json(const ConvergenceRecord& r) {
    nlohmann::ordered_json j;
    j["system"] = r.system;
    if (r.has_shift)
        j["shift"] = r.shift;
    else
        j["shift"] = nullptr;
    j["resnorms"] = r.resnorms;
    j["iter"] = r.iterations;
    j["matvecs"] = r.matvecs;
    j["wall_ms"] = r.wall_ms;
    j["recycle_dim"] = r.recycle_dim;
    j["termination"] = r.termination;
    j["converged"] = r.converged;
    return j;
}

inline std::vector<ConvergenceRecord> records_from_json(const nlohmann::json& j) {
    std::vector<ConvergenceRecord> out;
    for (const auto& e : j) {
        ConvergenceRecord r;
        r.system = e.at("system").get<std::size_t>();
        if (!e.at("shift").is_null()) {
            r.has_shift = true;
            r.shift = e.at("shift").get<double>();
        }
        r.resnorms = e.at("resnorms").get<std::vector<double>>();
        r.iterations = e.at("iter").get<std::size_t>();
        r.matvecs = e.at("matvecs").get<std::size_t>();
        r.wall_ms = e.at("wall_ms").get<double>();
        r.recycle_dim = e.at("recycle_dim").get<std::size_t>();
        r.termination = e.at("termination").get<std::string>();
        r.converged = e.at("converged").get<bool>();
        out.push_back(std::move(r));
    }
    return out;
}

/// CSV: one data row per iteration (the stored initial residual is row 0 of
/// the JSON history but produces no CSV row). JSON: full record list.
inline void emit_report(const std::vector<ConvergenceRecord>& records, const std::string& format,
                        std::ostream& out) {
    if (format == "csv") {
        out << "system,shift,iter,resnorm,matvecs\n";
        char buf[64];
        for (const ConvergenceRecord& r : records)
            for (std::size_t t = 1; t < r.resnorms.size(); ++t) {
                out << r.system << ",";
                if (r.has_shift) {
                    std::snprintf(buf, sizeof(buf), "%.17g", r.shift);
                    out << buf;
                }
                std::snprintf(buf, sizeof(buf), "%.17g", r.resnorms[t]);
                out << "," << t << "," << buf << "," << r.matvecs << "\n";
            }
    } else if (format == "json") {
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const ConvergenceRecord& r : records) j.push_back(record_to_json(r));
        out << j.dump(2) << "\n";
    } else {
        throw InvalidInput("emit_report: format must be csv|json");
    }
}

inline void emit_report(const std::vector<ConvergenceRecord>& records, const std::string& format,
                        const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path + " for writing");
    emit_report(records, format, f);
    if (!f) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Sequence driver
// ---------------------------------------------------------------------------

namespace detail {

struct LoadedSystem {
    CsrMatrix a;
    Vector b;
    bool symmetric = false;
    bool spd = false;
    std::vector<double> shifts;
};

inline std::vector<LoadedSystem> load_systems(const SequenceManifest& m) {
    std::vector<LoadedSystem> out;
    if (!m.generator.kind.empty()) {
        for (GeneratedSystem& g : generate_sequence(m.generator)) {
            LoadedSystem s;
            s.a = std::move(g.a);
            s.b = std::move(g.b);
            s.symmetric = g.symmetric;
            s.spd = g.spd;
            out.push_back(std::move(s));
        }
    }
    for (std::size_t i = 0; i < m.systems.size(); ++i) {
        const SystemSpec& spec = m.systems[i];
        LoadedSystem s;
        try {
            s.a = read_matrix_market(spec.matrix_path);
            if (!spec.rhs_path.empty()) {
                const CsrMatrix rb = read_matrix_market(spec.rhs_path);
                if (rb.ncols != 1 || rb.nrows != s.a.nrows)
                    throw InvalidInput("rhs is not a conforming column");
                s.b = zeros(rb.nrows);
                for (std::size_t r = 0; r < rb.nrows; ++r)
                    for (std::size_t p = rb.row_ptr[r]; p < rb.row_ptr[r + 1]; ++p)
                        s.b[r] += rb.vals[p];
            } else {
                s.b = ones(s.a.nrows);
            }
        } catch (const Error& e) {
            throw IoError("system " + std::to_string(i) + ": " + e.what());
        }
        s.symmetric = spec.symmetric;
        s.spd = spec.spd;
        s.shifts = spec.shifts;
        out.push_back(std::move(s));
    }
    return out;
}

inline RecycleVariant variant_for(const std::string& kind) {
    if (kind == "rfom") return RecycleVariant::ObliqueFOM;
    if (kind == "rcg") return RecycleVariant::GalerkinA;
    return RecycleVariant::Orthogonal;
}

} // namespace detail

/// Solve the manifest's systems in order, carrying the warm-start iterate
/// and (when enabled) the recycle space from one system to the next. The
/// recycle basis is always re-prepared against the new matrix. Records are
/// emitted even when a system fails; unreadable inputs abort with a
/// diagnostic naming the system.
inline std::vector<ConvergenceRecord> run_sequence(const SequenceManifest& man) {
    const std::vector<detail::LoadedSystem> systems = detail::load_systems(man);
    if (systems.empty()) throw InvalidInput("run_sequence: no systems");
    const SolverConfig& sc = man.solver;
    const SelectorSpec& sel = man.selector;

    std::vector<ConvergenceRecord> records;
    Vector x_prev;
    std::vector<Vector> u_carry;   // raw recycle candidate for the next system
    std::vector<Vector> snapshots; // POD selector state
    std::vector<Vector> history;   // previous-solutions selector state

    for (std::size_t i = 0; i < systems.size(); ++i) {
        const detail::LoadedSystem& sys = systems[i];
        const std::size_t n = sys.a.nrows;
        const LinearOperator op = make_operator(sys.a);
        const auto t0 = std::chrono::steady_clock::now();
        ConvergenceRecord rec;
        rec.system = i;
        try {
            const Vector x0 =
                (man.warm_start && x_prev.size() == n) ? x_prev : zeros(n);
            const RecycleVariant variant = detail::variant_for(sc.kind);
            RecycleSpace rs = detail::empty_space(variant);
            if (man.recycle_across_systems && !u_carry.empty()) {
                try {
                    rs = prepare_recycle(op, u_carry, variant);
                } catch (const EmptyRecycleSpace&) {
                }
            }
            rec.recycle_dim = rs.k();

            if (!sys.shifts.empty()) {
                if (!sys.symmetric)
                    throw InvalidInput("shifted systems require symmetric = true");
                ShiftedFamily fam{op, sys.b, sys.shifts};
                const std::vector<SolveReport> reps =
                    solve_shifted_family(fam, rs, sc.m, sc.tol);
                const double wall =
                    std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
                for (std::size_t sh = 0; sh < reps.size(); ++sh) {
                    ConvergenceRecord r = rec;
                    r.has_shift = true;
                    r.shift = sys.shifts[sh];
                    r.resnorms = reps[sh].resnorms;
                    r.iterations = reps[sh].iterations;
                    r.matvecs = sh == 0 ? *op.matvec_count : 0;
                    r.termination = to_string(reps[sh].termination);
                    r.converged = reps[sh].converged;
                    r.wall_ms = man.timing && sh == 0 ? wall : 0.0;
                    records.push_back(std::move(r));
                }
                x_prev = reps[0].x;
                if (man.recycle_across_systems &&
                    sel.kind == SelectorKind::PreviousSolutions) {
                    history.push_back(reps[0].x);
                    u_carry = previous_solutions_select(history, sel.k);
                }
                continue;
            }

            SolveReport rep;
            RecycleSpace rs_next = rs;
            if (sc.kind == "gmres") {
                rep = gmres(op, sys.b, x0, sc.m, sc.tol, sc.maxit);
            } else if (sc.kind == "fom") {
                rep = fom(op, sys.b, x0, sc.m, sc.tol, sc.maxit);
            } else if (sc.kind == "minres") {
                if (!sys.symmetric) throw InvalidInput("minres requires symmetric = true");
                rep = minres(op, sys.b, x0, sc.tol, sc.maxit);
            } else if (sc.kind == "cg") {
                if (!sys.spd) throw InvalidInput("cg requires spd = true");
                rep = cg(op, sys.b, x0, sc.tol, sc.maxit);
            } else if (sc.kind == "rgmres") {
                SelectorSpec inner = sel;
                if (inner.kind != SelectorKind::HarmonicRitz &&
                    inner.kind != SelectorKind::Ritz)
                    inner.kind = SelectorKind::None;
                std::tie(rep, rs_next) =
                    rgmres_gcrodr(op, sys.b, x0, rs, sc.m, sc.tol, sc.maxit, inner);
            } else if (sc.kind == "rfom") {
                rep = rfom(op, sys.b, x0, rs, sc.m, sc.tol, sc.maxit);
            } else if (sc.kind == "rminres") {
                if (!sys.symmetric) throw InvalidInput("rminres requires symmetric = true");
                std::tie(rep, rs_next) = rminres(op, sys.b, x0, rs, sc.tol, sc.maxit,
                                                 sel.window(), sel.k, sel.which);
            } else if (sc.kind == "rcg") {
                if (!sys.spd) throw InvalidInput("rcg requires spd = true");
                std::tie(rep, rs_next) = rcg(op, sys.b, x0, rs, sc.tol, sc.maxit,
                                             sel.window(), sel.k, sel.which);
            } else {
                throw InvalidInput("unknown solver kind '" + sc.kind + "'");
            }

            if (man.recycle_across_systems) {
                switch (sel.kind) {
                    case SelectorKind::PodSnapshots: {
                        snapshots.push_back(rep.x);
                        const std::size_t cap = std::max(sel.window(), sel.k);
                        if (snapshots.size() > cap)
                            snapshots.erase(snapshots.begin(),
                                            snapshots.end() -
                                                static_cast<std::ptrdiff_t>(cap));
                        u_carry = pod_select(DenseMatrix::from_columns(snapshots), sel.k);
                        break;
                    }
                    case SelectorKind::PreviousSolutions:
                        history.push_back(rep.x);
                        u_carry = previous_solutions_select(history, sel.k);
                        break;
                    case SelectorKind::HarmonicRitz:
                    case SelectorKind::Ritz: u_carry = rs_next.U; break;
                    case SelectorKind::None: break;
                }
            }
            x_prev = rep.x;
            rec.resnorms = rep.resnorms;
            rec.iterations = rep.iterations;
            rec.matvecs = *op.matvec_count; // everything the system cost, prepare included
            rec.termination = to_string(rep.termination);
            rec.converged = rep.converged;
            if (man.timing)
                rec.wall_ms = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - t0)
                                  .count();
            records.push_back(std::move(rec));
        } catch (const IoError&) {
            throw; // unreadable input: abort (load_systems already names the system)
        } catch (const Error& e) {
            std::cerr << "recyklos: system " << i << " failed: " << e.what() << "\n";
            rec.matvecs = *op.matvec_count;
            rec.termination = "breakdown";
            rec.converged = false;
            records.push_back(std::move(rec));
        }
    }
    return records;
}

/// `recyklos verify`: re-run the manifest with every per-iteration invariant
/// assertion enabled; true when nothing threw and every record converged.
inline bool verify_manifest(const SequenceManifest& man) {
    debug_checks::force(true);
    bool ok = true;
    try {
        const std::vector<ConvergenceRecord> recs = run_sequence(man);
        for (const ConvergenceRecord& r : recs)
            if (!r.converged) {
                std::cerr << "recyklos: system " << r.system << " did not converge ("
                          << r.termination << ")\n";
                ok = false;
            }
    } catch (const Error& e) {
        std::cerr << "recyklos: verification failed: " << e.what() << "\n";
        ok = false;
    }
    debug_checks::force(false);
    return ok;
}

} // namespace recyklos

#endif
