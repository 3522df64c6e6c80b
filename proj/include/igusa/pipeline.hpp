#pragma once

// Job configuration, corpus files and the count -> zeta -> reconstruction ->
// poles pipeline shared by the command-line driver and batch checks.

#include "igusa/characters.hpp"
#include "igusa/counting.hpp"
#include "igusa/json_io.hpp"
#include "igusa/parse.hpp"
#include "igusa/series.hpp"

#include <atomic>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace igusa {

struct CharacterSpec {
    unsigned e = 1;
    std::vector<std::uint64_t> exps;
};

struct JobConfig {
    std::string name;
    std::string poly;
    std::uint64_t p = 2;
    /// Counting dimension; defaults to the polynomial's variable count.
    std::optional<unsigned> n;
    unsigned imax = 8;
    Algorithm algorithm = Algorithm::automatic;
    std::optional<unsigned> all_targets;
    std::uint64_t budget = kDefaultBudget;
    unsigned workers = 1;
    ReconstructOptions recon;
    std::optional<unsigned> max_num_deg;
    std::optional<unsigned> max_den_deg;
    std::optional<CharacterSpec> character;
    std::optional<unsigned> horizon;

    std::string label() const { return name.empty() ? poly + " @ p=" + std::to_string(p) : name; }
};

/// A parsed job: the polynomial in its own variables plus the counting dimension.
struct Job {
    MultiPoly f;
    Prime p;
    unsigned n;

    unsigned extra_vars() const { return n - f.nvars(); }
};

inline Job resolve(const JobConfig& cfg) {
    if (cfg.imax == 0) throw std::invalid_argument("imax must be positive");
    if (cfg.workers == 0) throw std::invalid_argument("workers must be positive");
    MultiPoly f = parse_poly(cfg.poly);
    const unsigned n = cfg.n.value_or(f.nvars());
    if (n < f.nvars())
        throw std::invalid_argument("declared n = " + std::to_string(n) + " is below the " +
                                    std::to_string(f.nvars()) + " variables used");
    return Job{std::move(f), Prime(cfg.p), n};
}

/// Overrides fields of base with those present in a JSON fragment.
inline JobConfig merge_job(const json& j, JobConfig base) {
    if (!j.is_object()) throw std::invalid_argument("job fragment must be a JSON object");
    if (j.contains("name")) base.name = j["name"].get<std::string>();
    if (j.contains("poly")) base.poly = j["poly"].get<std::string>();
    if (j.contains("p")) base.p = j["p"].get<std::uint64_t>();
    if (j.contains("n")) base.n = j["n"].get<unsigned>();
    if (j.contains("imax")) base.imax = j["imax"].get<unsigned>();
    if (j.contains("algo")) base.algorithm = algorithm_from_string(j["algo"].get<std::string>());
    if (j.contains("all_targets")) base.all_targets = j["all_targets"].get<unsigned>();
    if (j.contains("budget")) base.budget = j["budget"].get<std::uint64_t>();
    if (j.contains("workers")) base.workers = j["workers"].get<unsigned>();
    if (j.contains("guard")) base.recon.guard = j["guard"].get<unsigned>();
    if (j.contains("nu_max")) base.recon.nu_max = j["nu_max"].get<unsigned>();
    if (j.contains("N_max")) base.recon.N_max = j["N_max"].get<unsigned>();
    if (j.contains("max_num")) base.max_num_deg = j["max_num"].get<unsigned>();
    if (j.contains("max_den")) base.max_den_deg = j["max_den"].get<unsigned>();
    if (j.contains("horizon")) base.horizon = j["horizon"].get<unsigned>();
    if (j.contains("character")) {
        const auto& c = j["character"];
        base.character = CharacterSpec{c.at("e").get<unsigned>(), c.at("exps").get<std::vector<std::uint64_t>>()};
    }
    return base;
}

inline std::vector<JobConfig> load_corpus(const std::string& path, const JobConfig& base = {}) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path);
    const json doc = json::parse(in);
    if (!doc.is_array()) throw std::invalid_argument("corpus must be a JSON list of job fragments");
    std::vector<JobConfig> out;
    for (const auto& item : doc) out.push_back(merge_job(item, base));
    return out;
}

inline CountTable job_counts(const JobConfig& cfg, const Job& job, unsigned i_max,
                             const std::atomic<bool>* cancel = nullptr) {
    CountOptions opt;
    opt.algorithm = cfg.algorithm;
    opt.all_targets_upto = cfg.all_targets;
    opt.budget = cfg.budget;
    opt.workers = cfg.workers;
    opt.extra_vars = job.extra_vars();
    opt.cancel = cancel;
    return count_table(job.f, job.p, i_max, opt);
}

struct ZetaAnalysis {
    CountTable table;
    RationalSeries poincare;
    RationalSeries zeta;
    std::optional<RationalFunction> function;
    std::optional<std::string> error;
    PoleReport poles;

    /// min real part as an exact rational when it comes from a peeled factor.
    std::optional<mpq_class> exact_l() const {
        if (!function || poles.empty()) return std::nullopt;
        return poles.min_real_part().exact;
    }
};

/// Counts M_0..M_imax, forms P and Z, and reconstructs Z from its imax
/// coefficients. Reconstruction failure is recorded, not thrown.
inline ZetaAnalysis analyze_zeta(const JobConfig& cfg, const std::atomic<bool>* cancel = nullptr) {
    const Job job = resolve(cfg);
    ZetaAnalysis a{job_counts(cfg, job, cfg.imax, cancel), {}, {}, std::nullopt, std::nullopt, {}};
    if (!a.table.complete()) {
        a.error = "interrupted";
        return a;
    }
    a.poincare = poincare_series(a.table, job.n, cfg.imax);
    a.zeta = zeta_coefficients(a.poincare);
    try {
        if (cfg.max_num_deg && cfg.max_den_deg)
            a.function = reconstruct_rational(a.zeta, *cfg.max_num_deg, *cfg.max_den_deg, cfg.recon);
        else
            a.function = reconstruct_auto(a.zeta, cfg.recon);
        a.poles = pole_report(*a.function, job.p);
    } catch (const ReconstructionError& e) {
        a.error = e.what();
    }
    return a;
}

/// Counter for twisted streams that accounts for dummy variables.
inline Counter job_counter(const Job& job) {
    const unsigned extra = job.extra_vars();
    return [extra](const MultiPoly& g, const Prime& p, unsigned level, const mpz_class& u) -> mpz_class {
        return lift_count(g, p, level, u) * p.pow(static_cast<unsigned long>(level) * extra);
    };
}

}  // namespace igusa
