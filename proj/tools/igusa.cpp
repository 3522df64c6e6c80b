// igusa: command-line driver for point counts, zeta coefficients,
// reconstruction, pole reports, character twists and corpus checks.

#include "igusa/pipeline.hpp"

#include "CLI11.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <variant>

#ifndef IGUSA_DEFAULT_CORPUS
#define IGUSA_DEFAULT_CORPUS "data/corpus.json"
#endif

using namespace igusa;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitVerify = 2;
constexpr int kExitBudget = 3;
constexpr int kExitInterrupted = 130;
constexpr std::uint64_t kMaxPrime = 10'000;

std::atomic<bool> g_cancel{false};

extern "C" void on_sigint(int) { g_cancel.store(true); }

/// Raised when Ctrl-C arrives outside count_table; carries the partial report.
struct Interrupted {
    json partial;
};

void check_cancel(const json& partial) {
    if (g_cancel.load()) throw Interrupted{partial};
}

std::uint64_t env_budget() {
    if (const char* s = std::getenv("IGUSA_BUDGET")) {
        try {
            std::size_t used = 0;
            const unsigned long long v = std::stoull(s, &used);
            if (used == std::string(s).size() && v > 0) return v;
        } catch (const std::exception&) {
        }
        throw std::invalid_argument("IGUSA_BUDGET must be a positive integer");
    }
    return kDefaultBudget;
}

// Flags shared by every subcommand. CLI11 binds to plain values; presence
// is read back from the option pointers.
struct Flags {
    std::string poly;
    std::uint64_t p = 2;
    unsigned n = 0, imax = 8, all_targets = 0, workers = 1;
    std::string algo = "auto";
    std::uint64_t budget = kDefaultBudget;
    unsigned guard = 4, nu_max = 0, N_max = 0, max_num = 0, max_den = 0, horizon = 0;
    std::string out, csv;

    CLI::Option *o_poly = nullptr, *o_n = nullptr, *o_all = nullptr, *o_max_num = nullptr, *o_max_den = nullptr,
                *o_horizon = nullptr;
};

void add_job_flags(CLI::App* cmd, Flags& f, bool needs_poly) {
    f.o_poly = cmd->add_option("--poly", f.poly, "polynomial, e.g. \"x1*x2 + x3^2\"");
    if (needs_poly) f.o_poly->required();
    cmd->add_option("--p", f.p, "prime p < 10000")->capture_default_str();
    f.o_n = cmd->add_option("--n", f.n, "number of variables (>= those used; extras are dummies)");
    cmd->add_option("--imax", f.imax, "highest level i")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--algo", f.algo, "counting algorithm")
        ->capture_default_str()
        ->check(CLI::IsMember({"auto", "lift", "stratified", "brute"}));
    cmd->add_option("--budget", f.budget, "brute-force step budget (default from IGUSA_BUDGET)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--workers", f.workers, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--guard", f.guard, "extra coefficients a reconstruction must predict")->capture_default_str();
    cmd->add_option("--nu-max", f.nu_max, "largest nu tried when peeling (1 - p^-nu t^N); 0 = 4n");
    cmd->add_option("--N-max", f.N_max, "largest N tried when peeling; 0 = 2n");
    f.o_max_num = cmd->add_option("--max-num", f.max_num, "numerator degree bound (with --max-den)");
    f.o_max_den = cmd->add_option("--max-den", f.max_den, "denominator degree bound (with --max-num)");
    f.o_horizon = cmd->add_option("--horizon", f.horizon, "index horizon for valuation checks");
    cmd->add_option("--out", f.out, "write JSON here instead of stdout");
    cmd->add_option("--csv", f.csv, "also write a CSV projection here");
}

JobConfig config_from(const Flags& f) {
    JobConfig cfg;
    cfg.poly = f.poly;
    cfg.p = f.p;
    if (*f.o_n) cfg.n = f.n;
    cfg.imax = f.imax;
    cfg.algorithm = algorithm_from_string(f.algo);
    if (f.o_all && *f.o_all) cfg.all_targets = f.all_targets;
    cfg.budget = f.budget;
    cfg.workers = f.workers;
    cfg.recon = {f.guard, f.nu_max, f.N_max};
    if (*f.o_max_num || *f.o_max_den) {
        if (!*f.o_max_num || !*f.o_max_den) throw std::invalid_argument("--max-num and --max-den go together");
        cfg.max_num_deg = f.max_num;
        cfg.max_den_deg = f.max_den;
    }
    if (*f.o_horizon) cfg.horizon = f.horizon;
    return cfg;
}

void check_prime_limit(std::uint64_t p) {
    if (p >= kMaxPrime) throw std::invalid_argument("p must be below " + std::to_string(kMaxPrime));
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream o(path, std::ios::binary);
    if (!o) throw std::runtime_error("cannot write " + path);
    o << text;
}

void emit(const json& doc, const Flags& f) {
    const std::string text = doc.dump(2) + "\n";
    if (f.out.empty())
        std::cout << text << std::flush;
    else
        write_text(f.out, text);
}

void emit_csv(const Flags& f, const std::vector<std::vector<std::string>>& rows) {
    if (f.csv.empty()) return;
    std::ostringstream s;
    for (const auto& r : rows) {
        for (std::size_t k = 0; k < r.size(); ++k) s << (k ? "," : "") << r[k];
        s << "\n";
    }
    write_text(f.csv, s.str());
}

std::string re_text(const PoleEntry& e) {
    if (e.exact) return e.exact->get_str();
    std::ostringstream s;
    s.precision(17);
    s << e.value;
    return s.str();
}

json header(const JobConfig& cfg, const Job& job) {
    return {{"poly", job.f.to_string()}, {"p", cfg.p}, {"n", job.n}, {"algorithm", std::string(to_string(cfg.algorithm))}};
}

// ---------------------------------------------------------------------------

int cmd_count(const Flags& f) {
    const JobConfig cfg = config_from(f);
    const Job job = resolve(cfg);
    const CountTable table = job_counts(cfg, job, cfg.imax, &g_cancel);
    json doc = to_json(table);
    doc["n"] = job.n;
    doc["algorithm"] = std::string(to_string(cfg.algorithm));
    emit(doc, f);
    std::vector<std::vector<std::string>> rows{{"level", "target", "count"}};
    for (const auto& [key, entry] : table.entries())
        rows.push_back({std::to_string(key.first), key.second.get_str(), entry.count.get_str()});
    emit_csv(f, rows);
    return table.complete() ? kExitOk : kExitInterrupted;
}

json analysis_document(const JobConfig& cfg, const Job& job, const ZetaAnalysis& a) {
    json doc = header(cfg, job);
    doc["complete"] = a.table.complete();
    json counts = json::array();
    for (const auto& m : a.table.zero_counts()) counts.push_back(to_json(m));
    doc["counts"] = counts;
    if (!a.table.complete()) return doc;
    doc["poincare"] = to_json(a.poincare);
    doc["zeta"] = series_document(a.zeta, a.function ? &*a.function : nullptr, a.function ? &a.poles : nullptr);
    if (a.function) doc["z_at_one"] = to_json(a.function->evaluate(1));
    if (a.error) doc["reconstruction_error"] = *a.error;
    return doc;
}

int cmd_zeta(const Flags& f) {
    const JobConfig cfg = config_from(f);
    const Job job = resolve(cfg);
    const ZetaAnalysis a = analyze_zeta(cfg, &g_cancel);
    emit(analysis_document(cfg, job, a), f);
    if (!a.table.complete()) return kExitInterrupted;
    std::vector<std::vector<std::string>> rows{{"i", "M_i", "P_i", "c_i"}};
    for (std::size_t i = 0; i < a.zeta.coeffs.size(); ++i)
        rows.push_back({std::to_string(i), a.table.zeros(static_cast<unsigned>(i)).get_str(),
                        a.poincare.coeffs[i].get_str(), a.zeta.coeffs[i].get_str()});
    emit_csv(f, rows);
    return a.function ? kExitOk : kExitError;
}

int cmd_poles(const Flags& f) {
    const JobConfig cfg = config_from(f);
    const Job job = resolve(cfg);
    const ZetaAnalysis a = analyze_zeta(cfg, &g_cancel);
    if (!a.table.complete()) {
        emit(analysis_document(cfg, job, a), f);
        return kExitInterrupted;
    }
    json doc = header(cfg, job);
    if (!a.function) {
        doc["error"] = {{"kind", "reconstruction"}, {"message", *a.error}};
        emit(doc, f);
        return kExitError;
    }
    const bool ok = check_min_pole_bound(a.poles, job.n);
    doc["poles"] = to_json(a.poles);
    doc["min_re"] = min_re_json(a.poles);
    doc["bound_ok"] = ok;
    emit(doc, f);
    std::vector<std::vector<std::string>> rows{{"re", "order", "shared", "exact"}};
    for (const auto& e : a.poles.poles)
        rows.push_back({re_text(e), std::to_string(e.order), e.shared ? "1" : "0", e.exact ? "1" : "0"});
    emit_csv(f, rows);
    return ok ? kExitOk : kExitVerify;
}

// ---------------------------------------------------------------------------
// verify

struct CheckResult {
    std::string status;  // pass, fail, skipped, inconclusive
    json detail = json::object();
};

unsigned all_target_levels(const Prime& p, unsigned imax) {
    constexpr unsigned long kTargetLimit = 1000;
    unsigned i = 0;
    while (i < imax && p.pow(i + 1) <= kTargetLimit) ++i;
    return std::max(i, 1u);
}

CheckResult check_t23(const JobConfig& cfg, const Job& job) {
    if (job.n < 2) return {"skipped", {{"reason", "theorem needs n > 1"}}};
    JobConfig c = cfg;
    c.all_targets = all_target_levels(job.p, cfg.imax);
    const CountTable table = job_counts(c, job, cfg.imax, &g_cancel);
    if (!table.complete()) throw Interrupted{};
    const auto r = verify_theorem23(table, job.n);
    json d = {{"checked", r.checked}, {"all_targets_upto", *c.all_targets}};
    if (r.counterexample)
        d["counterexample"] = {{"level", r.counterexample->level},
                               {"target", to_json(r.counterexample->target)},
                               {"count", to_json(r.counterexample->count)},
                               {"required", r.counterexample->required}};
    return {r.passed ? "pass" : "fail", d};
}

/// The minimum pole real part as a rational, or a reason it is unavailable.
std::variant<mpq_class, std::string> exact_l(const ZetaAnalysis& a) {
    if (!a.function) return "reconstruction failed: " + a.error.value_or("?");
    if (a.poles.empty()) return std::string("no poles");
    if (auto l = a.exact_l()) return *l;
    return std::string("minimum real part is not exact");
}

CheckResult check_valuation_bound(const JobConfig& cfg, const Job& job, const ZetaAnalysis& a) {
    const auto l = exact_l(a);
    if (auto* why = std::get_if<std::string>(&l)) return {"skipped", {{"reason", *why}}};
    const mpq_class& lq = std::get<mpq_class>(l);
    const unsigned horizon = cfg.horizon.value_or(cfg.imax);
    const auto b = check_valuation_lower_bound(a.table.zero_counts(), job.p, job.n, lq, horizon);
    return {b.stable ? "pass" : "fail", {{"l", to_json(lq)}, {"a", b.a}, {"stable", b.stable}, {"horizon", horizon}}};
}

CheckResult check_witness(const JobConfig& cfg, const Job& job, const ZetaAnalysis& a) {
    const auto l = exact_l(a);
    if (auto* why = std::get_if<std::string>(&l)) return {"skipped", {{"reason", *why}}};
    const mpq_class& lq = std::get<mpq_class>(l);
    const unsigned horizon = cfg.horizon.value_or(cfg.imax);
    const auto w = find_sharpness_witness(a.table.zero_counts(), job.p, job.n, lq, horizon);
    // a finite horizon can fail to exhibit a witness without refuting one
    if (!w) return {"inconclusive", {{"l", to_json(lq)}, {"horizon", horizon}}};
    return {"pass", {{"l", to_json(lq)}, {"R", w->R}, {"c", w->c}, {"a", w->a}, {"indices", w->verified_indices}}};
}

CheckResult check_poles(const Job& job, const ZetaAnalysis& a) {
    if (!a.function) return {"skipped", {{"reason", "reconstruction failed: " + a.error.value_or("?")}}};
    const bool ok = check_min_pole_bound(a.poles, job.n);
    return {ok ? "pass" : "fail", {{"min_re", min_re_json(a.poles)}}};
}

int cmd_verify(const Flags& f, const std::string& which, const std::string& corpus_path) {
    const JobConfig base = config_from(f);
    const bool want_t23 = which == "t23" || which == "all";
    const bool want_33 = which == "prop33" || which == "all";
    const bool want_34 = which == "prop34" || which == "all";
    const bool want_poles = which == "poles" || which == "all";
    const bool need_zeta = want_33 || want_34 || want_poles;

    std::vector<JobConfig> corpus = load_corpus(corpus_path, base);
    json items = json::array();
    std::vector<std::vector<std::string>> rows{{"item", "check", "status"}};
    bool failed = false;
    std::map<std::string, std::size_t> tally;
    auto partial = [&] {
        return json{{"corpus", corpus_path}, {"check", which}, {"complete", false}, {"items", items}};
    };

    for (const auto& cfg : corpus) {
        check_prime_limit(cfg.p);
        const Job job = resolve(cfg);
        json item = {{"name", cfg.label()}, {"poly", job.f.to_string()}, {"p", cfg.p}, {"n", job.n}};
        auto record = [&](const std::string& key, const CheckResult& r) {
            json entry = r.detail;
            entry["status"] = r.status;
            item[key] = entry;
            rows.push_back({cfg.label(), key, r.status});
            ++tally[r.status];
            failed = failed || r.status == "fail";
        };
        try {
            if (want_t23) record("t23", check_t23(cfg, job));
            if (need_zeta) {
                const ZetaAnalysis a = analyze_zeta(cfg, &g_cancel);
                if (!a.table.complete()) throw Interrupted{};
                if (want_33) record("prop33", check_valuation_bound(cfg, job, a));
                if (want_34) record("prop34", check_witness(cfg, job, a));
                if (want_poles) record("poles", check_poles(job, a));
            }
        } catch (const Interrupted&) {
            throw Interrupted{partial()};
        }
        items.push_back(item);
        check_cancel(partial());
    }
    json summary = json::object();
    for (const auto& [k, v] : tally) summary[k] = v;
    emit({{"corpus", corpus_path}, {"check", which}, {"complete", true}, {"items", items}, {"summary", summary},
          {"passed", !failed}},
         f);
    emit_csv(f, rows);
    return failed ? kExitVerify : kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_twist(const Flags& f, unsigned e, const std::vector<std::uint64_t>& exps, unsigned length) {
    JobConfig cfg = config_from(f);
    cfg.character = CharacterSpec{e, exps};
    const Job job = resolve(cfg);
    const UnitCharacter chi(job.p, e, exps);
    const unsigned L = length ? length : cfg.imax;
    const Counter counter = job_counter(job);

    json doc = header(cfg, job);
    doc.erase("algorithm");
    doc["character"] = to_json(chi);
    std::vector<CyclotomicInt> stream;
    json jstream = json::array();
    for (unsigned i = 0; i < L; ++i) {
        check_cancel([&] {
            json partial = doc;
            partial["complete"] = false;
            partial["stream"] = jstream;
            return partial;
        }());
        stream.push_back(twisted_coefficient(job.f, chi, i, counter));
        jstream.push_back(to_json(stream.back()));
    }
    doc["complete"] = true;
    doc["stream"] = jstream;

    const auto comps = component_series(stream, chi, job.n);
    const auto poles = twisted_pole_report(comps, job.p, job.n, cfg.recon);
    json jcomps = json::array();
    for (std::size_t k = 0; k < comps.size(); ++k) {
        const auto& F = poles.functions[k];
        jcomps.push_back(series_document(comps[k], F ? &*F : nullptr));
    }
    doc["components"] = jcomps;
    doc["poles"] = to_json(poles.combined);
    doc["min_re"] = min_re_json(poles.combined);
    doc["bound_ok"] = poles.bound_ok;
    doc["reconstruction_errors"] = poles.errors;

    bool ok = poles.bound_ok;
    if (job.n >= 2) {
        const auto div = verify_twisted_divisibility(stream, job.p, job.n, e, L);
        json jd = {{"passed", div.passed}, {"checked", div.checked}};
        if (div.first_failure)
            jd["first_failure"] = {{"index", div.first_failure->index},
                                   {"component", div.first_failure->component},
                                   {"value", to_json(div.first_failure->value)},
                                   {"required", div.first_failure->required}};
        doc["divisibility"] = jd;
        ok = ok && div.passed;
    } else {
        doc["divisibility"] = nullptr;
    }
    emit(doc, f);

    std::vector<std::vector<std::string>> rows{{"i", "component", "value"}};
    for (std::size_t i = 0; i < stream.size(); ++i)
        for (std::size_t k = 0; k < stream[i].coords().size(); ++k)
            rows.push_back({std::to_string(i), std::to_string(k), stream[i].coords()[k].get_str()});
    emit_csv(f, rows);
    return ok ? kExitOk : kExitVerify;
}

int cmd_bench(const Flags& f, unsigned repeats) {
    const JobConfig cfg = config_from(f);
    const Job job = resolve(cfg);
    const Algorithm algos[] = {Algorithm::brute_force, Algorithm::lift, Algorithm::stratified};
    json grid = json::array();
    std::vector<std::vector<std::string>> rows{{"level", "algorithm", "count", "seconds"}};
    bool agree = true;
    auto partial = [&] {
        json d = header(cfg, job);
        d.erase("algorithm");
        d["complete"] = false;
        d["grid"] = grid;
        return d;
    };
    for (unsigned i = 1; i <= cfg.imax; ++i) {
        std::optional<mpz_class> reference;
        json level = {{"level", i}};
        json runs = json::array();
        for (Algorithm algo : algos) {
            check_cancel(partial());
            json run = {{"algorithm", std::string(to_string(algo))}};
            try {
                mpz_class count;
                const auto t0 = std::chrono::steady_clock::now();
                for (unsigned r = 0; r < repeats; ++r) count = count_solutions(algo, job.f, job.p, i, 0, cfg.budget);
                const double secs =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / repeats;
                count *= job.p.pow(static_cast<unsigned long>(i) * job.extra_vars());
                if (!reference) reference = count;
                if (count != *reference) agree = false;
                run["count"] = to_json(count);
                run["seconds"] = secs;
                rows.push_back({std::to_string(i), run["algorithm"], count.get_str(), std::to_string(secs)});
            } catch (const BudgetExceeded& b) {
                run["refused"] = {{"kind", "budget"}, {"required", to_json(b.required())}, {"budget", b.budget()}};
                rows.push_back({std::to_string(i), run["algorithm"], "", ""});
            }
            runs.push_back(run);
        }
        level["runs"] = runs;
        level["agree"] = true;
        for (const auto& r : runs)
            if (r.contains("count") && reference && mpz_from_json(r["count"]) != *reference) level["agree"] = false;
        grid.push_back(level);
    }
    json doc = header(cfg, job);
    doc.erase("algorithm");
    doc["complete"] = true;
    doc["repeats"] = repeats;
    doc["grid"] = grid;
    doc["counts_agree"] = agree;
    emit(doc, f);
    emit_csv(f, rows);
    return agree ? kExitOk : kExitVerify;
}

void print_error(const std::string& kind, const std::string& message, json extra = json::object()) {
    extra["kind"] = kind;
    extra["message"] = message;
    std::cerr << json{{"error", extra}}.dump(2) << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact point counts modulo p^i, Igusa zeta functions and their poles"};
    app.require_subcommand(1);

    std::uint64_t budget = kDefaultBudget;
    try {
        budget = env_budget();
    } catch (const std::exception& e) {
        print_error("config", e.what());
        return kExitError;
    }
    Flags fc, fz, fp, fv, ft, fb;
    for (Flags* g : {&fc, &fz, &fp, &fv, &ft, &fb}) g->budget = budget;

    auto* count = app.add_subcommand("count", "table of M_i(u)");
    add_job_flags(count, fc, true);
    fc.o_all = count->add_option("--all-targets", fc.all_targets, "levels i <= K get every target u");

    auto* zeta = app.add_subcommand("zeta", "Poincare series, zeta coefficients and reconstruction");
    add_job_flags(zeta, fz, true);

    auto* poles = app.add_subcommand("poles", "pole real parts and the -n/2 bound");
    add_job_flags(poles, fp, true);

    auto* verify = app.add_subcommand("verify", "divisibility, valuation bound, witness and pole checks over a corpus");
    add_job_flags(verify, fv, false);
    std::string which = "all";
    std::string corpus_path = IGUSA_DEFAULT_CORPUS;
    verify->add_option("check", which, "t23 (half-dimension divisibility), prop33 (valuation lower bound), prop34 (sharpness witness), poles (-n/2 bound) or all")
        ->capture_default_str()
        ->check(CLI::IsMember({"t23", "prop33", "prop34", "poles", "all"}));
    verify->add_option("--corpus", corpus_path, "JSON list of job fragments")->capture_default_str();

    auto* twist = app.add_subcommand("twist", "character-twisted coefficients and poles");
    add_job_flags(twist, ft, true);
    unsigned e = 1, length = 0;
    std::string exps_text;
    twist->add_option("--e", e, "conductor exponent: chi is defined mod p^e")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    twist->add_option("--exps", exps_text, "exponents on the unit group generators, comma separated")->required();
    twist->add_option("--length", length, "number of coefficients T_0..T_{L-1} (default imax)");

    auto* bench = app.add_subcommand("bench", "brute force vs lift vs stratified timings");
    add_job_flags(bench, fb, true);
    unsigned repeats = 1;
    bench->add_option("--repeats", repeats, "runs per cell")->capture_default_str()->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& h) {
        return app.exit(h);
    } catch (const CLI::CallForAllHelp& h) {
        return app.exit(h);
    } catch (const CLI::ParseError& err) {
        print_error("usage", err.what());
        return kExitError;
    }

    std::signal(SIGINT, on_sigint);
    const Flags& f = *count ? fc : *zeta ? fz : *poles ? fp : *verify ? fv : *twist ? ft : fb;
    try {
        check_prime_limit(f.p);
        int rc = kExitError;
        if (*count) rc = cmd_count(f);
        if (*zeta) rc = cmd_zeta(f);
        if (*poles) rc = cmd_poles(f);
        if (rc == kExitInterrupted) print_error("interrupted", "stopped by SIGINT; partial results flushed");
        if (*count || *zeta || *poles) return rc;
        if (*verify) return cmd_verify(f, which, corpus_path);
        if (*twist) {
            std::vector<std::uint64_t> exps;
            std::stringstream s(exps_text);
            for (std::string tok; std::getline(s, tok, ',');) {
                std::size_t used = 0;
                exps.push_back(std::stoull(tok, &used));
                if (used != tok.size()) throw std::invalid_argument("bad exponent list: " + exps_text);
            }
            return cmd_twist(f, e, exps, length);
        }
        if (*bench) return cmd_bench(f, repeats);
    } catch (const Interrupted& i) {
        if (!i.partial.is_null()) emit(i.partial, f);
        print_error("interrupted", "stopped by SIGINT; partial results flushed");
        return kExitInterrupted;
    } catch (const BudgetExceeded& b) {
        print_error("budget", b.what(), {{"required", to_json(b.required())}, {"budget", b.budget()}});
        return kExitBudget;
    } catch (const ParseError& p) {
        print_error("parse", p.what(), {{"position", p.position()}});
        return kExitError;
    } catch (const json::exception& j) {
        print_error("json", j.what());
        return kExitError;
    } catch (const std::exception& x) {
        print_error("invalid", x.what());
        return kExitError;
    }
    return kExitError;
}
