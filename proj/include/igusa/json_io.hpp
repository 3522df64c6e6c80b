#pragma once

// JSON documents for counts, series, rational functions, pole reports,
// characters and cyclotomic integers. Rationals are written as decimal
// string pairs ["num", "den"] so documents are bit-exact; big integers as
// decimal strings. Object keys come out sorted, so output is deterministic.

#include "igusa/characters.hpp"
#include "igusa/counting.hpp"
#include "igusa/series.hpp"

#include "json.hpp"

#include <gmpxx.h>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace igusa {

using json = nlohmann::json;

inline json to_json(const mpz_class& z) { return z.get_str(); }

inline mpz_class mpz_from_json(const json& j) {
    if (j.is_string()) return mpz_class(j.get<std::string>());
    if (j.is_number_integer()) return mpz_class(std::to_string(j.get<long long>()));
    throw std::invalid_argument("expected an integer or decimal string");
}

inline json to_json(const mpq_class& q) { return json::array({q.get_num().get_str(), q.get_den().get_str()}); }

inline mpq_class mpq_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw std::invalid_argument("rational must be a [num, den] pair");
    mpq_class q(mpz_from_json(j[0]), mpz_from_json(j[1]));
    if (q.get_den() == 0) throw std::invalid_argument("zero denominator");
    q.canonicalize();
    return q;
}

inline json to_json(const std::vector<mpq_class>& v) {
    json a = json::array();
    for (const auto& q : v) a.push_back(to_json(q));
    return a;
}

inline std::vector<mpq_class> mpq_vector_from_json(const json& j) {
    std::vector<mpq_class> v;
    for (const auto& e : j) v.push_back(mpq_from_json(e));
    return v;
}

inline json to_json(const QPoly& f) { return to_json(f.coeffs()); }
inline QPoly qpoly_from_json(const json& j) { return QPoly(mpq_vector_from_json(j)); }

inline json to_json(const DenominatorFactor& f) { return {{"nu", f.nu}, {"N", f.N}, {"mult", f.multiplicity}}; }

inline DenominatorFactor factor_from_json(const json& j) {
    return {j.at("nu").get<unsigned>(), j.at("N").get<unsigned>(), j.value("mult", 1u)};
}

inline json to_json(const PoleEntry& e) {
    json j = {{"order", e.order}, {"shared", e.shared}, {"exact", e.exact.has_value()}};
    if (e.exact)
        j["re"] = to_json(*e.exact);
    else
        j["re"] = e.value;
    return j;
}

inline json to_json(const PoleReport& r) {
    json a = json::array();
    for (const auto& e : r.poles) a.push_back(to_json(e));
    return a;
}

/// Minimum real part as a rational pair when exact, a float otherwise, null if there are no poles.
inline json min_re_json(const PoleReport& r) {
    if (r.empty()) return nullptr;
    return to_json(r.min_real_part())["re"];
}

inline json to_json(const RationalSeries& s) {
    return {{"p", s.p}, {"n", s.n}, {"coeffs", to_json(s.coeffs)}, {"provenance", s.provenance}};
}

inline RationalSeries series_from_json(const json& j) {
    RationalSeries s;
    s.p = j.at("p").get<std::uint64_t>();
    s.n = j.at("n").get<unsigned>();
    s.coeffs = mpq_vector_from_json(j.at("coeffs"));
    s.provenance = j.value("provenance", std::string{});
    return s;
}

inline void add_rational_function(json& j, const RationalFunction& F) {
    j["numerator"] = to_json(F.numerator);
    j["denominator"] = to_json(F.denominator);
    json fs = json::array();
    for (const auto& f : F.factors) fs.push_back(to_json(f));
    j["factors"] = fs;
    j["unfactored"] = to_json(F.unfactored);
}

/// Series document, optionally with its reconstruction and poles.
inline json series_document(const RationalSeries& s, const RationalFunction* F = nullptr,
                            const PoleReport* poles = nullptr) {
    json j = to_json(s);
    if (F) add_rational_function(j, *F);
    if (poles) j["poles"] = to_json(*poles);
    return j;
}

inline RationalFunction rational_function_from_json(const json& j) {
    RationalFunction F;
    F.numerator = qpoly_from_json(j.at("numerator"));
    F.denominator = qpoly_from_json(j.at("denominator"));
    if (j.contains("factors"))
        for (const auto& f : j.at("factors")) F.factors.push_back(factor_from_json(f));
    F.unfactored = j.contains("unfactored") ? qpoly_from_json(j.at("unfactored")) : F.denominator;
    return F;
}

inline json to_json(const CyclotomicInt& z) {
    json c = json::array();
    for (const auto& a : z.coords()) c.push_back(to_json(a));
    return {{"m", z.m()}, {"coords", c}};
}

inline CyclotomicInt cyclotomic_from_json(const json& j) {
    std::vector<mpz_class> coords;
    for (const auto& a : j.at("coords")) coords.push_back(mpz_from_json(a));
    return CyclotomicInt(j.at("m").get<unsigned>(), std::move(coords));
}

inline json to_json(const UnitCharacter& chi) {
    json gens = json::array();
    for (const auto& g : chi.group().generators()) gens.push_back({{"residue", g.residue}, {"order", g.order}});
    return {{"p", chi.prime().value()}, {"e", chi.conductor()}, {"gens", gens}, {"exps", chi.exponents()},
            {"m", chi.order()}};
}

inline UnitCharacter character_from_json(const json& j) {
    return UnitCharacter(Prime(j.at("p").get<std::uint64_t>()), j.at("e").get<unsigned>(),
                         j.at("exps").get<std::vector<std::uint64_t>>());
}

/// {"poly", "p", "n", "complete", "zeros": [M_0, ...], "targets": {"i": [M_i(0), ..., M_i(p^i - 1)]}}
inline json to_json(const CountTable& t) {
    json zeros = json::array();
    for (const auto& m : t.zero_counts()) zeros.push_back(to_json(m));
    json targets = json::object();
    unsigned max_level = 0;
    for (const auto& [key, entry] : t.entries()) max_level = std::max(max_level, key.first);
    for (unsigned i = 1; i <= max_level; ++i) {
        if (!t.level_complete(i)) continue;
        json row = json::array();
        const mpz_class modulus = t.prime().pow(i);
        for (mpz_class u = 0; u < modulus; ++u) row.push_back(to_json(*t.find(i, u)));
        targets[std::to_string(i)] = row;
    }
    return {{"poly", t.polynomial().to_string()}, {"p", t.prime().value()}, {"n", t.dimension()},
            {"complete", t.complete()}, {"zeros", zeros}, {"targets", targets}};
}

}  // namespace igusa
