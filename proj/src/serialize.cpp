#include <sstream>

#include "qmt/tower.hpp"

namespace qmt {

namespace {

std::string braced(const Polynomial& p, std::span<const std::string> names) {
    return "{" + to_string(p, names) + "}";
}

// Reads a {...} chunk starting at pos; advances pos past it.
std::string read_braced(const std::string& s, std::size_t& pos) {
    while (pos < s.size() && s[pos] == ' ') ++pos;
    if (pos >= s.size() || s[pos] != '{') throw std::runtime_error("expected '{' in tower file");
    std::size_t end = s.find('}', pos);
    if (end == std::string::npos) throw std::runtime_error("unterminated '{' in tower file");
    std::string out = s.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    return out;
}

TowerMode parse_mode(const std::string& s) {
    if (s == "exact") return TowerMode::Exact;
    if (s == "closure") return TowerMode::Closure;
    if (s == "unverified") return TowerMode::Unverified;
    throw std::runtime_error("unknown tower mode '" + s + "'");
}

Provenance parse_prov(const std::string& s) {
    if (s == "base") return Provenance::Base;
    if (s == "adjunction") return Provenance::Adjunction;
    if (s == "separator") return Provenance::Separator;
    if (s == "bound") return Provenance::Bound;
    if (s == "manual") return Provenance::Manual;
    throw std::runtime_error("unknown provenance '" + s + "'");
}

}  // namespace

std::string serialize(const TowerState& tw) {
    std::ostringstream out;
    auto nm = tw.names();
    std::vector<std::string> base_names(nm.begin(), nm.begin() + tw.domain.dim);

    out << "qmtower tower v1\n";
    out << "domain dim=" << tw.domain.dim << " compact=" << (tw.domain.compact ? 1 : 0) << "\n";
    if (tw.domain.box)
        for (const auto& [lo, hi] : *tw.domain.box)
            out << "box " << to_string(lo) << " " << to_string(hi) << "\n";

    for (std::size_t i = 0; i < tw.symbols.size(); ++i) {
        const auto& s = tw.symbols[i];
        std::vector<std::string> prior(nm.begin(), nm.begin() + i);
        out << "symbol " << s.name << " " << to_string(s.kind);
        switch (s.kind) {
            case SymbolKind::Base:
                break;
            case SymbolKind::BasePoly:
                out << " p=" << braced(s.g, prior);
                break;
            case SymbolKind::OddRoot:
            case SymbolKind::EvenRoot:
                out << " e=" << s.root_exp << " g=" << braced(s.g, prior);
                break;
            case SymbolKind::Reciprocal:
                out << " g=" << braced(s.g, prior);
                if (s.bound) out << " bound=" << to_string(*s.bound);
                break;
            case SymbolKind::Piecewise:
                out << " g=" << braced(s.g, prior) << " h=" << braced(s.h, prior)
                    << " q=" << braced(s.q, prior);
                break;
            case SymbolKind::Characteristic:
                out << " q=" << braced(s.q, prior);
                break;
        }
        if (!s.continuous) out << " discontinuous";
        if (!s.visible) out << " hidden";
        out << "\n";
    }
    for (const auto& g : tw.domain.constraints)
        out << "constraint " << braced(g, base_names) << "\n";
    for (const auto& r : tw.relations) out << "relation " << braced(r, nm) << "\n";
    for (const auto& g : tw.qmodule)
        out << "qgen " << braced(g.poly, nm) << " prov=" << to_string(g.prov)
            << " stage=" << g.stage << (g.note.empty() ? "" : " note={" + g.note + "}") << "\n";
    for (std::size_t i = 0; i < tw.witness.vars.size(); ++i) {
        const VarStatus& v = tw.witness.vars[i];
        out << "witness " << nm[i] << " ";
        switch (v.kind) {
            case BoundKind::Integral: out << "integral"; break;
            case BoundKind::Bounded: out << "bounded N=" << to_string(v.bound); break;
            case BoundKind::Unbounded: out << "unbounded"; break;
        }
        if (!v.via.empty()) out << " via={" << v.via << "}";
        out << "\n";
    }
    out << "archimedean " << (tw.witness.archimedean ? 1 : 0) << "\n";
    out << "mode " << to_string(tw.mode) << "\n";
    out << "modehist";
    for (TowerMode m : tw.mode_history) out << " " << to_string(m);
    out << "\n";
    for (const auto& n : tw.notes) out << "note {" << n << "}\n";
    out << "end\n";
    return out.str();
}

TowerState deserialize_tower(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "qmtower tower v1")
        throw std::runtime_error("not a qmtower tower file");

    TowerState tw;
    std::vector<std::string> names;
    std::vector<Polynomial> file_relations;
    bool saw_domain = false;
    std::vector<std::pair<Rational, Rational>> box;

    auto rational_of = [](const std::string& s) {
        auto q = parse_rational(s);
        if (!q) throw std::runtime_error("bad rational '" + s + "' in tower file");
        return *q;
    };

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "end") break;
        if (tag == "domain") {
            std::string f1, f2;
            ls >> f1 >> f2;
            tw.domain.dim = std::stoul(f1.substr(f1.find('=') + 1));
            tw.domain.compact = f2.substr(f2.find('=') + 1) == "1";
            saw_domain = true;
        } else if (tag == "box") {
            std::string lo, hi;
            ls >> lo >> hi;
            box.emplace_back(rational_of(lo), rational_of(hi));
        } else if (tag == "constraint") {
            std::size_t pos = line.find(' ');
            std::vector<std::string> base_names(names.begin(),
                                                names.begin() + tw.domain.dim);
            tw.domain.constraints.push_back(
                parse_polynomial(read_braced(line, ++pos), base_names));
        } else if (tag == "symbol") {
            FunctionSymbol s;
            std::string kind;
            ls >> s.name >> kind;
            auto grab = [&](const std::string& key) -> std::optional<std::string> {
                std::size_t at = line.find(" " + key + "=");
                if (at == std::string::npos) return std::nullopt;
                std::size_t p = at + key.size() + 2;
                if (p < line.size() && line[p] == '{') return read_braced(line, p);
                std::size_t end = line.find(' ', p);
                return line.substr(p, end == std::string::npos ? std::string::npos : end - p);
            };
            auto parse_prior = [&](const std::string& textp) {
                return parse_polynomial(textp, names);
            };
            if (kind == "base") s.kind = SymbolKind::Base;
            else if (kind == "poly") {
                s.kind = SymbolKind::BasePoly;
                s.g = parse_prior(*grab("p"));
            } else if (kind == "oddroot" || kind == "evenroot") {
                s.kind = kind == "oddroot" ? SymbolKind::OddRoot : SymbolKind::EvenRoot;
                s.root_exp = std::stoi(*grab("e"));
                s.g = parse_prior(*grab("g"));
            } else if (kind == "recip") {
                s.kind = SymbolKind::Reciprocal;
                s.g = parse_prior(*grab("g"));
                if (auto b = grab("bound")) s.bound = rational_of(*b);
            } else if (kind == "piecewise") {
                s.kind = SymbolKind::Piecewise;
                s.g = parse_prior(*grab("g"));
                s.h = parse_prior(*grab("h"));
                s.q = parse_prior(*grab("q"));
            } else if (kind == "chi") {
                s.kind = SymbolKind::Characteristic;
                s.q = parse_prior(*grab("q"));
            } else {
                throw std::runtime_error("unknown symbol kind '" + kind + "'");
            }
            s.continuous = line.find(" discontinuous") == std::string::npos;
            s.visible = line.find(" hidden") == std::string::npos;
            // Pad payloads to the full prior width.
            std::size_t width = names.size();
            s.g = s.g.nvars() ? s.g.extended(width) : Polynomial(width);
            s.h = s.h.nvars() ? s.h.extended(width) : Polynomial(width);
            s.q = s.q.nvars() ? s.q.extended(width) : Polynomial(width);
            tw.symbols.push_back(std::move(s));
            names.push_back(tw.symbols.back().name);
        } else if (tag == "qgen") {
            std::size_t pos = line.find(' ');
            ++pos;
            QmGenerator g;
            g.poly = parse_polynomial(read_braced(line, pos), names);
            std::size_t pa = line.find("prov=", pos);
            std::size_t ps = line.find("stage=", pos);
            g.prov = parse_prov(line.substr(pa + 5, line.find(' ', pa) - pa - 5));
            g.stage = std::stoi(line.substr(ps + 6));
            std::size_t pn = line.find("note={", pos);
            if (pn != std::string::npos) {
                std::size_t p = pn + 5;
                g.note = read_braced(line, p);
            }
            g.poly = g.poly.extended(names.size());
            tw.qmodule.push_back(std::move(g));
        } else if (tag == "relation") {
            std::size_t pos = line.find(' ');
            ++pos;
            // Stored for the reader; cross-checked against the rebuilt
            // relations below.
            file_relations.push_back(parse_polynomial(read_braced(line, pos), names));
        } else if (tag == "witness" || tag == "archimedean") {
            // Derived data; recomputed after loading.
        } else if (tag == "mode") {
            std::string m;
            ls >> m;
            tw.mode = parse_mode(m);
        } else if (tag == "modehist") {
            std::string m;
            while (ls >> m) tw.mode_history.push_back(parse_mode(m));
        } else if (tag == "note") {
            std::size_t pos = line.find(' ');
            ++pos;
            tw.notes.push_back(read_braced(line, pos));
        } else {
            throw std::runtime_error("unknown tower file line: " + line);
        }
    }
    if (!saw_domain) throw std::runtime_error("tower file has no domain line");
    if (!box.empty()) tw.domain.box = box;
    tw.domain.validate();

    // Rebuild derived state.
    std::vector<Polynomial> rels;
    for (std::size_t i = tw.domain.dim; i < tw.symbols.size(); ++i) {
        const auto& s = tw.symbols[i];
        bool payload_vis = true;
        auto check = [&](const Polynomial& p) {
            for (std::size_t k = 0; k < p.nvars(); ++k)
                if (p.uses_variable(k) && !tw.symbols[k].visible) payload_vis = false;
        };
        check(s.g);
        check(s.h);
        check(s.q);
        if (!s.visible || !payload_vis) continue;
        Polynomial f = Polynomial::variable(tw.symbols.size(), i);
        switch (s.kind) {
            case SymbolKind::BasePoly: rels.push_back(f - s.g.extended(tw.nvars())); break;
            case SymbolKind::OddRoot:
            case SymbolKind::EvenRoot:
                rels.push_back(f.pow(static_cast<unsigned>(s.root_exp)) -
                               s.g.extended(tw.nvars()));
                break;
            case SymbolKind::Reciprocal:
                rels.push_back(s.g.extended(tw.nvars()) * f -
                               Polynomial::constant(tw.nvars(), Rational(1)));
                break;
            case SymbolKind::Piecewise:
                rels.push_back((f - s.g.extended(tw.nvars())) * (f - s.h.extended(tw.nvars())));
                break;
            case SymbolKind::Characteristic: rels.push_back(f * f - f); break;
            case SymbolKind::Base: break;
        }
    }
    if (!file_relations.empty()) {
        // The file may carry extra relations beyond the per-symbol ones
        // (hand-assembled presentations); it must contain at least those.
        for (auto& r : file_relations) r = r.extended(tw.nvars());
        for (const auto& need : rels) {
            bool found = false;
            for (const auto& have : file_relations) found = found || have == need;
            if (!found)
                throw std::runtime_error("tower file is missing a symbol-defining relation");
        }
        rels = file_relations;
    }
    tw.relations = rels;
    if (rels.empty()) {
        tw.ideal.nvars = tw.nvars();
        tw.ideal.order = TermOrder::grevlex(tw.nvars());
    } else {
        tw.ideal = buchberger(rels, TermOrder::grevlex(tw.nvars()));
    }
    if (tw.mode_history.empty()) tw.mode_history.assign(tw.nvars(), tw.mode);
    tw.witness = archimedean_status(tw);
    return tw;
}

}  // namespace qmt
