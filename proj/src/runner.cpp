#include "qmt/runner.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace qmt {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string point_text(std::span<const double> p) {
    std::string out = "(";
    for (std::size_t i = 0; i < p.size(); ++i) out += (i ? ", " : "") + fmt_double(p[i]);
    return out + ")";
}

struct Session {
    RunConfig cfg;
    RunReport rep;
    std::optional<DomainDescription> pending_domain;
    std::vector<std::string> base_names;
    std::vector<Polynomial> pending_gens;
    std::optional<Rational> pending_ball;
    std::optional<TowerState> tower;
    int explore_count = 0;
    int certify_count = 0;

    void line(int idx, const std::string& head, const std::string& body) {
        rep.lines.push_back("[" + std::to_string(idx + 1) + "] " + head + " => " + body);
    }

    TowerState& need_tower() {
        if (!tower) {
            if (!pending_domain) throw std::runtime_error("no domain declared");
            tower = init_tower(*pending_domain, base_names, pending_gens, pending_ball, cfg.tol);
        }
        return *tower;
    }
};

std::string tower_summary(const TowerState& tw) {
    std::ostringstream out;
    out << "tower vars=" << tw.nvars() << " gens=" << tw.qmodule.size()
        << " mode=" << to_string(tw.mode)
        << " archimedean=" << (tw.witness.archimedean ? "yes" : "no");
    return out.str();
}

}  // namespace

std::string RunReport::text() const {
    std::ostringstream out;
    out << "qmtower run report v1\n";
    for (const auto& l : lines) out << l << "\n";
    out << "exit " << exit_code << "\n";
    return out.str();
}

RunReport run_script(const ProblemScript& script, const RunConfig& config) {
    Session ss;
    ss.cfg = config;
    ss.cfg.tol.seed = config.seed;
    ss.cfg.tol.variety_samples = config.samples;
    ss.rep.lines.push_back("script " + config.script_name);
    ss.rep.lines.push_back("seed " + std::to_string(config.seed));
    {
        std::ostringstream tl;
        tl << "tolerances zero=" << fmt_double(ss.cfg.tol.zero_tol)
           << " sign=" << fmt_double(ss.cfg.tol.sign_tol)
           << " neighborhood=" << fmt_double(ss.cfg.tol.neighborhood)
           << " rel=" << fmt_double(ss.cfg.tol.rel_tol)
           << " pos=" << fmt_double(ss.cfg.tol.pos_tol) << " delta=" << to_string(ss.cfg.delta)
           << " samples=" << ss.cfg.samples;
        ss.rep.lines.push_back(tl.str());
    }

    auto severity = [&](int code) {
        if (ss.rep.exit_code == 0) ss.rep.exit_code = code;
    };

    for (std::size_t i = 0; i < script.statements.size(); ++i) {
        const Statement& st = script.statements[i];
        try {
            switch (st.kind) {
                case Statement::Kind::Domain: {
                    DomainDescription dom;
                    dom.dim = st.var_names.size();
                    bool all_bounded = true;
                    std::vector<std::pair<Rational, Rational>> box;
                    for (const auto& r : st.ranges) {
                        if (r) box.push_back(*r);
                        else all_bounded = false;
                    }
                    if (all_bounded) {
                        dom.box = box;
                        dom.compact = true;
                    } else if (st.sample_box) {
                        dom.box = *st.sample_box;
                        dom.compact = false;
                    }
                    ss.pending_domain = dom;
                    ss.base_names = st.var_names;
                    std::ostringstream head;
                    head << "domain dim=" << dom.dim << " compact=" << (dom.compact ? 1 : 0)
                         << (dom.box ? "" : " (no sampling box)");
                    ss.line(static_cast<int>(i), "domain", head.str());
                    break;
                }
                case Statement::Kind::BaseGen: {
                    if (!ss.pending_domain) throw std::runtime_error("no domain declared");
                    Polynomial g = st.exprs[0];
                    ss.pending_gens.push_back(g);
                    ss.pending_domain->constraints.push_back(g);
                    ss.line(static_cast<int>(i), "base_gen",
                            "ok (" + std::to_string(ss.pending_gens.size()) + " generators)");
                    break;
                }
                case Statement::Kind::BallBound:
                    ss.pending_ball = st.rat_arg;
                    ss.line(static_cast<int>(i), "ball_bound", "ok N=" + to_string(*st.rat_arg));
                    break;
                case Statement::Kind::Adjoin: {
                    TowerState& tw = ss.need_tower();
                    bool force = st.flag || ss.cfg.force;
                    TowerState next = tw;
                    switch (st.adjoin_kind) {
                        case SymbolKind::OddRoot:
                            next = adjoin_odd_root(tw, st.name, st.exprs[0], st.int_arg);
                            break;
                        case SymbolKind::EvenRoot:
                            next = adjoin_even_root(tw, st.name, st.exprs[0], st.int_arg,
                                                    ss.cfg.tol);
                            break;
                        case SymbolKind::Reciprocal:
                            next = adjoin_reciprocal(tw, st.name, st.exprs[0], st.rat_arg,
                                                     ss.cfg.tol);
                            break;
                        case SymbolKind::Piecewise:
                            next = adjoin_piecewise(tw, st.name, st.exprs[0], st.exprs[1],
                                                    st.exprs[2],
                                                    st.mode_arg == "exact"
                                                        ? PiecewiseMode::Exact
                                                        : PiecewiseMode::Closure,
                                                    force, ss.cfg.tol);
                            break;
                        case SymbolKind::Characteristic:
                            next = adjoin_characteristic(tw, st.name, st.exprs[0],
                                                         st.mode_arg == "compact"
                                                             ? ChiVariant::CompactContinuous
                                                             : ChiVariant::GeneralClosure,
                                                         force, ss.cfg.tol);
                            break;
                        default:
                            next = adjoin_base_poly(tw, st.name, st.exprs[0]);
                            break;
                    }
                    std::string verdict;
                    if (next.notes.size() > tw.notes.size()) {
                        const std::string& last = next.notes.back();
                        if (last.find("regularity") != std::string::npos)
                            verdict = " [" + last + "]";
                    }
                    ss.tower = std::move(next);
                    ss.line(static_cast<int>(i), "adjoin " + st.name,
                            "ok mode=" + std::string(to_string(ss.tower->mode)) +
                                (force && st.adjoin_kind != SymbolKind::OddRoot ? " (force)" : "") +
                                verdict);
                    break;
                }
                case Statement::Kind::AddGen: {
                    TowerState& tw = ss.need_tower();
                    ss.tower = add_generator(tw, st.exprs[0], st.flag, Provenance::Manual,
                                             std::nullopt, ss.cfg.tol);
                    ss.line(static_cast<int>(i), "add_gen",
                            "ok gens=" + std::to_string(ss.tower->qmodule.size()) +
                                " mode=" + to_string(ss.tower->mode));
                    break;
                }
                case Statement::Kind::Hide: {
                    TowerState& tw = ss.need_tower();
                    ss.tower = hide_symbol(tw, st.name);
                    ss.line(static_cast<int>(i), "hide " + st.name, "ok");
                    break;
                }
                case Statement::Kind::Exclude: {
                    TowerState& tw = ss.need_tower();
                    ss.tower = exclude_point(tw, st.point, *st.rat_arg, ss.cfg.tol);
                    ss.line(static_cast<int>(i), "exclude", "ok separator added");
                    break;
                }
                case Statement::Kind::Explore: {
                    TowerState& tw = ss.need_tower();
                    int n = ss.cfg.samples_override.value_or(
                        st.samples.value_or(ss.cfg.samples));
                    double delta = to_double(ss.cfg.delta_override.value_or(
                        st.delta.value_or(ss.cfg.delta)));
                    std::uint64_t seed = st.seed.value_or(ss.cfg.seed);

                    PointCloud img = image_points(tw, sample_domain_with_switches(tw, n, seed));
                    img.seed = seed;
                    VarietyOptions vo;
                    vo.samples = n;
                    vo.seed = seed + 1;
                    vo.rel_tol = ss.cfg.tol.rel_tol;
                    vo.pos_tol = ss.cfg.tol.pos_tol;
                    PointCloud var = sample_variety(tw, vo);

                    ++ss.explore_count;
                    Presentation pr = presentation(tw);
                    std::string tag = std::to_string(ss.explore_count);
                    ss.rep.artifacts["image_" + tag + ".csv"] = to_csv(img, pr.names);
                    ss.rep.artifacts["variety_" + tag + ".csv"] = to_csv(var, pr.names);

                    if (var.size() == 0 || img.size() == 0) {
                        // An empty cloud is a coverage statement, never a
                        // proof of emptiness.
                        ss.line(static_cast<int>(i), "explore",
                                std::string("Undecided coverage (") +
                                    (var.size() == 0 ? "no variety points accepted"
                                                     : "no image points") +
                                    ") seed=" + std::to_string(seed));
                        break;
                    }
                    GapReport gap = compute_gap_report(img, var, delta);
                    ss.rep.artifacts["gap_" + tag + ".txt"] = gap.summary(pr.names);

                    std::ostringstream body;
                    body << (gap.verdict == GapReport::Verdict::ImageEqualsVariety
                                 ? "ImageEqualsVariety"
                                 : "GapDetected")
                         << " image=" << gap.image_size << " variety=" << gap.variety_size
                         << " spurious=" << gap.spurious.size() << " delta=" << fmt_double(delta)
                         << " seed=" << seed;
                    if (!gap.spurious.empty()) {
                        body << " top=" << point_text(gap.spurious[0].first)
                             << " dist=" << fmt_double(gap.spurious[0].second);
                    }
                    ss.line(static_cast<int>(i), "explore", body.str());
                    break;
                }
                case Statement::Kind::Certify: {
                    TowerState& tw = ss.need_tower();
                    Rational eps = ss.cfg.eps_override.value_or(*st.rat_arg);
                    int dmax = ss.cfg.dmax_override.value_or(st.int_arg);
                    CertifyOptions co;
                    co.tol = ss.cfg.tol;
                    CertifyResult res = certify_positivity(tw, st.exprs[0], eps, dmax, co);
                    ++ss.certify_count;
                    std::ostringstream body;
                    if (res.success) {
                        body << to_string(res.report.level)
                             << " degree=" << res.certificate->degree
                             << " residual=" << fmt_double(res.report.residual_norm)
                             << " eps=" << to_string(eps);
                        Presentation pr = presentation(tw);
                        ss.rep.artifacts["certificate_" + std::to_string(ss.certify_count) +
                                         ".txt"] =
                            certificate_to_text(*res.certificate, pr.names);
                    } else {
                        body << "Failure dmax=" << dmax
                             << " best_residual=" << fmt_double(res.best_residual) << " ("
                             << res.detail << ")";
                        severity(3);
                    }
                    ss.line(static_cast<int>(i), "certify", body.str());
                    break;
                }
                case Statement::Kind::Report: {
                    TowerState& tw = ss.need_tower();
                    ss.line(static_cast<int>(i), "report", tower_summary(tw));
                    auto nm = tw.names();
                    for (std::size_t k = 0; k < tw.qmodule.size(); ++k)
                        ss.rep.lines.push_back("    gen " + to_string(tw.qmodule[k].poly, nm) +
                                               " [" + to_string(tw.qmodule[k].prov) + "]");
                    for (std::size_t k = 0; k < tw.witness.vars.size(); ++k) {
                        const VarStatus& v = tw.witness.vars[k];
                        std::string s = v.kind == BoundKind::Integral  ? "integral"
                                        : v.kind == BoundKind::Bounded ? "bounded"
                                                                       : "unbounded";
                        if (v.kind == BoundKind::Bounded) s += " N=" + to_string(v.bound);
                        ss.rep.lines.push_back("    var " + nm[k] + " " + s);
                    }
                    break;
                }
            }
        } catch (const witness_error& e) {
            std::string msg(e.what());
            bool regularity = msg.find("regularity") != std::string::npos;
            ss.line(static_cast<int>(i),
                    "statement", std::string(regularity ? "regularity Fail" : "error") + ": " +
                                     msg + " witness=" + point_text(e.witness));
            severity(regularity ? 2 : 1);
            ss.rep.halted = true;
            break;
        } catch (const std::exception& e) {
            std::string msg(e.what());
            bool regularity = msg.find("regularity") != std::string::npos;
            ss.line(static_cast<int>(i), "statement",
                    std::string(regularity ? "regularity failure" : "error") + ": " + msg);
            severity(regularity ? 2 : 1);
            ss.rep.halted = true;
            break;
        }
    }

    if (ss.tower) {
        ss.rep.tower = ss.tower;
        ss.rep.artifacts["tower.txt"] = serialize(*ss.tower);
    }
    return ss.rep;
}

std::vector<std::string> emit_outputs(const RunReport& report, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<std::string> written;
    auto write = [&](const std::string& name, const std::string& content) {
        std::ofstream out(fs::path(dir) / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + name + " in " + dir);
        out << content;
        written.push_back(name);
    };
    write("report.txt", report.text());
    for (const auto& [name, content] : report.artifacts) write(name, content);
    return written;
}

void load_config_file(const std::string& path, RunConfig& config) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key=value");
        std::string key = line.substr(0, eq), value = line.substr(eq + 1);
        if (key == "seed") config.seed = std::stoull(value);
        else if (key == "samples") config.samples = std::stoi(value);
        else if (key == "delta") config.delta = *parse_rational(value);
        else if (key == "force") config.force = value == "1" || value == "true";
        else if (key == "eps") config.eps_override = *parse_rational(value);
        else if (key == "dmax") config.dmax_override = std::stoi(value);
        else if (key == "zero_tol") config.tol.zero_tol = std::stod(value);
        else if (key == "sign_tol") config.tol.sign_tol = std::stod(value);
        else if (key == "neighborhood") config.tol.neighborhood = std::stod(value);
        else if (key == "rel_tol") config.tol.rel_tol = std::stod(value);
        else if (key == "pos_tol") config.tol.pos_tol = std::stod(value);
        else throw std::runtime_error("config line " + std::to_string(lineno) + ": unknown key " + key);
    }
}

}  // namespace qmt
