#pragma once

// Command-line front end. `run` parses arguments, executes one subcommand and
// writes either a text summary or a JSON report.

#include <algorithm>
#include <chrono>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "engel/classify.hpp"
#include "engel/compactness.hpp"
#include "engel/coords.hpp"
#include "engel/liealg.hpp"
#include "engel/models.hpp"
#include "engel/report.hpp"

namespace engel::cli {

struct ParamFlags {
  std::string family;
  std::string a, b, t;
  bool symbolic = false;

  void attach(CLI::App* sub, bool require_case = true, bool with_symbolic = true) {
    auto* c = sub->add_option("--case", family, "family C1..C6");
    if (require_case) c->required();
    sub->add_option("--a", a, "rational P/Q");
    sub->add_option("--b", b, "rational P/Q");
    sub->add_option("--t", t, "circle parameter P/Q (C6)");
    if (with_symbolic) sub->add_flag("--symbolic", symbolic, "keep a, b symbolic");
  }

  bool numeric() const { return !a.empty() || !b.empty() || !t.empty(); }

  FamilyId id() const {
    if (symbolic && numeric()) throw usage_error("--symbolic cannot be combined with --a/--b/--t");
    FamilyId id = FamilyId::parse(family);
    if (!a.empty()) id.a = parse_rational(a);
    if (!b.empty()) id.b = parse_rational(b);
    if (!t.empty()) id.t = parse_rational(t);
    family_bindings(id);  // validates the combination
    return id;
  }

  // A full numeric point: a and b for C1..C5, b and t for C6.
  FamilyId point() const {
    FamilyId i = id();
    bool ok = i.n == 6 ? (i.b && i.t) : (i.a && i.b);
    if (!ok) throw usage_error(i.n == 6 ? "C6 needs --b and --t" : "this command needs --a and --b");
    return i;
  }

  void echo(nlohmann::ordered_json& in) const {
    if (!family.empty()) in["case"] = family;
    if (!a.empty()) in["a"] = a;
    if (!b.empty()) in["b"] = b;
    if (!t.empty()) in["t"] = t;
    if (symbolic) in["symbolic"] = true;
  }
};

inline nlohmann::json residue_list(const ConstraintSystem& cs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : cs.nonzero())
    arr.push_back({{"generator", kGenNames[r.generator]}, {"monomial", mask_name(r.monomial)}, {"value", r.value.str()}});
  return arr;
}

inline void cmd_verify_family(const ParamFlags& p, Report& rep) {
  FamilyId id = p.id();
  CoframeModel m = family_model(id);
  ConstraintSystem cs = d2_residues(m);
  rep.add("conjugation_closed", m.conjugation_closed());
  rep.add("d2_residues", cs.all_zero(),
          {{"family", id.name()}, {"checked", cs.residues.size()}, {"nonzero", residue_list(cs)}});
}

inline void cmd_residues(const std::string& path, Report& rep) {
  ModelFile mf = load_model_file(path);
  ConstraintSystem cs = d2_residues(from_constants(mf.constants));
  rep.add("d2_residues", cs.all_zero(), {{"residues", residues_to_json(cs)}, {"nonzero", cs.nonzero().size()}});
}

inline void cmd_relations(const ParamFlags& p, Report& rep) {
  DerivedRelations r = check_derived_relations(family(p.id()));
  rep.add("r2 = p1*q2 + p2 - q2", r.r2_holds(), {{"difference", r.r2_relation.str()}});
  rep.add("q1 + conj(q1) = 0", r.q1_holds(), {{"difference", r.q1_imaginary.str()}});
  rep.add("Im p2 = q0*(p1 + conj(p1) - 1)", r.im_p2_holds(), {{"difference", r.im_p2_relation.str()}});
}

inline RealLieAlgebra realified(const FamilyId& id, bool paper) {
  std::optional<Matrix2> pre;
  if (paper) pre = display_basis(id.n);
  return realify(family_model(id), family_bindings(id), pre);
}

inline void cmd_realify(const ParamFlags& p, const std::string& basis, Report& rep) {
  if (basis != "paper" && basis != "identity") throw usage_error("--basis must be 'paper' or 'identity'");
  RealLieAlgebra L = realified(p.point(), basis == "paper");
  rep.add("antisymmetric", L.antisymmetric());
  rep.add("jacobi", jacobi_check(L), {{"basis", basis}, {"brackets", L.brackets_json()}, {"text", L.str()}});
}

inline void cmd_classify_lie(const ParamFlags& p, Report& rep) {
  FamilyId id = p.point();
  RealLieAlgebra L = realified(id, false);
  if (!jacobi_check(L)) {
    rep.add("jacobi", false);
    return;
  }
  Fingerprint fp = invariants(L);
  LieType got = identify(fp);
  nlohmann::json payload = {{"type", to_string(got)}, {"fingerprint", fp.to_json()}, {"brackets", L.brackets_json()}};
  bool ok = true;
  if (id.n == 3) {
    auto want = c3_region_type(*id.a, *id.b);
    payload["expected"] = want ? nlohmann::json(to_string(*want)) : nlohmann::json(nullptr);
    ok = !want || *want == got;
  }
  if (id.n == 1) payload["c1_quotient_type"] = to_string(c1_quotient_type(*id.a, *id.b));
  rep.add("identify", ok, payload);
  rep.add("unimodular", true, {{"value", fp.unimodular}, {"basis_3forms_closed", basis_3forms_closed(L)}});
}

inline void cmd_obstruction(const ParamFlags& p, const std::string& witness, Report& rep) {
  FamilyId id = p.id();
  ObstructionReport o = obstruction(id, witness.empty() ? std::nullopt : std::optional<std::string>(witness));
  auto entry = obstruction_table(id.n);
  for (const auto& r : o.results) {
    nlohmann::json pl = {{"witness", r.witness}, {"factor", r.factor.str()}};
    if (!r.display.empty()) pl["display"] = r.display;
    rep.add("stokes_factor " + r.witness, r.display.empty() || r.matches_display, pl);
  }
  if (witness.empty() && entry && entry->locus)
    rep.add("vanishing_locus", o.locus_verified, {{"note", o.vanishing_locus_note}});
  else if (witness.empty())
    rep.add("vanishing_locus", true, {{"note", o.vanishing_locus_note}});
}

struct LatticeFlags {
  std::optional<long> m, n, m_min, m_max, n_min, n_max;
  long k = 0;
  long precision = 128;
};

inline void cmd_lattice(const LatticeFlags& f, Report& rep) {
  auto pick = [](const std::optional<long>& single, const std::optional<long>& bound, const char* what) {
    if (single && bound) throw usage_error(std::string("give either --") + what + " or a range, not both");
    if (single) return *single;
    if (!bound) throw usage_error(std::string("missing --") + what + " range");
    return *bound;
  };
  long m_lo = pick(f.m, f.m_min, "m"), m_hi = pick(f.m, f.m_max, "m");
  long n_lo = pick(f.n, f.n_min, "n"), n_hi = pick(f.n, f.n_max, "n");
  if (m_lo > m_hi || n_lo > n_hi) throw usage_error("empty search range");
  if (f.precision < 64) throw usage_error("precision must be at least 64 bits");
  LatticeSearchResult r = lattice_search(m_lo, m_hi, n_lo, n_hi, f.k, f.precision);
  for (const auto& c : r.certificates) {
    CertificateCheck ck = check_certificate(c);
    rep.add("certificate m=" + std::to_string(c.m) + " n=" + std::to_string(c.n), ck.all(),
            {{"certificate", c.to_json()}, {"verification", ck.to_json()}});
  }
  nlohmann::json rej = nlohmann::json::array();
  for (const auto& x : r.rejections) rej.push_back({{"m", x.m}, {"n", x.n}, {"reason", x.reason}});
  rep.add("search", true, {{"certificates", r.certificates.size()}, {"rejections", rej}});
}

inline void cmd_coords(const std::string& path, const ParamFlags& p, Report& rep) {
  Chart ch = load_chart_file(path);
  if (p.symbolic && p.numeric()) throw usage_error("--symbolic cannot be combined with --a/--b");
  if (!p.t.empty()) throw usage_error("coords-check takes --a and --b only");
  std::optional<std::string> fam;
  if (!p.family.empty()) fam = p.family;
  std::map<std::string, Scalar> extra;
  const auto& pt = parameter_table();
  if (!p.a.empty()) extra["a"] = Scalar(Gauss(parse_rational(p.a)), pt);
  if (!p.b.empty()) extra["b"] = Scalar(Gauss(parse_rational(p.b)), pt);
  if (p.symbolic) {
    ch.bindings.erase("a");
    ch.bindings.erase("b");
  }
  ChartCheck cc = check_chart(ch, fam, extra);
  nlohmann::json binds = nlohmann::json::object();
  for (const auto& [k, v] : cc.bindings) binds[k] = v.str();
  auto names = ch.names();
  for (int g = 0; g < 4; ++g)
    for (unsigned mask : {0b0011u, 0b0101u, 0b0110u, 0b1001u, 0b1010u, 0b1100u}) {
      const ChartResidue* hit = nullptr;
      for (const auto& r : cc.report.residues)
        if (r.generator == g && r.monomial == mask) hit = &r;
      if (!hit) continue;
      rep.add(std::string("d") + kGenNames[g] + " " + mask_name(mask, names), hit->verdict == Verdict::ZERO,
              {{"verdict", to_string(hit->verdict)}, {"residue", hit->value.str()}});
    }
  rep.add("local_model", cc.report.pass(),
          {{"family", cc.family}, {"bindings", binds}, {"coefficients_checked", cc.report.checked},
           {"comment", ch.comment}});
}

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Homogeneous complex Engel structures: verification toolkit", "engel"};
  app.require_subcommand(1);
  bool json = false, quiet = false, timing = false;
  app.add_flag("--json", json, "print a JSON report");
  app.add_flag("--quiet", quiet, "print nothing; exit code only");
  app.add_flag("--timing", timing, "record elapsed_ms in the report");

  ParamFlags pf;
  std::string model_file, chart_file, basis = "paper", witness;
  LatticeFlags lf;
  std::function<void(Report&)> action;

  auto* vf = app.add_subcommand("verify-family", "certify d^2 = 0 for a family");
  pf.attach(vf);
  vf->callback([&] { action = [&](Report& r) { cmd_verify_family(pf, r); }; });

  auto* rs = app.add_subcommand("residues", "d^2 residue system of a model file");
  rs->add_option("--model-file", model_file)->required();
  rs->callback([&] { action = [&](Report& r) { cmd_residues(model_file, r); }; });

  auto* rl = app.add_subcommand("relations", "derived relations on a family");
  pf.attach(rl);
  rl->callback([&] { action = [&](Report& r) { cmd_relations(pf, r); }; });

  auto* rf = app.add_subcommand("realify", "real Lie algebra at a parameter point");
  pf.attach(rf, true, false);
  rf->add_option("--basis", basis, "paper|identity");
  rf->callback([&] { action = [&](Report& r) { cmd_realify(pf, basis, r); }; });

  auto* cl = app.add_subcommand("classify-lie", "identify the realified algebra");
  pf.attach(cl, true, false);
  cl->callback([&] { action = [&](Report& r) { cmd_classify_lie(pf, r); }; });

  auto* ob = app.add_subcommand("obstruction", "Stokes obstruction factors");
  pf.attach(ob);
  ob->add_option("--witness", witness, "degree-3 monomial, e.g. w1^w2^w2bar");
  ob->callback([&] { action = [&](Report& r) { cmd_obstruction(pf, witness, r); }; });

  auto* ls = app.add_subcommand("lattice-search", "co-compact lattice candidates");
  ls->add_option("--m", lf.m);
  ls->add_option("--n", lf.n);
  ls->add_option("--m-min", lf.m_min);
  ls->add_option("--m-max", lf.m_max);
  ls->add_option("--n-min", lf.n_min);
  ls->add_option("--n-max", lf.n_max);
  ls->add_option("--k", lf.k);
  ls->add_option("--precision", lf.precision);
  ls->callback([&] { action = [&](Report& r) { cmd_lattice(lf, r); }; });

  auto* cc = app.add_subcommand("coords-check", "verify a coordinate chart");
  cc->add_option("--chart", chart_file)->required();
  pf.attach(cc, false);
  cc->callback([&] { action = [&](Report& r) { cmd_coords(chart_file, pf, r); }; });

  for (auto* s : app.get_subcommands({})) s->fallthrough();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  Report rep;
  rep.command = app.get_subcommands().front()->get_name();
  pf.echo(rep.inputs);
  if (!model_file.empty()) rep.inputs["model_file"] = model_file;
  if (!chart_file.empty()) rep.inputs["chart"] = chart_file;
  if (rep.command == "realify") rep.inputs["basis"] = basis;
  if (!witness.empty()) rep.inputs["witness"] = witness;
  if (rep.command == "lattice-search") {
    auto put = [&](const char* k, const std::optional<long>& v) {
      if (v) rep.inputs[k] = *v;
    };
    put("m", lf.m), put("n", lf.n), put("m_min", lf.m_min), put("m_max", lf.m_max);
    put("n_min", lf.n_min), put("n_max", lf.n_max);
    rep.inputs["k"] = lf.k;
    rep.inputs["precision"] = lf.precision;
  }

  auto t0 = std::chrono::steady_clock::now();
  try {
    action(rep);
  } catch (const usage_error& e) {
    rep.error = e.what();
  } catch (const std::exception& e) {
    rep.error = std::string("internal error: ") + e.what();
  }
  if (timing)
    rep.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  if (!quiet) {
    if (json)
      out << rep.to_json().dump(2) << "\n";
    else
      out << rep.text();
  }
  return rep.exit_code();
}

inline int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args), out, err);
}

}  // namespace engel::cli
