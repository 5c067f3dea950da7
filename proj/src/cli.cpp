#include "mcensus/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "mcensus/census.hpp"
#include "mcensus/verify.hpp"

namespace mcensus::cli {

namespace {

struct RunConfig {
  std::uint64_t budget = kDefaultOracleBudget;
  std::uint64_t lift_budget = kDefaultLiftBudget;
  std::uint64_t tmp_budget = kDefaultTmpBudget;
  unsigned threads = 1;
};

std::string trim(std::string s) {
  auto const first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  auto const last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::uint64_t parse_u64(std::string const& text, std::string const& what) {
  std::uint64_t v = 0;
  auto const* b = text.data();
  auto const [ptr, ec] = std::from_chars(b, b + text.size(), v);
  if (ec != std::errc{} || ptr != b + text.size())
    throw ValidationError(what + " must be a non-negative integer, got \"" + text + "\"");
  return v;
}

/// key = value lines; '#' starts a comment. Only budgets and threads.
void load_config(std::string const& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path);
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (auto const hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto const eq = line.find('=');
    std::string const where = path + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw ValidationError(where + "expected key = value");
    auto const key = trim(line.substr(0, eq));
    auto const value = trim(line.substr(eq + 1));
    if (key == "budget")
      cfg.budget = parse_u64(value, where + "budget");
    else if (key == "lift_budget")
      cfg.lift_budget = parse_u64(value, where + "lift_budget");
    else if (key == "tmp_budget")
      cfg.tmp_budget = parse_u64(value, where + "tmp_budget");
    else if (key == "threads")
      cfg.threads = static_cast<unsigned>(parse_u64(value, where + "threads"));
    else
      throw ValidationError(where + "unknown key \"" + key + "\" (budget, lift_budget, tmp_budget, threads)");
  }
}

struct ModelFlags {
  std::string model = "demushkin";
  int d = 0;
  std::string q, kase, f;
  int e = 0;
  int d2 = 0;
  std::string q2, case2, f2;
  std::string name, file;
  unsigned p = 2;
};

void add_model_flags(CLI::App* app, ModelFlags& m) {
  app->add_option("--model", m.model, "demushkin|free|df|dd|preset|file")
      ->check(CLI::IsMember({"demushkin", "free", "df", "dd", "preset", "file"}));
  app->add_option("--d", m.d, "rank (of the Demushkin factor for df/dd)");
  app->add_option("--q", m.q, "q-invariant: a power of p or inf");
  app->add_option("--case", m.kase, "relator case D1..D4");
  app->add_option("--f", m.f, "2-adic parameter f >= 2 or inf");
  app->add_option("--e", m.e, "free rank of the df model");
  app->add_option("--d2", m.d2, "rank of the second dd factor");
  app->add_option("--q2", m.q2, "q-invariant of the second dd factor");
  app->add_option("--case2", m.case2, "case of the second dd factor");
  app->add_option("--f2", m.f2, "f of the second dd factor");
  app->add_option("--name", m.name, "preset name");
  app->add_option("--file", m.file, "presentation, relator data or Redei table (JSON)");
  app->add_option("--p", m.p, "prime");
}

std::optional<unsigned> parse_f(std::string const& text) {
  if (text.empty() || text == "inf") return std::nullopt;
  return static_cast<unsigned>(parse_u64(text, "f"));
}

DemushkinSpec build_spec(int d, std::string const& q, std::string const& kase, std::string const& f, unsigned p,
                         std::string const& label) {
  if (d <= 0) throw ValidationError(label + "rank must be given and positive");
  DemushkinSpec s;
  s.d = d;
  s.f = parse_f(f);
  std::optional<DemushkinCase> c;
  if (!kase.empty()) c = parse_demushkin_case(kase);
  if (!q.empty()) {
    s.q = QInvariant::parse(q, p);
  } else if (c && *c != DemushkinCase::D1) {
    s.q = QInvariant::finite(1);
  } else {
    throw ValidationError(label + "q-invariant must be given (a power of p or inf)");
  }
  if (c)
    s.kind = *c;
  else if (s.q.is_two(p))
    s.kind = d % 2 ? DemushkinCase::D2 : DemushkinCase::D3;
  else
    s.kind = DemushkinCase::D1;
  s.validate(p);
  return s;
}

/// A counting model where one exists, plus the presentation used by the oracle.
struct ModelInput {
  std::optional<GroupModel> model;
  Presentation pres;
  Json description;
  std::string name;
};

ModelInput resolve_model(ModelFlags const& m) {
  require_prime(m.p);
  auto from_model = [&](GroupModel g) {
    validate_model(g, m.p);
    auto pres = model_presentation(g, m.p);
    auto desc = model_to_json(g, m.p);
    auto name = model_name(g, m.p);
    return ModelInput{std::move(g), std::move(pres), std::move(desc), std::move(name)};
  };
  if (m.model == "demushkin") return from_model(DemushkinModel{build_spec(m.d, m.q, m.kase, m.f, m.p, "")});
  if (m.model == "free") {
    if (m.d <= 0) throw ValidationError("free model needs --d >= 1");
    return from_model(FreeModel{m.d});
  }
  if (m.model == "df") {
    if (m.e <= 0) throw ValidationError("df model needs --e >= 1");
    return from_model(FreeProductDFModel{build_spec(m.d, m.q, m.kase, m.f, m.p, "Demushkin factor: "), m.e});
  }
  if (m.model == "dd")
    return from_model(FreeProductDDModel{build_spec(m.d, m.q, m.kase, m.f, m.p, "first factor: "),
                                         build_spec(m.d2, m.q2, m.case2, m.f2, m.p, "second factor: ")});
  if (m.model == "preset") {
    if (m.name.empty()) throw ValidationError("preset model needs --name (one of: " + [] {
                          std::string s;
                          for (auto const& n : preset_names()) s += (s.empty() ? "" : ", ") + n;
                          return s;
                        }() + ")");
    auto pre = preset(m.name);
    Json desc = {{"type", "preset"}, {"name", m.name}};
    std::optional<GroupModel> g;
    if (pre.relator_data) g = SThreeModel{*pre.relator_data, m.name};
    return ModelInput{std::move(g), std::move(pre.presentation), std::move(desc), m.name};
  }
  // file
  if (m.file.empty()) throw ValidationError("file model needs --file");
  auto const doc = PositionedJson::load_file(m.file);
  auto const& root = doc.root();
  std::string const stem = m.file.substr(m.file.find_last_of('/') + 1);
  if (root.is_object() && root.contains("primes")) {
    GroupModel g = SThreeModel{redei_relator_data(doc), stem};
    auto in = from_model(g);
    in.description = {{"type", "redei"}, {"file", m.file}, {"relator_data", std::get<SThreeModel>(g).data.to_json()}};
    return in;
  }
  if (root.is_object() && root.contains("n")) {
    auto data = RamifiedRelatorData::from_json(doc, m.p);
    if (data.modulus() != m.p)
      throw ValidationError("relator data is over F_" + std::to_string(data.modulus()) + " but --p is " +
                            std::to_string(m.p));
    GroupModel g = SThreeModel{data, stem};
    auto in = from_model(g);
    in.description = {{"type", "relator_data"}, {"file", m.file}, {"relator_data", data.to_json()}};
    return in;
  }
  auto pres = Presentation::from_json(doc);
  Json desc = {{"type", "presentation"}, {"file", m.file}, {"presentation", pres.to_json()}};
  std::string name = pres.name().empty() ? stem : pres.name();
  return ModelInput{std::nullopt, std::move(pres), std::move(desc), std::move(name)};
}

struct Common {
  bool json = false;
  bool csv = false;
  bool verbose = false;
  std::string config;
  std::optional<std::uint64_t> budget, tmp_budget, lift_budget;
  std::optional<unsigned> threads;
};

RunConfig effective_config(Common const& c) {
  RunConfig cfg;
  if (!c.config.empty()) load_config(c.config, cfg);
  if (c.budget) cfg.budget = *c.budget;
  if (c.tmp_budget) cfg.tmp_budget = *c.tmp_budget;
  if (c.lift_budget) cfg.lift_budget = *c.lift_budget;
  if (c.threads) cfg.threads = *c.threads;
  cfg.threads = threads_from_environment(cfg.threads);
  return cfg;
}

CensusOptions census_options(RunConfig const& cfg, bool verbose) {
  CensusOptions o;
  o.oracle.budget = cfg.budget;
  o.oracle.threads = cfg.threads;
  o.oracle.progress = verbose;
  o.tmp.budget = cfg.tmp_budget;
  o.tmp.threads = cfg.threads;
  return o;
}

/// Oracle report for inputs without a counting model (custom presentations,
/// and presets whose presentation differs from their reduced relator data).
CensusReport oracle_report(ModelInput const& in, unsigned p, int target, CensusOptions const& opts) {
  if (target < 2 || target > 4) throw ValidationError("target must be 2, 3 or 4, got " + std::to_string(target));
  auto const start = std::chrono::steady_clock::now();
  CensusReport r;
  r.model = in.description;
  r.model_name = in.name;
  r.p = p;
  r.target = target;
  r.method = EpiMethod::oracle;
  r.epi = count_epi_bruteforce(in.pres, target, p, opts.oracle);
  auto const aut = aut_order(target, p);
  if (r.epi % aut != 0) throw ConsistencyError("|Epi| = " + r.epi.str() + " is not divisible by |Aut| = " + aut.str());
  r.nu = r.epi / aut;
  r.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

CensusReport census(ModelInput const& in, unsigned p, int target, EpiMethod method, CensusOptions const& opts) {
  bool const custom_words = !std::holds_alternative<DemushkinTag>(in.pres.tag()) &&
                            !std::holds_alternative<FreeTag>(in.pres.tag()) &&
                            !std::holds_alternative<FreeProductTag>(in.pres.tag());
  if (method == EpiMethod::oracle && (custom_words || !in.model)) return oracle_report(in, p, target, opts);
  if (!in.model)
    throw ValidationError("input \"" + in.name + "\" has no closed-form model; use --method oracle");
  auto r = nu_extensions(*in.model, p, target, method, opts);
  r.model = in.description;
  r.model_name = in.name;
  return r;
}

void emit(std::ostream& out, Json const& j) { out << j.dump(2) << '\n'; }

std::string vector_text(FpVector const& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.dim(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + ")";
}

Json vector_json(FpVector const& v) {
  Json a = Json::array();
  for (std::size_t i = 0; i < v.dim(); ++i) a.push_back(v[i]);
  return a;
}

std::vector<FpVector> parse_chars(std::string const& text, int rank, unsigned p) {
  std::vector<FpVector> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    std::vector<std::uint8_t> entries;
    std::stringstream vs(trim(item));
    std::string cell;
    while (std::getline(vs, cell, ',')) {
      auto const v = parse_u64(trim(cell), "character entry");
      if (v >= p) throw ValidationError("character entry " + std::to_string(v) + " is not reduced mod p");
      entries.push_back(static_cast<std::uint8_t>(v));
    }
    if (static_cast<int>(entries.size()) != rank)
      throw ValidationError("character \"" + trim(item) + "\" has " + std::to_string(entries.size()) +
                            " entries; the group has rank " + std::to_string(rank));
    out.emplace_back(std::move(entries), p);
  }
  if (out.size() < 2) throw ValidationError("--chars needs at least two characters separated by ';'");
  return out;
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Counts epimorphisms onto U_n(F_p) and Galois U_n-extensions", "massey-census"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_flag("--json", common.json, "machine-readable errors on stdout");
    sub->add_flag("--csv", common.csv, "CSV output where supported");
    sub->add_flag("--verbose,-v", common.verbose, "progress on stderr");
    sub->add_option("--config", common.config, "key=value file: budget, lift_budget, tmp_budget, threads");
    sub->add_option("--budget", common.budget, "oracle state-space budget");
    sub->add_option("--tmp-budget", common.tmp_budget, "TMP enumeration budget");
    sub->add_option("--lift-budget", common.lift_budget, "lift-count budget");
    sub->add_option("--threads", common.threads, "worker threads (MASSEY_CENSUS_THREADS overrides)");
  };

  ModelFlags mf;
  int target = 4;
  std::string method = "formula";

  auto* epi = app.add_subcommand("count-epi", "|Epi(G, U_n(F_p))| and nu");
  add_model_flags(epi, mf);
  epi->add_option("--target", target, "n in U_n, 2..4");
  epi->add_option("--method", method, "formula|oracle|tmp-sum");
  add_common(epi);

  int degree = 0;
  std::string local_q;
  auto* ext = app.add_subcommand("count-extensions", "nu(K, U_n(F_p)) for a local field K");
  ext->add_option("--local-degree", degree, "[K : Q_p]")->required();
  ext->add_option("--p", mf.p, "prime");
  ext->add_option("--q", local_q, "q-invariant of K (a power of p or inf)")->required();
  ext->add_option("--target", target, "n in U_n, 2..4");
  ext->add_option("--method", method, "formula|oracle|tmp-sum");
  add_common(ext);

  bool list = false;
  auto* tmp = app.add_subcommand("tmp", "triple Massey products with vanishing cups");
  add_model_flags(tmp, mf);
  tmp->add_flag("--list", list, "print every triple");
  add_common(tmp);

  std::string cls = "any";
  auto* z1 = app.add_subcommand("z1", "cocycle count for an image class");
  add_model_flags(z1, mf);
  z1->add_option("--class", cls, "central|noncentral|any|comma list per factor");
  add_common(z1);

  std::string chars;
  int k = 0;
  auto* massey = app.add_subcommand("massey", "definedness of Massey products");
  add_model_flags(massey, mf);
  massey->add_option("--chars", chars, "characters \"a,b,c;d,e,f;...\"");
  massey->add_option("--k", k, "run the cup-defining check for k-fold products");
  add_common(massey);

  std::string suite = "desk";
  auto* verify = app.add_subcommand("verify", "acceptance grid");
  verify->add_option("--suite", suite, "desk|extended")->check(CLI::IsMember({"desk", "extended"}));
  add_common(verify);

  auto fail = [&](int code, std::string const& kind, std::string const& msg, Json extra = {}) {
    if (common.json) {
      Json j = {{"error", msg}, {"kind", kind}, {"exit_code", code}};
      if (!extra.is_null()) j.update(extra);
      emit(out, j);
    } else {
      err << "massey-census: " << kind << " error: " << msg << '\n';
    }
    return code;
  };

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (CLI::CallForHelp const&) {
    out << app.help();
    return kOk;
  } catch (CLI::ParseError const& e) {
    common.json = std::find(args.begin(), args.end(), "--json") != args.end();
    return fail(kValidation, "usage", e.what());
  }

  try {
    auto const cfg = effective_config(common);
    auto const opts = census_options(cfg, common.verbose);

    if (epi->parsed()) {
      auto const in = resolve_model(mf);
      auto const r = census(in, mf.p, target, parse_epi_method(method), opts);
      if (common.csv)
        out << CensusReport::csv_header() << '\n' << r.csv_row() << '\n';
      else
        emit(out, r.to_json());
      return kOk;
    }

    if (ext->parsed()) {
      require_prime(mf.p);
      if (degree < 1) throw ValidationError("--local-degree must be at least 1");
      auto const q = QInvariant::parse(local_q, mf.p);
      auto const spec = local_field_model(degree, mf.p, q);
      auto r = nu_extensions(DemushkinModel{spec}, mf.p, target, parse_epi_method(method), opts);
      if (common.csv) {
        out << CensusReport::csv_header() << '\n' << r.csv_row() << '\n';
        return kOk;
      }
      auto j = r.to_json();
      j["local_degree"] = degree;
      j["q"] = q.to_string(mf.p);
      if (target >= 2 && target <= 4) {
        auto const closed = local_nu_formula(degree, mf.p, q, target);
        j["local_formula"] = closed.str();
        if (r.nu && *r.nu != closed)
          return fail(kVerification, "consistency",
                      "local formula " + closed.str() + " disagrees with model count " + r.nu->str());
      }
      emit(out, j);
      return kOk;
    }

    if (tmp->parsed()) {
      auto const in = resolve_model(mf);
      if (!in.model) throw ValidationError("tmp needs a model with a cup-product description");
      TmpOptions to = opts.tmp;
      to.list = list;
      auto const t = tmp_enumerate(*in.model, mf.p, to);
      Json j = {{"model", in.description}, {"p", mf.p}, {"tmp", std::to_string(t.count)}};
      try {
        j["closed_form"] = tmp_closed(*in.model, mf.p).str();
      } catch (ValidationError const& e) {
        j["closed_form"] = nullptr;
        j["closed_form_note"] = e.what();
      }
      Json by = Json::object();
      for (auto const& [c, n] : t.by_class) by[image_class_name(c)] = std::to_string(n);
      j["by_class"] = by;
      if (list) {
        if (common.csv) {
          out << "x,y,z,class\n";
          for (auto const& tr : t.triples)
            out << '"' << vector_text(tr.x) << "\",\"" << vector_text(tr.y) << "\",\"" << vector_text(tr.z)
                << "\"," << image_class_name(classify_triple(*in.model, tr)) << '\n';
          return kOk;
        }
        Json arr = Json::array();
        for (auto const& tr : t.triples)
          arr.push_back({{"x", vector_json(tr.x)},
                         {"y", vector_json(tr.y)},
                         {"z", vector_json(tr.z)},
                         {"class", image_class_name(classify_triple(*in.model, tr))}});
        j["triples"] = std::move(arr);
      }
      emit(out, j);
      return kOk;
    }

    if (z1->parsed()) {
      auto const in = resolve_model(mf);
      if (!in.model) throw ValidationError("z1 needs a model with a cup-product description");
      auto const c = parse_image_class(cls);
      emit(out, {{"model", in.description},
                 {"p", mf.p},
                 {"class", image_class_name(c)},
                 {"z1", z1_closed(*in.model, mf.p, c).str()}});
      return kOk;
    }

    if (massey->parsed()) {
      auto const in = resolve_model(mf);
      if (chars.empty() == (k == 0)) throw ValidationError("massey needs exactly one of --chars and --k");
      OracleOptions search = opts.oracle;
      std::optional<CupStructure> cup;
      if (in.model)
        cup = model_cup(*in.model, mf.p);
      else if (!std::holds_alternative<CustomTag>(in.pres.tag()))
        cup = cup_structure(in.pres, mf.p);
      if (!chars.empty()) {
        auto const v = parse_chars(chars, in.pres.rank(), mf.p);
        bool cups_vanish = true;
        for (std::size_t i = 0; i + 1 < v.size(); ++i) {
          bool const zero = cup ? cup->vanishes(v[i], v[i + 1])
                                : complete_system_exists(in.pres, {v[i], v[i + 1]}, mf.p, search);
          cups_vanish = cups_vanish && zero;
        }
        bool const defined = massey_system_exists(in.pres, v, mf.p, search);
        Json cj = Json::array();
        for (auto const& c : v) cj.push_back(vector_json(c));
        emit(out, {{"model", in.description},
                   {"p", mf.p},
                   {"k", v.size()},
                   {"chars", cj},
                   {"cups_vanish", cups_vanish},
                   {"defined", defined}});
        return kOk;
      }
      if (!cup) throw ValidationError("--k needs a presentation with a known cup product");
      CupDefiningOptions co;
      co.search = search;
      auto const rep = cup_defining_check(in.pres, *cup, mf.p, k, co);
      Json failures = Json::array();
      for (auto const& tuple : rep.failures) {
        Json t = Json::array();
        for (auto const& c : tuple) t.push_back(vector_json(c));
        failures.push_back(std::move(t));
      }
      emit(out, {{"model", in.description},
                 {"p", mf.p},
                 {"k", k},
                 {"exhaustive", rep.exhaustive},
                 {"tuples_examined", std::to_string(rep.tuples_examined)},
                 {"failures", failures}});
      return kOk;
    }

    if (verify->parsed()) {
      VerifyOptions vo;
      vo.suite = suite;
      vo.progress = common.verbose;
      std::ostream* live = (common.json || common.csv) ? nullptr : &out;
      auto const results = run_verify(vo, live);
      bool all = true;
      for (auto const& r : results) all = all && r.pass;
      if (common.csv) {
        out << "criterion,pass,exploratory,seconds,title,detail\n";
        for (auto const& r : results)
          out << r.id << ',' << (r.pass ? "true" : "false") << ',' << (r.exploratory ? "true" : "false") << ','
              << r.seconds << ",\"" << r.title << "\",\"" << r.detail << "\"\n";
      } else if (common.json) {
        Json arr = Json::array();
        for (auto const& r : results)
          arr.push_back({{"criterion", r.id},
                         {"title", r.title},
                         {"pass", r.pass},
                         {"exploratory", r.exploratory},
                         {"seconds", r.seconds},
                         {"detail", r.detail}});
        emit(out, {{"suite", suite}, {"pass", all}, {"results", arr}});
      } else {
        out << (all ? "all criteria passed" : "some criteria FAILED") << '\n';
      }
      return all ? kOk : kVerification;
    }
  } catch (BudgetError const& e) {
    return fail(kBudget, "budget", e.what(), {{"state_space", e.state_space().str()}});
  } catch (ValidationError const& e) {
    return fail(kValidation, "validation", e.what());
  } catch (ConsistencyError const& e) {
    return fail(kVerification, "consistency", e.what());
  }
  return kValidation;
}

}  // namespace mcensus::cli
