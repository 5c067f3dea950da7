#include "mcensus/presentation.hpp"

#include <algorithm>
#include <map>

namespace mcensus {

// ---------------------------------------------------------------- GroupWord

GroupWord GroupWord::gen(int index) {
  if (index < 1) throw ValidationError("generator index must be >= 1, got " + std::to_string(index));
  GroupWord w(Kind::gen);
  w.gen_ = index;
  return w;
}

GroupWord GroupWord::prod(std::vector<GroupWord> factors) {
  GroupWord w(Kind::prod);
  w.children_ = std::move(factors);
  return w;
}

GroupWord GroupWord::pow(GroupWord base, Exponent e) {
  GroupWord w(Kind::pow);
  w.children_.push_back(std::move(base));
  w.exp_ = e;
  return w;
}

GroupWord GroupWord::comm(GroupWord a, GroupWord b) {
  GroupWord w(Kind::comm);
  w.children_.push_back(std::move(a));
  w.children_.push_back(std::move(b));
  return w;
}

int GroupWord::max_generator() const {
  int m = kind_ == Kind::gen ? gen_ : 0;
  for (auto const& c : children_) m = std::max(m, c.max_generator());
  return m;
}

GroupWord GroupWord::shifted(int offset) const {
  GroupWord w = *this;
  if (w.kind_ == Kind::gen) w.gen_ += offset;
  for (auto& c : w.children_) c = c.shifted(offset);
  return w;
}

std::string GroupWord::to_string() const {
  switch (kind_) {
    case Kind::gen:
      return "x" + std::to_string(gen_);
    case Kind::prod: {
      if (children_.empty()) return "1";
      std::string s;
      for (std::size_t i = 0; i < children_.size(); ++i) {
        if (i) s += "*";
        s += children_[i].to_string();
      }
      return s;
    }
    case Kind::pow: {
      auto const& base = children_[0];
      std::string b = base.to_string();
      if (base.kind() == Kind::prod || base.kind() == Kind::pow) b = "(" + b + ")";
      return b + "^" + (exp_.is_infinite() ? std::string("(p^inf)") : std::to_string(exp_.value()));
    }
    case Kind::comm:
      return "[" + children_[0].to_string() + "," + children_[1].to_string() + "]";
  }
  return {};
}

Json GroupWord::to_json() const {
  switch (kind_) {
    case Kind::gen:
      return Json::array({"gen", gen_});
    case Kind::prod: {
      Json out = Json::array({"prod"});
      for (auto const& c : children_) out.push_back(c.to_json());
      return out;
    }
    case Kind::pow:
      return Json::array({"pow", children_[0].to_json(),
                          exp_.is_infinite() ? Json("p-inf") : Json(exp_.value())});
    case Kind::comm:
      return Json::array({"comm", children_[0].to_json(), children_[1].to_json()});
  }
  return {};
}

namespace {

Json const& at_pointer(PositionedJson const& doc, std::string const& pointer) {
  return doc.root().at(Json::json_pointer(pointer));
}

GroupWord parse_word(PositionedJson const& doc, std::string const& ptr, int rank) {
  Json const& node = at_pointer(doc, ptr);
  if (!node.is_array() || node.empty() || !node[0].is_string())
    doc.fail(ptr, "word must be an array starting with \"gen\", \"prod\", \"pow\" or \"comm\"");
  auto const tag = node[0].get<std::string>();
  auto child = [&](std::size_t i) { return ptr + "/" + std::to_string(i); };

  if (tag == "gen") {
    if (node.size() != 2 || !node[1].is_number_integer())
      doc.fail(ptr, "\"gen\" takes exactly one integer index");
    auto const i = node[1].get<std::int64_t>();
    if (i < 1 || (rank > 0 && i > rank))
      doc.fail(child(1), "generator index " + std::to_string(i) + " outside [1, " +
                             (rank > 0 ? std::to_string(rank) : std::string("rank")) + "]");
    return GroupWord::gen(static_cast<int>(i));
  }
  if (tag == "prod") {
    std::vector<GroupWord> factors;
    for (std::size_t i = 1; i < node.size(); ++i) factors.push_back(parse_word(doc, child(i), rank));
    return GroupWord::prod(std::move(factors));
  }
  if (tag == "pow") {
    if (node.size() != 3) doc.fail(ptr, "\"pow\" takes a word and an exponent");
    auto base = parse_word(doc, child(1), rank);
    Json const& e = node[2];
    if (e.is_string() && e.get<std::string>() == "p-inf")
      return GroupWord::pow(std::move(base), Exponent::p_infinity());
    if (e.is_number_unsigned() || (e.is_number_integer() && e.get<std::int64_t>() >= 0))
      return GroupWord::pow(std::move(base), Exponent::finite(e.get<std::uint64_t>()));
    doc.fail(child(2), "exponent must be a non-negative integer or \"p-inf\"");
  }
  if (tag == "comm") {
    if (node.size() != 3) doc.fail(ptr, "\"comm\" takes exactly two words");
    return GroupWord::comm(parse_word(doc, child(1), rank), parse_word(doc, child(2), rank));
  }
  doc.fail(child(0), "unknown word kind \"" + tag + "\"");
}

}  // namespace

GroupWord GroupWord::from_json(PositionedJson const& doc, std::string const& pointer) {
  return parse_word(doc, pointer, 0);
}

bool GroupWord::operator==(GroupWord const& rhs) const {
  return kind_ == rhs.kind_ && gen_ == rhs.gen_ && exp_ == rhs.exp_ && children_ == rhs.children_;
}

UniMatrix evaluate_word(GroupWord const& w, std::span<const UniMatrix> images) {
  if (images.empty()) throw ValidationError("evaluate_word needs at least one generator image");
  int const n = images[0].size();
  unsigned const p = images[0].modulus();
  switch (w.kind()) {
    case GroupWord::Kind::gen:
      if (w.generator() > static_cast<int>(images.size()))
        throw ValidationError("generator x" + std::to_string(w.generator()) + " has no image (only " +
                              std::to_string(images.size()) + " given)");
      return images[w.generator() - 1];
    case GroupWord::Kind::prod: {
      UniMatrix acc(n, p);
      for (auto const& c : w.children()) acc = group_mul(acc, evaluate_word(c, images));
      return acc;
    }
    case GroupWord::Kind::pow:
      return group_pow(evaluate_word(w.children()[0], images), w.exponent());
    case GroupWord::Kind::comm:
      return group_comm(evaluate_word(w.children()[0], images),
                        evaluate_word(w.children()[1], images));
  }
  throw ValidationError("corrupt word");
}

// ---------------------------------------------------------------- QInvariant

QInvariant QInvariant::finite(unsigned s) {
  if (s < 1) throw ValidationError("q = p^s needs s >= 1");
  return QInvariant(s);
}

QInvariant QInvariant::parse(std::string const& text, unsigned p) {
  require_prime(p);
  if (text == "inf" || text == "p-inf" || text == "0") return infinite();
  std::uint64_t q = 0;
  try {
    std::size_t used = 0;
    q = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
  } catch (std::exception const&) {
    throw ValidationError("q must be a power of p or \"inf\", got \"" + text + "\"");
  }
  unsigned s = 0;
  while (q > 1 && q % p == 0) {
    q /= p;
    ++s;
  }
  if (q != 1 || s == 0)
    throw ValidationError("q = " + text + " is not a positive power of p = " + std::to_string(p));
  return finite(s);
}

Exponent QInvariant::as_exponent(unsigned p) const {
  if (is_infinite()) return Exponent::p_infinity();
  return Exponent::finite(checked_pow(p, *s_));
}

std::string QInvariant::to_string(unsigned p) const {
  if (is_infinite()) return "inf";
  return mcensus::to_string(big_pow(p, *s_));
}

// ---------------------------------------------------------------- DemushkinSpec

std::string to_string(DemushkinCase c) {
  switch (c) {
    case DemushkinCase::D1: return "D1";
    case DemushkinCase::D2: return "D2";
    case DemushkinCase::D3: return "D3";
    case DemushkinCase::D4: return "D4";
  }
  return "?";
}

DemushkinCase parse_demushkin_case(std::string const& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::toupper(c); });
  if (t == "D1" || t == "1") return DemushkinCase::D1;
  if (t == "D2" || t == "2") return DemushkinCase::D2;
  if (t == "D3" || t == "3") return DemushkinCase::D3;
  if (t == "D4" || t == "4") return DemushkinCase::D4;
  throw ValidationError("unknown Demushkin case \"" + text + "\" (expected D1..D4)");
}

namespace {

// 2^f must stay well inside 64 bits once added to 2.
constexpr unsigned kMaxF = 60;

}  // namespace

void DemushkinSpec::validate(unsigned p) const {
  require_prime(p);
  auto const name = to_string(kind);
  auto fail = [&](std::string const& why) {
    throw ValidationError(name + " with d=" + std::to_string(d) + ", p=" + std::to_string(p) +
                          ", q=" + q.to_string(p) + ": " + why);
  };
  if (d < 1) fail("rank must be positive");
  if (f && *f > kMaxF) fail("f must be at most " + std::to_string(kMaxF) + " (or infinite)");
  if (f && *f < 2) fail("f must be >= 2");
  switch (kind) {
    case DemushkinCase::D1:
      if (q.is_two(p)) fail("D1 requires q != 2");
      if (d % 2) fail("D1 requires even d");
      if (!q.is_infinite()) (void)checked_pow(p, q.log_p());
      break;
    case DemushkinCase::D2:
      if (p != 2 || !q.is_two(p)) fail("D2 requires p = 2 and q = 2");
      if (d % 2 == 0 || d < 3) fail("D2 requires odd d >= 3");
      break;
    case DemushkinCase::D3:
      if (p != 2 || !q.is_two(p)) fail("D3 requires p = 2 and q = 2");
      if (d % 2) fail("D3 requires even d");
      break;
    case DemushkinCase::D4:
      if (p != 2 || !q.is_two(p)) fail("D4 requires p = 2 and q = 2");
      if (d % 2 || d < 4) fail("D4 requires even d >= 4");
      if (!f) fail("D4 requires a finite f >= 2");
      break;
  }
}

// ---------------------------------------------------------------- Presentation

Presentation::Presentation(int rank, std::vector<GroupWord> relators, PresentationTag tag,
                           std::string name)
    : rank_(rank), relators_(std::move(relators)), tag_(std::move(tag)), name_(std::move(name)) {
  if (rank < 1) throw ValidationError("presentation rank must be positive");
  for (std::size_t i = 0; i < relators_.size(); ++i)
    if (relators_[i].max_generator() > rank)
      throw ValidationError("relator " + std::to_string(i + 1) + " uses x" +
                            std::to_string(relators_[i].max_generator()) + " beyond rank " +
                            std::to_string(rank));
}

Json Presentation::to_json() const {
  Json out;
  out["rank"] = rank_;
  Json rels = Json::array();
  for (auto const& r : relators_) rels.push_back(r.to_json());
  out["relators"] = std::move(rels);
  if (!name_.empty()) out["name"] = name_;
  return out;
}

Presentation Presentation::from_json(PositionedJson const& doc) {
  Json const& root = doc.root();
  if (!root.is_object()) doc.fail("", "presentation must be a JSON object");
  if (!root.contains("rank") || !root["rank"].is_number_integer())
    doc.fail("", "presentation needs an integer \"rank\"");
  auto const rank = root["rank"].get<std::int64_t>();
  if (rank < 1 || rank > 64) doc.fail("/rank", "rank must be in [1, 64]");
  std::vector<GroupWord> relators;
  if (root.contains("relators")) {
    if (!root["relators"].is_array()) doc.fail("/relators", "\"relators\" must be an array");
    for (std::size_t i = 0; i < root["relators"].size(); ++i)
      relators.push_back(parse_word(doc, "/relators/" + std::to_string(i), static_cast<int>(rank)));
  }
  std::string name;
  if (root.contains("name")) {
    if (!root["name"].is_string()) doc.fail("/name", "\"name\" must be a string");
    name = root["name"].get<std::string>();
  }
  PresentationTag tag = CustomTag{};
  if (relators.empty()) tag = FreeTag{};
  return Presentation(static_cast<int>(rank), std::move(relators), std::move(tag), std::move(name));
}

Presentation Presentation::load_file(std::string const& path) {
  return from_json(PositionedJson::load_file(path));
}

namespace {

GroupWord x(int i) { return GroupWord::gen(i); }

void append_pairs(std::vector<GroupWord>& factors, int first, int d) {
  for (int i = first; i + 1 <= d; i += 2) factors.push_back(GroupWord::comm(x(i), x(i + 1)));
}

Exponent two_pow(std::optional<unsigned> f) {
  if (!f) return Exponent::p_infinity();
  return Exponent::finite(std::uint64_t{1} << *f);
}

}  // namespace

Presentation demushkin_presentation(DemushkinSpec const& spec, unsigned p) {
  spec.validate(p);
  int const d = spec.d;
  std::vector<GroupWord> factors;
  switch (spec.kind) {
    case DemushkinCase::D1:
      factors.push_back(GroupWord::pow(x(1), spec.q.as_exponent(p)));
      append_pairs(factors, 1, d);
      break;
    case DemushkinCase::D2:
      factors.push_back(GroupWord::pow(x(1), Exponent::finite(2)));
      factors.push_back(GroupWord::pow(x(2), two_pow(spec.f)));
      append_pairs(factors, 2, d);
      break;
    case DemushkinCase::D3: {
      std::uint64_t const e = spec.f ? 2 + (std::uint64_t{1} << *spec.f) : 2;
      factors.push_back(GroupWord::pow(x(1), Exponent::finite(e)));
      append_pairs(factors, 1, d);
      break;
    }
    case DemushkinCase::D4:
      factors.push_back(GroupWord::pow(x(1), Exponent::finite(2)));
      factors.push_back(GroupWord::comm(x(1), x(2)));
      factors.push_back(GroupWord::pow(x(3), two_pow(spec.f)));
      append_pairs(factors, 3, d);
      break;
  }
  std::string name = "demushkin-" + to_string(spec.kind) + "-d" + std::to_string(d) + "-q" +
                     spec.q.to_string(p);
  if (spec.kind != DemushkinCase::D1) name += "-f" + (spec.f ? std::to_string(*spec.f) : "inf");
  return Presentation(d, {GroupWord::prod(std::move(factors))}, DemushkinTag{spec}, name);
}

Presentation free_presentation(int rank) {
  return Presentation(rank, {}, FreeTag{}, "free-" + std::to_string(rank));
}

Presentation free_product(std::vector<Presentation> factors) {
  if (factors.empty()) throw ValidationError("free product of no factors");
  int rank = 0;
  std::vector<GroupWord> relators;
  std::string name;
  for (auto const& f : factors) {
    for (auto const& r : f.relators()) relators.push_back(r.shifted(rank));
    rank += f.rank();
    name += (name.empty() ? "" : "*") + (f.name().empty() ? std::string("G") : f.name());
  }
  return Presentation(rank, std::move(relators), FreeProductTag{std::move(factors)}, name);
}

// ---------------------------------------------------------------- RamifiedRelatorData

RamifiedRelatorData::RamifiedRelatorData(int n, int relator_count, unsigned p) : n_(n), p_(p) {
  require_prime(p);
  if (n < 2) throw ValidationError("relator data needs n >= 2");
  if (relator_count < 0) throw ValidationError("negative relator count");
  terms_.resize(static_cast<std::size_t>(relator_count));
}

void RamifiedRelatorData::check(int i, int j, int k, int m) const {
  if (!(1 <= i && i < j && j <= n_ && 1 <= k && k <= j))
    throw ValidationError("index (i,j,k) = (" + std::to_string(i) + "," + std::to_string(j) + "," +
                          std::to_string(k) + ") violates 1 <= i < j <= " + std::to_string(n_) +
                          ", 1 <= k <= j");
  if (m < 1 || m > relator_count())
    throw ValidationError("relator index m = " + std::to_string(m) + " outside [1, " +
                          std::to_string(relator_count()) + "]");
}

void RamifiedRelatorData::set(int i, int j, int k, int m, std::int64_t e) {
  check(i, j, k, m);
  auto r = e % static_cast<std::int64_t>(p_);
  if (r < 0) r += p_;
  auto& list = terms_[static_cast<std::size_t>(m - 1)];
  auto it = std::find_if(list.begin(), list.end(),
                         [&](Term const& t) { return t.i == i && t.j == j && t.k == k; });
  if (it != list.end()) list.erase(it);
  if (r) {
    list.push_back({i, j, k, static_cast<unsigned>(r)});
    std::sort(list.begin(), list.end(), [](Term const& a, Term const& b) {
      return std::tie(a.i, a.j, a.k) < std::tie(b.i, b.j, b.k);
    });
  }
}

unsigned RamifiedRelatorData::get(int i, int j, int k, int m) const {
  check(i, j, k, m);
  for (auto const& t : terms_[static_cast<std::size_t>(m - 1)])
    if (t.i == i && t.j == j && t.k == k) return t.e;
  return 0;
}

std::vector<RamifiedRelatorData::Term> const& RamifiedRelatorData::terms(int m) const {
  if (m < 1 || m > relator_count()) throw ValidationError("relator index out of range");
  return terms_[static_cast<std::size_t>(m - 1)];
}

Presentation RamifiedRelatorData::to_presentation(std::string name) const {
  std::vector<GroupWord> relators;
  for (auto const& list : terms_) {
    std::vector<GroupWord> factors;
    for (auto const& t : list) {
      auto c = GroupWord::comm(GroupWord::comm(x(t.i), x(t.j)), x(t.k));
      factors.push_back(t.e == 1 ? c : GroupWord::pow(c, Exponent::finite(t.e)));
    }
    relators.push_back(factors.size() == 1 ? factors[0] : GroupWord::prod(std::move(factors)));
  }
  PresentationTag tag = relators.empty() ? PresentationTag{FreeTag{}} : PresentationTag{CustomTag{}};
  return Presentation(n_, std::move(relators), std::move(tag), std::move(name));
}

namespace {

std::int64_t require_int(PositionedJson const& doc, std::string const& ptr, char const* what) {
  Json const& v = at_pointer(doc, ptr);
  if (!v.is_number_integer()) doc.fail(ptr, std::string(what) + " must be an integer");
  return v.get<std::int64_t>();
}

}  // namespace

RamifiedRelatorData RamifiedRelatorData::from_json(PositionedJson const& doc, unsigned default_p) {
  Json const& root = doc.root();
  if (!root.is_object()) doc.fail("", "relator data must be a JSON object");
  if (!root.contains("n")) doc.fail("", "relator data needs \"n\"");
  auto const n = require_int(doc, "/n", "\"n\"");
  if (n < 2 || n > 32) doc.fail("/n", "n must be in [2, 32]");
  unsigned p = default_p;
  if (root.contains("p")) {
    auto const pv = require_int(doc, "/p", "\"p\"");
    if (pv < 2 || pv > kMaxPrime || !is_prime(static_cast<unsigned>(pv))) doc.fail("/p", "p must be a small prime");
    p = static_cast<unsigned>(pv);
  }
  if (!root.contains("relators") || !root["relators"].is_array())
    doc.fail("", "relator data needs a \"relators\" array");
  auto const& rels = root["relators"];

  // Relators may be listed in any order; m defaults to the position.
  int count = 0;
  std::vector<int> ms;
  for (std::size_t r = 0; r < rels.size(); ++r) {
    auto const ptr = "/relators/" + std::to_string(r);
    if (!rels[r].is_object()) doc.fail(ptr, "relator entry must be an object");
    int m = static_cast<int>(r) + 1;
    if (rels[r].contains("m")) m = static_cast<int>(require_int(doc, ptr + "/m", "\"m\""));
    if (m < 1) doc.fail(ptr + "/m", "m must be >= 1");
    if (std::find(ms.begin(), ms.end(), m) != ms.end()) doc.fail(ptr + "/m", "duplicate relator index");
    ms.push_back(m);
    count = std::max(count, m);
  }
  RamifiedRelatorData data(static_cast<int>(n), count, p);
  for (std::size_t r = 0; r < rels.size(); ++r) {
    auto const ptr = "/relators/" + std::to_string(r);
    if (!rels[r].contains("terms") || !rels[r]["terms"].is_array())
      doc.fail(ptr, "relator entry needs a \"terms\" array");
    for (std::size_t t = 0; t < rels[r]["terms"].size(); ++t) {
      auto const tp = ptr + "/terms/" + std::to_string(t);
      if (!rels[r]["terms"][t].is_object()) doc.fail(tp, "term must be an object");
      for (char const* key : {"i", "j", "k"})
        if (!rels[r]["terms"][t].contains(key)) doc.fail(tp, std::string("term is missing \"") + key + "\"");
      auto const i = require_int(doc, tp + "/i", "\"i\"");
      auto const j = require_int(doc, tp + "/j", "\"j\"");
      auto const k = require_int(doc, tp + "/k", "\"k\"");
      std::int64_t e = 1;
      if (rels[r]["terms"][t].contains("e")) e = require_int(doc, tp + "/e", "\"e\"");
      try {
        data.set(static_cast<int>(i), static_cast<int>(j), static_cast<int>(k), ms[r], e);
      } catch (ValidationError const& ex) {
        doc.fail(tp, ex.what());
      }
    }
  }
  return data;
}

Json RamifiedRelatorData::to_json() const {
  Json out;
  out["n"] = n_;
  out["p"] = p_;
  Json rels = Json::array();
  for (std::size_t m = 0; m < terms_.size(); ++m) {
    Json terms = Json::array();
    for (auto const& t : terms_[m]) terms.push_back({{"i", t.i}, {"j", t.j}, {"k", t.k}, {"e", t.e}});
    rels.push_back({{"m", m + 1}, {"terms", std::move(terms)}});
  }
  out["relators"] = std::move(rels);
  return out;
}

// ---------------------------------------------------------------- presets

std::vector<std::string> preset_names() {
  return {"ram01", "borromean", "borromean3", "counterexample1"};
}

Preset preset(std::string const& name) {
  if (name == "ram01") {
    RamifiedRelatorData data(3, 0, 2);
    return {Presentation(3, {}, FreeTag{}, "ram01"), data};
  }
  if (name == "borromean") {
    RamifiedRelatorData data(3, 2, 2);
    data.set(2, 3, 1, 1, 1);
    data.set(1, 3, 2, 2, 1);
    return {data.to_presentation("borromean"), data};
  }
  if (name == "borromean3") {
    RamifiedRelatorData data(3, 3, 2);
    data.set(2, 3, 1, 1, 1);
    data.set(1, 3, 2, 2, 1);
    data.set(1, 3, 2, 3, 1);
    data.set(2, 3, 1, 3, 1);
    // The third relator is kept in its unreduced shape [[x1,x2],x3] so the
    // oracle can test the reduction independently of the e-tensor.
    auto reduced = data.to_presentation();
    auto rels = reduced.relators();
    rels[2] = GroupWord::comm(GroupWord::comm(x(1), x(2)), x(3));
    return {Presentation(3, std::move(rels), CustomTag{}, "borromean3"), data};
  }
  if (name == "counterexample1") {
    RamifiedRelatorData data(4, 1, 2);
    data.set(2, 3, 1, 1, 1);
    return {data.to_presentation("counterexample1"), data};
  }
  std::string known;
  for (auto const& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ValidationError("unknown preset \"" + name + "\" (known: " + known + ")");
}

}  // namespace mcensus
