#include "schottky/json_io.hpp"

#include <fstream>
#include <sstream>

#include "schottky/errors.hpp"

namespace schottky::json_io {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw InputError(path + ": " + what); }

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }
std::string at(const std::string& path, const char* key) { return path + "." + key; }

const Json& member(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path, std::string("missing key '") + key + "'");
  return *it;
}

const Json& array(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  return j;
}

Json encode_bools(const std::vector<bool>& v) {
  Json out = Json::array();
  for (bool b : v) out.push_back(b);
  return out;
}

template <class T>
Json encode_all(const std::vector<T>& xs) {
  Json out = Json::array();
  for (const auto& x : xs) out.push_back(encode(x));
  return out;
}

Json evidence_flags(const char* claim, const char* oracle) {
  Json j;
  j["claim"] = claim;
  j["evidence_only"] = true;
  j["trusted_oracle"] = oracle;
  return j;
}

}  // namespace

Json parse_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(source + ": byte " + std::to_string(e.byte) + ": malformed JSON");
  }
}

Json load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), path);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------- encoders

Json encode(const Rational& q) { return to_string(q); }
Json encode(const Integer& z) { return to_string(z); }

Json encode(const Vector& v) {
  Json out = Json::array();
  for (const auto& x : v) out.push_back(encode(x));
  return out;
}

Json encode(const Matrix& m) {
  Json out = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) out.push_back(encode(m.row(i)));
  return out;
}

Json encode(const exactlin::Place& place) {
  Json j;
  if (place.archimedean()) {
    j["kind"] = "arch";
  } else {
    j["kind"] = "padic";
    j["p"] = place.prime;
  }
  return j;
}

Json encode(const exactlin::ProjPoint& x) {
  Json out = Json::array();
  for (const auto& c : x.coords()) out.push_back(encode(c));
  return out;
}

Json encode(const exactlin::ProjHyperplane& h) {
  Json out = Json::array();
  for (const auto& c : h.functional()) out.push_back(encode(c));
  return Json{{"hyperplane", out}};
}

Json encode(const exactlin::ProjSubspace& l) {
  if (auto h = l.as_hyperplane(); h && l.ambient() > 2) return encode(*h);
  Json basis = Json::array();
  for (const auto& v : l.basis()) basis.push_back(encode(v));
  return Json{{"subspace", basis}};
}

Json encode(const exactlin::Center& c) {
  return std::visit(
      [](const auto& x) -> Json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, exactlin::ProjPoint>)
          return Json{{"point", encode(x)}};
        else
          return encode(x);
      },
      c);
}

Json encode(const exactlin::Ball& b) {
  Json j;
  j["center"] = encode(b.center);
  j["radius_sq"] = encode(b.radius_sq);
  return j;
}

Json encode(const exactlin::MFlag& f) {
  Json j;
  j["hyperplane"] = encode(f.hyperplane)["hyperplane"];
  j["point"] = encode(f.point);
  return j;
}

Json encode(const contraction::SingularGap& g) { return Json{{"lower", encode(g.lower)}, {"upper", encode(g.upper)}}; }

Json encode(const contraction::ContractionCertificate& c) {
  Json j;
  j["g"] = encode(c.g);
  j["place"] = encode(c.place);
  j["epsilon_sq"] = encode(c.epsilon_sq);
  j["attracting"] = encode(c.attracting);
  j["repelling"] = encode(c.repelling);
  j["gap"] = encode(c.gap);
  Json frame;
  frame["attracting"] = encode(c.frame.attracting);
  frame["attracting_err_sq"] = encode(c.frame.attracting_err_sq);
  frame["repelling"] = encode(c.frame.repelling);
  frame["repelling_err_sq"] = encode(c.frame.repelling_err_sq);
  j["frame"] = frame;
  return j;
}

Json encode(const contraction::ProximalityCertificate& c) {
  Json j;
  j["contraction"] = encode(c.base);
  j["r_sq"] = encode(c.r_sq);
  j["fixed_point_box"] = encode(c.canonical_point_box);
  j["fixed_hyperplane_box"] = encode(c.canonical_hyperplane_box);
  j["attracting"] = encode(c.attracting);
  j["repelling"] = encode(c.repelling);
  return j;
}

Json encode(const contraction::VeryProximalCertificate& c) {
  return Json{{"g", encode(c.g())}, {"forward", encode(c.forward)}, {"backward", encode(c.backward)}};
}

Json encode(const contraction::AuditReport& r) {
  Json j;
  j["samples"] = r.samples;
  j["outside_repelling"] = r.outside_repelling;
  j["violations"] = r.violations;
  return j;
}

Json encode(const pingpong::Word& w) { return w.to_string(); }

Json encode(const pingpong::PingPongTable& t) {
  Json j;
  j["place"] = encode(t.place);
  j["generators"] = encode_all(t.generators());
  j["certificates"] = encode_all(t.entries);
  return j;
}

Json encode(const pingpong::FreenessReport& r) {
  Json j;
  j["free"] = r.free;
  j["words_checked"] = r.words_checked;
  j["relation"] = r.relation ? encode(*r.relation) : Json(nullptr);
  return j;
}

Json encode(const pingpong::CosetHit& hit) {
  Json j;
  j["eta"] = encode(hit.eta);
  j["power"] = hit.power;
  j["ell"] = hit.ell;
  j["escape_candidates"] = hit.escape_candidates;
  Json ledger;
  ledger["gamma"] = encode(hit.ledger.gamma);
  ledger["conjugators"] = encode_all(hit.ledger.conjugators);
  ledger["exponents"] = hit.ledger.exponents;
  j["ledger"] = ledger;
  j["table"] = encode(hit.table);
  return j;
}

Json encode(const unischottky::SystemElement& e) {
  Json j;
  j["u"] = encode(e.u.u);
  j["p"] = encode(e.u.p);
  j["L"] = encode(e.u.L);
  j["epsilon_sq"] = encode(e.epsilon_sq);
  j["delta_sq"] = encode(e.delta_sq);
  return j;
}

Json encode(const unischottky::SchottkySystem& s) {
  Json j;
  j["elements"] = encode_all(s.elements);
  j["attracting"] = encode_all(s.attracting);
  j["repelling"] = encode_all(s.repelling);
  return j;
}

Json encode(const unischottky::SystemReport& r) {
  Json j;
  j["ok"] = r.ok;
  j["dynamics"] = r.dynamics;
  j["cross_disjoint"] = r.cross_disjoint;
  j["points_in_attracting"] = r.points_in_a;
  j["tubes_in_repelling"] = r.tubes_in_r;
  j["attracting_in_repelling"] = r.a_in_r;
  j["diagnostics"] = r.diagnostics;
  return j;
}

Json encode(const unischottky::ZSquaredCertificate& c) {
  Json j;
  j["u"] = encode(c.u);
  j["v"] = encode(c.v);
  j["commute"] = c.commute;
  j["products_vanish"] = c.products_vanish;
  j["nilparts_independent"] = c.nilparts_independent;
  j["valid"] = c.valid();
  return j;
}

Json encode(const unischottky::FreeProductReport& r) {
  Json j;
  j["injective"] = r.injective;
  j["words_checked"] = r.words_checked;
  Json rel = Json::array();
  for (const auto& [i, e] : r.relation) rel.push_back(Json::array({i, e}));
  j["relation"] = rel;
  return j;
}

Json encode(const congruence::ModMatrix& m) {
  Json out = Json::array();
  for (std::size_t i = 0; i < m.n; ++i) {
    Json row = Json::array();
    for (std::size_t k = 0; k < m.n; ++k) row.push_back(m(i, k));
    out.push_back(row);
  }
  return out;
}

Json encode(const congruence::CongruenceImage& img) {
  Json j;
  j["modulus"] = img.modulus;
  j["n"] = img.n;
  j["order"] = img.order;
  j["expected_order"] = encode(congruence::sl_order(img.n, img.modulus));
  j["complete"] = img.complete;
  j["surjective"] = img.surjective ? Json(*img.surjective) : Json(nullptr);
  j["generators_mod"] = encode_all(img.generators);
  return j;
}

Json encode(const congruence::DensityEvidence& ev) {
  Json j;
  Json mods = Json::array();
  for (const auto& m : ev.moduli) {
    Json e;
    e["modulus"] = m.modulus;
    e["order"] = m.order;
    e["expected_order"] = encode(m.expected);
    e["surjective"] = m.surjective ? Json(*m.surjective) : Json(nullptr);
    mods.push_back(e);
  }
  j["moduli"] = mods;
  j["all_surjective"] = ev.all_surjective;
  j["evidence_only"] = true;
  j["caveat"] = ev.caveat;
  return j;
}

Json encode(const congruence::ProdenseResult& r) {
  Json j;
  j["generators"] = r.system.elements.size();
  j["system"] = encode(r.system);
  j["t"] = r.t;
  j["q"] = r.q;
  j["r"] = r.r;
  j["conjugators"] = encode_all(r.conjugators);
  j["powers"] = r.powers;
  Json targets = Json::array();
  for (const auto& t : r.targets)
    targets.push_back(Json{{"p", encode(t.p)}, {"L", encode(t.L)}, {"epsilon_sq", encode(t.epsilon_sq)}});
  j["targets"] = targets;
  j["block1_mod3"] = encode(r.block1_mod3);
  j["zariski_witness"] = r.zariski_witness;
  j["evidence"] = encode(r.evidence);
  j["claims"] = Json::array({evidence_flags("profinitely dense", "strong approximation, Venkataramana"),
                             evidence_flags("Zariski dense", "surjectivity mod the odd prime zariski_witness")});
  return j;
}

Json encode(const congruence::FamilyReport& r) {
  Json j;
  j["F"] = r.F;
  j["base"] = encode(r.base);
  Json pairs = Json::array();
  for (const auto& pr : r.pairs) pairs.push_back(Json::array({encode(pr[0]), encode(pr[1])}));
  j["flag_pairs"] = pairs;
  j["extra_attracting"] = encode_all(r.extra_attracting);
  j["extra_repelling"] = encode_all(r.extra_repelling);
  Json systems = Json::array();
  for (std::size_t f = 0; f < r.systems.size(); ++f) {
    Json s;
    s["f"] = f;
    s["verified"] = static_cast<bool>(r.systems_verified[f]);
    s["generators"] = r.systems[f].elements.size();
    systems.push_back(s);
  }
  j["systems"] = systems;
  Json reports = Json::array();
  for (const auto& p : r.pair_reports) {
    Json e;
    e["f"] = p.f;
    e["g"] = p.g;
    e["index"] = p.index;
    e["z_squared"] = encode(p.certificate);
    e["evidence"] = encode(p.evidence);
    reports.push_back(e);
  }
  j["pairs"] = reports;
  j["all_verified"] = r.all_verified;
  j["claims"] = Json::array({evidence_flags("every system profinitely dense", "strong approximation, Venkataramana")});
  return j;
}

Json encode(const quadratic::QuadNum& x) {
  if (x.is_rational()) return encode(x.a());
  return Json{{"a", encode(x.a())}, {"b", encode(x.b())}, {"D", encode(x.D())}};
}

Json encode(const quadratic::CirclePoint& x) { return x.is_infinity() ? Json("inf") : encode(x.t()); }

Json encode(const quadratic::Arc& a) { return Json::array({encode(a.start), encode(a.end)}); }

Json encode(const sl2ht::PreciseTable& t) {
  Json j;
  j["generators"] = encode_all(t.generators);
  Json arcs = Json::array();
  for (const auto& a : t.arcs) arcs.push_back(Json{{"plus", encode(a.plus)}, {"minus", encode(a.minus)}});
  j["arcs"] = arcs;
  j["gaps"] = encode_all(t.gaps);
  j["basepoint"] = encode(t.basepoint);
  Json certified = Json::array();
  for (const auto& c : t.certificates) certified.push_back(c.has_value());
  j["metric_certificates"] = certified;
  return j;
}

Json encode(const sl2ht::Realization& r) {
  Json j;
  j["verified"] = r.verified();
  j["gamma"] = encode(r.gamma);
  j["power"] = r.power;
  j["gamma_k"] = encode(r.gamma_k);
  j["theta"] = encode_all(r.theta);
  j["eta"] = encode_all(r.eta);
  j["r"] = encode(r.r);
  j["a"] = encode(r.a);
  j["candidates_tried"] = r.candidates_tried;
  j["outside_old"] = r.outside_old;
  j["coset_equations"] = encode_bools(r.coset_equations);
  j["free_to_length"] = r.free_to_length;
  j["freeness_length"] = r.freeness_length;
  j["table"] = encode(r.table);
  return j;
}

// ---------------------------------------------------------------- decoders

Rational decode_rational(const Json& j, const std::string& path) {
  if (j.is_number_integer()) return Rational(Integer(j.dump()));
  if (!j.is_string()) fail(path, "expected a rational string \"p/q\" or an integer");
  try {
    return parse_rational(j.get<std::string>());
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

Vector decode_vector(const Json& j, const std::string& path) {
  Vector v;
  for (std::size_t i = 0; i < array(j, path).size(); ++i) v.push_back(decode_rational(j[i], at(path, i)));
  if (v.empty()) fail(path, "empty vector");
  return v;
}

Matrix decode_matrix(const Json& j, const std::string& path) {
  std::vector<Vector> rows;
  for (std::size_t i = 0; i < array(j, path).size(); ++i) {
    rows.push_back(decode_vector(j[i], at(path, i)));
    if (rows.back().size() != rows.front().size()) fail(at(path, i), "ragged matrix row");
  }
  if (rows.empty()) fail(path, "empty matrix");
  return Matrix::from_rows(rows);
}

exactlin::Place decode_place(const Json& j, const std::string& path) {
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s == "arch") return exactlin::Place::arch();
    fail(path, "unknown place '" + s + "'");
  }
  const Json& kind = member(j, "kind", path);
  if (kind == "arch") return exactlin::Place::arch();
  if (kind != "padic") fail(at(path, "kind"), "expected \"arch\" or \"padic\"");
  const Json& p = member(j, "p", path);
  if (!p.is_number_integer()) fail(at(path, "p"), "expected an integer prime");
  try {
    return exactlin::Place::padic(p.get<long>());
  } catch (const Error& e) {
    fail(at(path, "p"), e.what());
  }
}

exactlin::ProjPoint decode_point(const Json& j, const std::string& path) {
  if (j.is_object()) return decode_point(member(j, "point", path), at(path, "point"));
  Vector v = decode_vector(j, path);
  bool zero = true;
  for (const auto& x : v) zero = zero && x == 0;
  if (zero) fail(path, "zero vector is not a projective point");
  return exactlin::ProjPoint(v);
}

exactlin::ProjHyperplane decode_hyperplane(const Json& j, const std::string& path) {
  const Json& f = j.is_object() ? member(j, "hyperplane", path) : j;
  std::string p = j.is_object() ? at(path, "hyperplane") : path;
  Vector v = decode_vector(f, p);
  bool zero = true;
  for (const auto& x : v) zero = zero && x == 0;
  if (zero) fail(p, "zero functional");
  return exactlin::ProjHyperplane(v);
}

exactlin::ProjSubspace decode_subspace(const Json& j, const std::string& path) {
  if (j.is_array()) return exactlin::ProjSubspace::of(decode_point(j, path));
  if (j.contains("hyperplane")) return exactlin::ProjSubspace::of(decode_hyperplane(j, path));
  if (j.contains("point")) return exactlin::ProjSubspace::of(decode_point(j, path));
  const Json& basis = member(j, "subspace", path);
  std::vector<Vector> rows;
  for (std::size_t i = 0; i < array(basis, at(path, "subspace")).size(); ++i)
    rows.push_back(decode_vector(basis[i], at(at(path, "subspace"), i)));
  if (rows.empty() || rank(rows) != rows.size()) fail(at(path, "subspace"), "basis is not linearly independent");
  return exactlin::ProjSubspace::span(rows);
}

exactlin::Ball decode_ball(const Json& j, const std::string& path) {
  const Json& c = member(j, "center", path);
  std::string cp = at(path, "center");
  exactlin::Center center;
  if (c.is_array() || c.contains("point")) {
    center = decode_point(c, cp);
  } else if (c.contains("hyperplane")) {
    center = decode_hyperplane(c, cp);
  } else {
    center = decode_subspace(c, cp);
  }
  Rational r = decode_rational(member(j, "radius_sq", path), at(path, "radius_sq"));
  if (r < 0) fail(at(path, "radius_sq"), "negative radius");
  return exactlin::Ball(center, r);
}

exactlin::MFlag decode_mflag(const Json& j, const std::string& path) {
  auto h = decode_hyperplane(member(j, "hyperplane", path), at(path, "hyperplane"));
  auto p = decode_point(member(j, "point", path), at(path, "point"));
  if (h.dim() != p.dim()) fail(path, "dimension mismatch");
  if (!h.contains(p)) fail(path, "point does not lie on the hyperplane");
  return exactlin::MFlag(h, p);
}

std::vector<Matrix> decode_generators(const Json& j, const std::string& path) {
  const Json& list = j.is_object() ? member(j, "generators", path) : j;
  std::string p = j.is_object() ? at(path, "generators") : path;
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < array(list, p).size(); ++i) {
    out.push_back(decode_matrix(list[i], at(p, i)));
    if (!out.back().square()) fail(at(p, i), "matrix is not square");
    if (out.back().rows() != out.front().rows()) fail(at(p, i), "generator sizes differ");
  }
  return out;
}

contraction::ContractionCertificate decode_contraction_certificate(const Json& j, const std::string& path) {
  const Json& c = j.contains("contraction") ? j["contraction"] : j;
  std::string cp = j.contains("contraction") ? at(path, "contraction") : path;
  contraction::ContractionCertificate cert;
  cert.g = decode_matrix(member(c, "g", cp), at(cp, "g"));
  cert.place = c.contains("place") ? decode_place(c["place"], at(cp, "place")) : exactlin::Place::arch();
  cert.epsilon_sq = decode_rational(member(c, "epsilon_sq", cp), at(cp, "epsilon_sq"));
  cert.attracting = decode_ball(member(c, "attracting", cp), at(cp, "attracting"));
  cert.repelling = decode_ball(member(c, "repelling", cp), at(cp, "repelling"));
  if (!std::holds_alternative<exactlin::ProjPoint>(cert.attracting.center))
    fail(at(cp, "attracting"), "center must be a point");
  if (!std::holds_alternative<exactlin::ProjHyperplane>(cert.repelling.center))
    fail(at(cp, "repelling"), "center must be a hyperplane");
  if (c.contains("gap")) {
    cert.gap.lower = decode_rational(member(c["gap"], "lower", at(cp, "gap")), at(cp, "gap.lower"));
    cert.gap.upper = decode_rational(member(c["gap"], "upper", at(cp, "gap")), at(cp, "gap.upper"));
  }
  return cert;
}

unischottky::SchottkySystem decode_system(const Json& j, const std::string& path) {
  unischottky::SchottkySystem s;
  const Json& elems = member(j, "elements", path);
  std::string ep = at(path, "elements");
  for (std::size_t i = 0; i < array(elems, ep).size(); ++i) {
    std::string p = at(ep, i);
    Matrix u = decode_matrix(member(elems[i], "u", p), at(p, "u"));
    unischottky::SystemElement e;
    try {
      e.u = unischottky::RankOneUnipotent::from_matrix(u);
    } catch (const Error& err) {
      fail(at(p, "u"), err.what());
    }
    e.epsilon_sq = decode_rational(member(elems[i], "epsilon_sq", p), at(p, "epsilon_sq"));
    e.delta_sq = decode_rational(member(elems[i], "delta_sq", p), at(p, "delta_sq"));
    s.elements.push_back(std::move(e));
  }
  for (const char* key : {"attracting", "repelling"}) {
    auto& target = std::string(key) == "attracting" ? s.attracting : s.repelling;
    if (!j.contains(key)) continue;
    const Json& balls = j[key];
    for (std::size_t i = 0; i < array(balls, at(path, key)).size(); ++i)
      target.push_back(decode_ball(balls[i], at(at(path, key), i)));
  }
  return s;
}

quadratic::CirclePoint decode_circle_point(const Json& j, const std::string& path) {
  if (j.is_string() && j.get<std::string>() == "inf") return quadratic::CirclePoint::infinity();
  if (j.is_object()) {
    Rational a = decode_rational(member(j, "a", path), at(path, "a"));
    Rational b = decode_rational(member(j, "b", path), at(path, "b"));
    Rational d = decode_rational(member(j, "D", path), at(path, "D"));
    if (d.get_den() != 1 || d <= 0) fail(at(path, "D"), "expected a positive integer");
    Rational root;
    if (b != 0 && exact_sqrt(d, root)) fail(at(path, "D"), "D must not be a perfect square");
    return quadratic::CirclePoint(b == 0 ? quadratic::QuadNum(a) : quadratic::QuadNum(a, b, d.get_num()));
  }
  return quadratic::CirclePoint(quadratic::QuadNum(decode_rational(j, path)));
}

quadratic::Arc decode_arc(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected an arc [start, end]");
  quadratic::Arc a{decode_circle_point(j[0], at(path, std::size_t{0})),
                   decode_circle_point(j[1], at(path, std::size_t{1}))};
  if (a.start == a.end) fail(path, "degenerate arc");
  return a;
}

sl2ht::PreciseTable decode_precise_table(const Json& j, const std::string& path) {
  auto gens = decode_generators(j, path);
  if (gens.empty()) fail(path, "no generators");
  if (gens.front().rows() != 2) fail(at(path, "generators"), "expected 2x2 matrices");
  if (!j.is_object() || !j.contains("arcs")) return sl2ht::build_precise_table(gens);
  const Json& arcs = j["arcs"];
  std::string ap = at(path, "arcs");
  if (array(arcs, ap).size() != gens.size()) fail(ap, "one arc pair per generator expected");
  std::vector<sl2ht::PreciseArcs> pa;
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    std::string p = at(ap, i);
    pa.push_back({decode_arc(member(arcs[i], "plus", p), at(p, "plus")),
                  decode_arc(member(arcs[i], "minus", p), at(p, "minus"))});
  }
  return sl2ht::certify_table(gens, pa);
}

sl2ht::PPP decode_ppp(const Json& j, const std::string& path) {
  sl2ht::PPP phi;
  phi.alpha = decode_generators(member(j, "alpha", path), at(path, "alpha"));
  phi.beta = decode_generators(member(j, "beta", path), at(path, "beta"));
  if (phi.alpha.size() != phi.beta.size()) fail(path, "alpha and beta differ in length");
  return phi;
}

}  // namespace schottky::json_io
