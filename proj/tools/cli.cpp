#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <functional>
#include <sstream>

#include "manifest.hpp"
#include "render.hpp"
#include "schottky/errors.hpp"

namespace schottky::cli {

namespace {

using exactlin::ProjHyperplane;
using exactlin::ProjPoint;
using exactlin::ProjSubspace;

struct Outcome {
  Json result;
  int code = 0;  // 0 verified, 1 verification failure, 2 budget
  Json verdicts = Json::object();
};

struct Context {
  std::size_t budget = 0;  // 0: module default
  unsigned precision = 64;
  std::uint64_t seed = 1;
  std::string out_path;
  std::string manifest_path;
  RunManifest manifest;

  std::size_t budget_or(std::size_t fallback) const { return budget ? budget : fallback; }

  contraction::Config config() const {
    contraction::Config cfg;
    cfg.start_bits = precision;
    return cfg;
  }

  Json load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(path + ": cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    manifest.inputs.push_back({path, sha256_hex(ss.str())});
    return json_io::parse_text(ss.str(), path);
  }

  void emit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError(path + ": cannot write");
    out << content;
    manifest.outputs.push_back({path, sha256_hex(content)});
  }
};

// Errors from decoding carry the file name in front of the JSON path.
template <class F>
auto decode(const std::string& file, F&& f) {
  try {
    return f();
  } catch (const InputError& e) {
    throw InputError(file + ": " + e.what());
  }
}

std::vector<long> parse_moduli(const std::string& text) {
  std::vector<long> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      long d = std::stol(item, &used);
      if (used != item.size() || d < 2) throw std::invalid_argument(item);
      out.push_back(d);
    } catch (const std::logic_error&) {
      throw InputError("--mods: bad modulus '" + item + "'");
    }
  }
  if (out.empty()) throw InputError("--mods: empty list");
  return out;
}

Rational option_rational(const std::string& text, const char* name) {
  try {
    return parse_rational(text);
  } catch (const Error& e) {
    throw InputError(std::string(name) + ": " + e.what());
  }
}

exactlin::Place parse_place(const std::string& text) {
  if (text == "arch") return exactlin::Place::arch();
  std::string digits = text.rfind("padic:", 0) == 0 ? text.substr(6) : text;
  try {
    std::size_t used = 0;
    long p = std::stol(digits, &used);
    if (used == digits.size()) return exactlin::Place::padic(p);
  } catch (const std::logic_error&) {
  } catch (const PreconditionError& e) {
    throw InputError(std::string("--place: ") + e.what());
  }
  throw InputError("--place: expected 'arch' or 'padic:p', got '" + text + "'");
}

// ------------------------------------------------------------------ metric

Outcome run_metric(Context& ctx, const std::string& place_text, const std::string& f1, const std::string& f2) {
  exactlin::Place place = parse_place(place_text);
  Json a = ctx.load(f1), b = ctx.load(f2);
  auto kind = [](const Json& j) {
    if (j.is_array() || j.contains("point")) return 0;
    if (j.contains("hyperplane")) return 1;
    return 2;
  };
  Outcome o;
  o.result["place"] = json_io::encode(place);
  int ka = kind(a), kb = kind(b);
  if (ka == 0 && kb == 0) {
    auto x = decode(f1, [&] { return json_io::decode_point(a); });
    auto y = decode(f2, [&] { return json_io::decode_point(b); });
    if (x.dim() != y.dim()) throw InputError("points of different dimension");
    o.result["distance_sq"] = json_io::encode(exactlin::proj_distance_sq(place, x, y));
    o.result["exact"] = true;
  } else if (ka == 1 && kb == 1) {
    auto x = decode(f1, [&] { return json_io::decode_hyperplane(a); });
    auto y = decode(f2, [&] { return json_io::decode_hyperplane(b); });
    if (x.dim() != y.dim()) throw InputError("hyperplanes of different dimension");
    o.result["distance_sq"] = json_io::encode(exactlin::hyperplane_distance_sq(place, x, y));
    o.result["exact"] = true;
  } else if (ka == 0 || kb == 0) {
    bool swap = kb == 0;
    const Json& pj = swap ? b : a;
    const Json& lj = swap ? a : b;
    auto x = decode(swap ? f2 : f1, [&] { return json_io::decode_point(pj); });
    auto l = decode(swap ? f1 : f2, [&] { return json_io::decode_subspace(lj); });
    if (x.dim() != l.ambient()) throw InputError("point and subspace of different dimension");
    o.result["distance_sq"] = json_io::encode(exactlin::point_subspace_distance_sq(place, x, l));
    o.result["exact"] = true;
  } else {
    auto x = decode(f1, [&] { return json_io::decode_subspace(a); });
    auto y = decode(f2, [&] { return json_io::decode_subspace(b); });
    if (x.ambient() != y.ambient() || x.proj_dim() != y.proj_dim())
      throw InputError("subspaces of different dimension");
    auto d = exactlin::subspace_distance_sq(place, x, y);
    if (d.exact()) {
      o.result["distance_sq"] = json_io::encode(d.lower);
    } else {
      o.result["distance_sq"] = Json{{"lower", json_io::encode(d.lower)}, {"upper", json_io::encode(d.upper)}};
    }
    o.result["exact"] = d.exact();
  }
  return o;
}

// ------------------------------------------------------------- contraction

Matrix load_matrix(Context& ctx, const std::string& file) {
  Json j = ctx.load(file);
  return decode(file, [&] { return json_io::decode_matrix(j.is_object() ? j.value("g", Json()) : j); });
}

Outcome run_contraction_certify(Context& ctx, const std::string& file, const std::string& eps_text,
                                const std::string& r_text, bool very, std::size_t audit) {
  Matrix g = load_matrix(ctx, file);
  if (!g.square()) throw InputError(file + ": matrix is not square");
  Outcome o;
  std::optional<contraction::ContractionCertificate> base;
  if (very) {
    if (!eps_text.empty() && r_text.empty()) throw InputError("--r-sq is required with --epsilon-sq");
    contraction::VeryProximalCertificate c =
        eps_text.empty() ? contraction::certify_very_proximal_auto(g, ctx.config())
                         : contraction::certify_very_proximal(g, option_rational(r_text, "--r-sq"),
                                                              option_rational(eps_text, "--epsilon-sq"), ctx.config());
    o.result["certificate"] = json_io::encode(c);
    bool sep = contraction::separation_holds(c);
    o.result["separation"] = sep;
    o.verdicts["separation"] = sep;
    if (!sep) o.code = 1;
    base = c.forward.base;
  } else {
    if (eps_text.empty()) throw InputError("--epsilon-sq is required");
    base = contraction::certify_contraction(g, option_rational(eps_text, "--epsilon-sq"), ctx.config());
    o.result["certificate"] = json_io::encode(*base);
  }
  o.verdicts["certified"] = true;
  if (audit > 0) {
    auto rep = contraction::audit_contraction(*base, audit, ctx.seed);
    o.result["audit"] = json_io::encode(rep);
    o.verdicts["audit_violations"] = rep.violations;
    if (rep.violations) o.code = 1;
  }
  return o;
}

Outcome run_contraction_audit(Context& ctx, const std::string& file, std::size_t samples) {
  Json j = ctx.load(file);
  const Json& c = j.contains("certificate") ? j["certificate"] : j;
  auto cert = decode(file, [&] {
    if (c.contains("forward")) return json_io::decode_contraction_certificate(c["forward"], "$.forward");
    return json_io::decode_contraction_certificate(c);
  });
  auto rep = contraction::audit_contraction(cert, samples, ctx.seed);
  Outcome o;
  o.result["audit"] = json_io::encode(rep);
  o.verdicts["audit_violations"] = rep.violations;
  o.code = rep.violations ? 1 : 0;
  return o;
}

// ---------------------------------------------------------------- pingpong

pingpong::PingPongTable certify_generators(Context& ctx, const std::vector<Matrix>& gens,
                                           const exactlin::Place& place) {
  pingpong::PingPongTable t;
  t.place = place;
  for (const auto& g : gens) t.entries.push_back(contraction::certify_very_proximal_auto(g, ctx.config()));
  return t;
}

struct LoadedTable {
  pingpong::PingPongTable table;
  std::optional<contraction::VeryProximalCertificate> witness;
};

LoadedTable load_table(Context& ctx, const std::string& file) {
  Json j = ctx.load(file);
  std::vector<Matrix> gens = decode(file, [&] { return json_io::decode_generators(j); });
  if (gens.empty()) throw InputError(file + ": no generators");
  exactlin::Place place = exactlin::Place::arch();
  std::optional<Matrix> witness;
  if (j.is_object()) {
    if (j.contains("place")) place = decode(file, [&] { return json_io::decode_place(j["place"], "$.place"); });
    if (j.contains("witness"))
      witness = decode(file, [&] { return json_io::decode_matrix(j["witness"], "$.witness"); });
  }
  LoadedTable lt{certify_generators(ctx, gens, place), std::nullopt};
  if (witness) lt.witness = contraction::certify_very_proximal_auto(*witness, ctx.config());
  return lt;
}

Outcome run_pingpong_verify(Context& ctx, const std::string& file) {
  LoadedTable lt = load_table(ctx, file);
  Outcome o;
  o.result["table"] = json_io::encode(lt.table);
  if (auto ov = pingpong::find_overlap(lt.table)) {
    o.result["verified"] = false;
    o.result["overlap"] = ov->to_string();
    o.verdicts["schottky"] = false;
    o.code = 1;
    return o;
  }
  if (lt.witness) {
    pingpong::verify_schottky(lt.table, *lt.witness);
    o.result["spacious"] = true;
  } else {
    pingpong::verify_schottky(lt.table);
  }
  o.result["verified"] = true;
  o.verdicts["schottky"] = true;
  return o;
}

Outcome run_pingpong_freeness(Context& ctx, const std::string& file, std::size_t max_len) {
  Json j = ctx.load(file);
  auto gens = decode(file, [&] { return json_io::decode_generators(j); });
  if (gens.empty()) throw InputError(file + ": no generators");
  auto rep = pingpong::freeness_search(gens, max_len, ctx.budget_or(1000000));
  Outcome o;
  o.result = json_io::encode(rep);
  o.result["max_len"] = max_len;
  o.result["reduced_words"] = pingpong::reduced_word_count(gens.size(), max_len);
  o.verdicts["free"] = rep.free;
  o.code = rep.free ? 0 : 1;
  return o;
}

Outcome run_pingpong_hit_coset(Context& ctx, const std::string& file, const std::string& target_file, long ell) {
  LoadedTable lt = load_table(ctx, file);
  if (!lt.witness) throw InputError(file + ": hit-coset needs a \"witness\" matrix");
  pingpong::SchottkyCertificate cert = pingpong::verify_schottky(lt.table, *lt.witness);
  Json t = ctx.load(target_file);
  pingpong::NormalCosetTarget target;
  decode(target_file, [&] {
    target.gamma = json_io::decode_matrix(t.contains("gamma") ? t["gamma"] : Json(), "$.gamma");
    target.n0 = json_io::decode_matrix(t.contains("n0") ? t["n0"] : Json(), "$.n0");
    return 0;
  });
  pingpong::CosetHitOptions opts;
  opts.ell = ell;
  auto hit = pingpong::hit_normal_coset(cert, target, ctx.budget_or(10000), opts);
  bool member = pingpong::check_coset_membership(hit, target.n0);
  Outcome o;
  o.result = json_io::encode(hit);
  o.result["coset_membership"] = member;
  o.verdicts["coset_membership"] = member;
  o.code = member ? 0 : 1;
  return o;
}

// ------------------------------------------------------------- unischottky

unischottky::SchottkySystem load_system(Context& ctx, const std::string& file) {
  Json j = ctx.load(file);
  return decode(file, [&] { return json_io::decode_system(j.contains("system") ? j["system"] : j); });
}

Outcome system_outcome(const unischottky::SchottkySystem& s, std::size_t free_len) {
  Outcome o;
  auto rep = unischottky::verify_system(s);
  o.result["system"] = json_io::encode(s);
  o.result["report"] = json_io::encode(rep);
  o.verdicts["system"] = rep.ok;
  if (free_len > 0 && !s.elements.empty()) {
    auto fp = unischottky::free_product_oracle(s.matrices(), free_len);
    o.result["free_product"] = json_io::encode(fp);
    o.verdicts["free_product"] = fp.injective;
    if (!fp.injective) o.code = 1;
  }
  if (!rep.ok) o.code = 1;
  return o;
}

Outcome run_uni_verify(Context& ctx, const std::string& file, std::size_t free_len) {
  return system_outcome(load_system(ctx, file), free_len);
}

Outcome run_uni_add_flag(Context& ctx, const std::string& sys_file, const std::string& flag_file) {
  auto s = load_system(ctx, sys_file);
  Json f = ctx.load(flag_file);
  ProjPoint p;
  ProjSubspace L;
  Rational eps, delta;
  decode(flag_file, [&] {
    p = json_io::decode_point(f.contains("p") ? f["p"] : Json(), "$.p");
    L = json_io::decode_subspace(f.contains("L") ? f["L"] : Json(), "$.L");
    eps = json_io::decode_rational(f.contains("epsilon_sq") ? f["epsilon_sq"] : Json(), "$.epsilon_sq");
    delta = json_io::decode_rational(f.contains("delta_sq") ? f["delta_sq"] : Json(), "$.delta_sq");
    return 0;
  });
  return system_outcome(unischottky::add_flag(s, p, L, eps, delta), 0);
}

Outcome run_uni_throw(Context& ctx, const std::string& sys_file, const std::string& throw_file) {
  auto s = load_system(ctx, sys_file);
  Json t = ctx.load(throw_file);
  Matrix g;
  ProjPoint p1, p2;
  ProjSubspace L1, L2;
  Rational eps, delta;
  decode(throw_file, [&] {
    auto get = [&](const char* k) { return t.contains(k) ? t[k] : Json(); };
    g = json_io::decode_matrix(get("g"), "$.g");
    p1 = json_io::decode_point(get("p1"), "$.p1");
    p2 = json_io::decode_point(get("p2"), "$.p2");
    L1 = json_io::decode_subspace(get("L1"), "$.L1");
    L2 = json_io::decode_subspace(get("L2"), "$.L2");
    eps = json_io::decode_rational(get("epsilon_sq"), "$.epsilon_sq");
    delta = json_io::decode_rational(get("delta_sq"), "$.delta_sq");
    return 0;
  });
  auto res = unischottky::throwing(s, g, p1, p2, L1, L2, eps, delta);
  Outcome o = system_outcome(res.system, 0);
  o.result["power"] = res.power;
  o.result["z_squared"] = json_io::encode(res.certificate);
  o.verdicts["z_squared"] = res.certificate.valid();
  if (!res.certificate.valid()) o.code = 1;
  return o;
}

Outcome run_uni_conze(Context& ctx, const std::string& file, long step) {
  Json t = ctx.load(file);
  ProjPoint p1, p2;
  ProjSubspace L1, L2;
  Rational eps, delta;
  decode(file, [&] {
    auto get = [&](const char* k) { return t.contains(k) ? t[k] : Json(); };
    p1 = json_io::decode_point(get("p1"), "$.p1");
    p2 = json_io::decode_point(get("p2"), "$.p2");
    L1 = json_io::decode_subspace(get("L1"), "$.L1");
    L2 = json_io::decode_subspace(get("L2"), "$.L2");
    eps = json_io::decode_rational(get("epsilon_sq"), "$.epsilon_sq");
    delta = json_io::decode_rational(get("delta_sq"), "$.delta_sq");
    return 0;
  });
  unischottky::ConzeOptions opts;
  opts.step = step;
  opts.budget = ctx.budget_or(opts.budget);
  auto res = unischottky::conze_search(p1, L1, p2, L2, eps, delta, opts);
  Outcome o;
  o.result["g"] = json_io::encode(res.g);
  o.result["explored"] = res.explored;
  o.result["length"] = res.length;
  o.result["point_distance_sq"] =
      json_io::encode(exactlin::proj_distance_sq(exactlin::Place::arch(), exactlin::apply(res.g, p1), p2));
  bool within = exactlin::subspace_distance_sq(exactlin::Place::arch(), exactlin::apply(res.g, L1), L2).upper < delta;
  o.result["subspace_within_delta"] = within;
  o.result["claims"] = Json::array(
      {Json{{"claim", "existence of g"}, {"evidence_only", false}, {"trusted_oracle", "Conze-Guivarc'h"}}});
  o.verdicts["found"] = within;
  o.code = within ? 0 : 1;
  return o;
}

// -------------------------------------------------------------- congruence

Outcome run_cong_image(Context& ctx, const std::string& file, long d) {
  if (d < 2) throw InputError("--mod must be at least 2");
  Json j = ctx.load(file);
  auto gens = decode(file, [&] { return json_io::decode_generators(j); });
  if (gens.empty()) throw InputError(file + ": no generators");
  for (const auto& g : gens)
    if (!g.is_integral() || determinant(g) != 1) throw InputError(file + ": generators must lie in SL_n(Z)");
  auto img = congruence::image_closure(gens, d, ctx.budget_or(1000000));
  Outcome o;
  o.result = json_io::encode(img);
  o.verdicts["complete"] = img.complete;
  o.code = img.complete ? 0 : 2;
  return o;
}

struct DenseSetup {
  std::size_t n = 3;
  std::string flag_file;
  std::string eps = "1/100";
  std::string delta = "1/100";
};

void setup_flag(Context& ctx, const DenseSetup& st, ProjPoint& p, ProjSubspace& L) {
  if (st.n < 2) throw InputError("--n must be at least 2");
  if (st.flag_file.empty()) {
    p = ProjPoint::basis(st.n, 0);
    Vector f(st.n, Rational(0));
    f[1] = 1;
    if (st.n > 2) f[2] = -1;
    L = ProjSubspace::of(ProjHyperplane(f));
    return;
  }
  Json f = ctx.load(st.flag_file);
  decode(st.flag_file, [&] {
    p = json_io::decode_point(f.contains("p") ? f["p"] : Json(), "$.p");
    L = json_io::decode_subspace(f.contains("L") ? f["L"] : Json(), "$.L");
    return 0;
  });
  if (p.dim() != st.n) throw InputError(st.flag_file + ": flag dimension differs from --n");
}

congruence::ProdenseOptions dense_options(const Context& ctx) {
  congruence::ProdenseOptions opts;
  opts.closure_cap = ctx.budget_or(opts.closure_cap);
  return opts;
}

Outcome run_cong_prodense(Context& ctx, const DenseSetup& st, const std::string& mods) {
  ProjPoint p;
  ProjSubspace L;
  setup_flag(ctx, st, p, L);
  auto res = congruence::prodense_construct(st.n, p, L, option_rational(st.eps, "--epsilon-sq"),
                                            option_rational(st.delta, "--delta-sq"), parse_moduli(mods),
                                            dense_options(ctx));
  auto rep = unischottky::verify_system(res.system);
  bool block1 = res.block1_mod3.complete && Integer(res.block1_mod3.order) == congruence::sl_order(st.n, 3);
  Outcome o;
  o.result = json_io::encode(res);
  o.result["report"] = json_io::encode(rep);
  o.verdicts["system"] = rep.ok;
  o.verdicts["block1_mod3_surjective"] = block1;
  o.verdicts["all_surjective"] = res.evidence.all_surjective;
  o.code = rep.ok && block1 && res.evidence.all_surjective ? 0 : 1;
  return o;
}

Outcome run_cong_family(Context& ctx, const DenseSetup& st, std::size_t F, const std::string& base_mods,
                        const std::string& pair_mods) {
  ProjPoint p;
  ProjSubspace L;
  setup_flag(ctx, st, p, L);
  if (F < 1 || F > 6) throw InputError("--F must be between 1 and 6");
  auto rep = congruence::counting_family(F, p, L, option_rational(st.eps, "--epsilon-sq"),
                                         option_rational(st.delta, "--delta-sq"), parse_moduli(base_mods),
                                         parse_moduli(pair_mods), dense_options(ctx));
  Outcome o;
  o.result = json_io::encode(rep);
  o.verdicts["systems"] = rep.systems.size();
  o.verdicts["pairs"] = rep.pair_reports.size();
  o.verdicts["all_verified"] = rep.all_verified;
  o.code = rep.all_verified ? 0 : 1;
  return o;
}

// -------------------------------------------------------------------- sl2

sl2ht::PreciseTable load_precise_table(Context& ctx, const std::string& file) {
  Json j = ctx.load(file);
  return decode(file, [&] { return json_io::decode_precise_table(j.contains("table") ? j["table"] : j); });
}

Outcome run_sl2_table(Context& ctx, const std::string& file) {
  auto t = load_precise_table(ctx, file);
  Outcome o;
  o.result = json_io::encode(t);
  o.verdicts["certified"] = true;
  return o;
}

Outcome run_sl2_limit(Context& ctx, const std::string& file, std::size_t depth, const std::string& svg,
                      const std::string& csv) {
  auto t = load_precise_table(ctx, file);
  auto samples = sl2ht::limit_set_sample(t, depth);
  Outcome o;
  o.result["depth"] = depth;
  o.result["count"] = samples.size();
  Json pts = Json::array();
  for (const auto& x : samples) pts.push_back(json_io::encode(x));
  o.result["samples"] = pts;
  o.result["table"] = json_io::encode(t);
  if (!svg.empty()) ctx.emit(svg, limit_svg(t, samples));
  if (!csv.empty()) ctx.emit(csv, limit_csv(samples));
  return o;
}

Outcome run_sl2_realize(Context& ctx, const std::string& phi_file, const std::string& table_file,
                        std::size_t free_len) {
  Json pj = ctx.load(phi_file);
  auto phi = decode(phi_file, [&] { return json_io::decode_ppp(pj); });
  auto t = load_precise_table(ctx, table_file);
  auto r = sl2ht::realize_ppp(phi, t, ctx.budget_or(10000), free_len);
  Outcome o;
  o.result = json_io::encode(r);
  o.verdicts["outside_old"] = r.outside_old;
  o.verdicts["free_to_length"] = r.free_to_length;
  Json eqs = Json::array();
  for (bool b : r.coset_equations) eqs.push_back(b);
  o.verdicts["coset_equations"] = eqs;
  o.code = r.verified() ? 0 : 1;
  return o;
}

Outcome run_sl2_membership(Context& ctx, const std::string& g_file, const std::string& table_file,
                           std::size_t steps) {
  Matrix g = load_matrix(ctx, g_file);
  if (g.rows() != 2 || g.cols() != 2) throw InputError(g_file + ": expected a 2x2 matrix");
  auto t = load_precise_table(ctx, table_file);
  bool member = sl2ht::membership(g, t, steps);
  Outcome o;
  o.result["member"] = member;
  o.result["max_steps"] = steps;
  o.verdicts["member"] = member;
  return o;
}

// ------------------------------------------------------------------ driver

Json config_snapshot(const CLI::App* app) {
  Json cfg = Json::object();
  for (const CLI::App* a = app; a; a = a->get_parent()) {
    for (const CLI::Option* opt : a->get_options()) {
      if (opt->get_name() == "--help" || opt->get_name().empty()) continue;
      std::string key = opt->get_name(false, true);
      if (cfg.contains(key)) continue;
      auto res = opt->results();
      if (!res.empty())
        cfg[key] = res.size() == 1 ? Json(res.front()) : Json(res);
      else if (!opt->get_default_str().empty())
        cfg[key] = opt->get_default_str();
    }
  }
  return cfg;
}

const CLI::App* leaf(const CLI::App* app) {
  for (const CLI::App* sub : app->get_subcommands()) return leaf(sub);
  return app;
}

std::string command_name(const CLI::App* app) {
  std::string name;
  for (const CLI::App* a = app; a && a->get_parent(); a = a->get_parent())
    name = a->get_name() + (name.empty() ? "" : " " + name);
  return name;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto t0 = std::chrono::steady_clock::now();
  Context ctx;
  ctx.manifest.argv = args;
  ctx.manifest.started_at = utc_timestamp();
  std::function<Outcome()> action;

  CLI::App app{"Certified Schottky subgroup constructions", "schottky"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--budget", ctx.budget, "Search budget or closure cap (0: module default)")->default_val(0);
  app.add_option("--precision", ctx.precision, "Starting bits for dyadic enclosures")->default_val(64);
  app.add_option("--seed", ctx.seed, "Seed for randomized audits")->default_val(1);
  app.add_option("--out", ctx.out_path, "Write the result JSON here instead of stdout");
  app.add_option("--manifest", ctx.manifest_path, "Run manifest path (default: <out>.manifest.json)");

  // metric
  std::string place = "arch", f1, f2, f3;
  auto* metric = app.add_subcommand("metric", "Exact squared distance between two points or subspaces");
  metric->add_option("--place", place, "arch or padic:p")->default_val("arch");
  metric->add_option("first", f1)->required();
  metric->add_option("second", f2)->required();
  metric->callback([&] { action = [&] { return run_metric(ctx, place, f1, f2); }; });

  // contraction
  std::string eps_text, r_text;
  bool very = false;
  std::size_t audit = 0, samples = 10000;
  auto* con = app.add_subcommand("contraction", "Contraction and very proximal certificates");
  con->require_subcommand(1);
  auto* certify = con->add_subcommand("certify", "Certify a matrix");
  certify->add_option("matrix", f1)->required();
  certify->add_option("--epsilon-sq", eps_text);
  certify->add_option("--r-sq", r_text);
  certify->add_flag("--very-proximal", very);
  certify->add_option("--audit", audit, "Grid oracle samples after certification");
  certify->callback([&] { action = [&] { return run_contraction_certify(ctx, f1, eps_text, r_text, very, audit); }; });
  auto* caudit = con->add_subcommand("audit", "Re-run the grid oracle on a saved certificate");
  caudit->add_option("certificate", f1)->required();
  caudit->add_option("--samples", samples)->default_val(10000);
  caudit->callback([&] { action = [&] { return run_contraction_audit(ctx, f1, samples); }; });

  // pingpong
  std::size_t max_len = 8;
  long ell = 1;
  auto* pp = app.add_subcommand("pingpong", "Ping-pong tables, freeness, coset hitting");
  pp->require_subcommand(1);
  auto* ppv = pp->add_subcommand("verify", "Certify the generators of a table and check the ping-pong conditions");
  ppv->add_option("table", f1)->required();
  ppv->callback([&] { action = [&] { return run_pingpong_verify(ctx, f1); }; });
  auto* ppf = pp->add_subcommand("freeness", "Exhaustive relation search over reduced words");
  ppf->add_option("generators", f1)->required();
  ppf->add_option("--max-len", max_len)->default_val(8);
  ppf->callback([&] { action = [&] { return run_pingpong_freeness(ctx, f1, max_len); }; });
  auto* pph = pp->add_subcommand("hit-coset", "Append an element of a prescribed normal coset");
  pph->add_option("table", f1)->required();
  pph->add_option("--target", f2)->required();
  pph->add_option("--ell", ell)->default_val(1);
  pph->callback([&] { action = [&] { return run_pingpong_hit_coset(ctx, f1, f2, ell); }; });

  // unischottky
  std::size_t free_len = 0;
  long step = 1;
  auto* uni = app.add_subcommand("unischottky", "Unipotent Schottky systems");
  uni->require_subcommand(1);
  auto* uv = uni->add_subcommand("verify", "Check the four system conditions");
  uv->add_option("system", f1)->required();
  uv->add_option("--free-product-length", free_len, "Also run the free product oracle to this many syllables");
  uv->callback([&] { action = [&] { return run_uni_verify(ctx, f1, free_len); }; });
  auto* ua = uni->add_subcommand("add-flag", "Add the element of a new flag");
  ua->add_option("system", f1)->required();
  ua->add_option("flag", f2)->required();
  ua->callback([&] { action = [&] { return run_uni_add_flag(ctx, f1, f2); }; });
  auto* ut = uni->add_subcommand("throw", "Throwing lemma with a Z^2 certificate");
  ut->add_option("system", f1)->required();
  ut->add_option("data", f2)->required();
  ut->callback([&] { action = [&] { return run_uni_throw(ctx, f1, f2); }; });
  auto* uc = uni->add_subcommand("conze-search", "Find g moving one flag close to another");
  uc->add_option("data", f1)->required();
  uc->add_option("--step", step)->default_val(1);
  uc->callback([&] { action = [&] { return run_uni_conze(ctx, f1, step); }; });

  // congruence
  long modulus = 0;
  std::string mods = "4,3,5,7", base_mods = "4,3,5,7", pair_mods = "3,4,5";
  std::size_t F = 3;
  DenseSetup st;
  auto* cg = app.add_subcommand("congruence", "Congruence images and profinite density evidence");
  cg->require_subcommand(1);
  auto* ci = cg->add_subcommand("image", "BFS closure of the image mod d");
  ci->add_option("--mod", modulus)->required();
  ci->add_option("generators", f1)->required();
  ci->callback([&] { action = [&] { return run_cong_image(ctx, f1, modulus); }; });
  auto add_setup = [&](CLI::App* sub) {
    sub->add_option("--n", st.n)->default_val(3);
    sub->add_option("--flag", st.flag_file, "JSON {\"p\", \"L\"}; default e1 and {x2 = x3}");
    sub->add_option("--epsilon-sq", st.eps)->default_val("1/100");
    sub->add_option("--delta-sq", st.delta)->default_val("1/100");
  };
  auto* cp = cg->add_subcommand("prodense", "Schottky system with profinitely dense image");
  add_setup(cp);
  cp->add_option("--mods", mods)->default_val("4,3,5,7");
  cp->callback([&] { action = [&] { return run_cong_prodense(ctx, st, mods); }; });
  auto* cf = cg->add_subcommand("count-family", "2^F systems from F flag pairs");
  add_setup(cf);
  cf->add_option("--F", F)->default_val(3);
  cf->add_option("--base-mods", base_mods)->default_val("4,3,5,7");
  cf->add_option("--mods", pair_mods, "Moduli for pairwise evidence")->default_val("3,4,5");
  cf->callback([&] { action = [&] { return run_cong_family(ctx, st, F, base_mods, pair_mods); }; });

  // sl2
  std::size_t depth = 4, steps = 64, ppp_free = 6;
  std::string svg, csv;
  auto* sl2 = app.add_subcommand("sl2", "Precise tables and PPP realization in SL_2");
  sl2->require_subcommand(1);
  auto* stab = sl2->add_subcommand("table", "Build and certify a precise table");
  stab->add_option("generators", f1)->required();
  stab->callback([&] { action = [&] { return run_sl2_table(ctx, f1); }; });
  auto* sli = sl2->add_subcommand("limit", "Sample the limit set");
  sli->add_option("table", f1)->required();
  sli->add_option("--depth", depth)->default_val(4);
  sli->add_option("--svg", svg);
  sli->add_option("--csv", csv);
  sli->callback([&] { action = [&] { return run_sl2_limit(ctx, f1, depth, svg, csv); }; });
  auto* sr = sl2->add_subcommand("realize-ppp", "Realize a legitimate special PPP");
  sr->add_option("phi", f1)->required();
  sr->add_option("table", f2)->required();
  sr->add_option("--freeness-length", ppp_free)->default_val(6);
  sr->callback([&] { action = [&] { return run_sl2_realize(ctx, f1, f2, ppp_free); }; });
  auto* sm = sl2->add_subcommand("membership", "Decide membership in the table's group");
  sm->add_option("matrix", f1)->required();
  sm->add_option("table", f2)->required();
  sm->add_option("--max-steps", steps)->default_val(64);
  sm->callback([&] { action = [&] { return run_sl2_membership(ctx, f1, f2, steps); }; });

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "schottky: " << e.what() << "\n";
    return 3;
  }

  const CLI::App* cmd = leaf(&app);
  RunManifest& m = ctx.manifest;
  m.command = command_name(cmd);
  m.config = config_snapshot(cmd);
  int code = 0;
  try {
    if (!action) throw InputError("no command given");
    Outcome o = action();
    std::string text = json_io::dump(o.result);
    if (ctx.out_path.empty()) {
      out << text;
      m.outputs.push_back({"<stdout>", sha256_hex(text)});
    } else {
      ctx.emit(ctx.out_path, text);
    }
    m.verdicts = o.verdicts;
    if (o.result.contains("claims")) m.claims = o.result["claims"];
    code = o.code;
  } catch (const InputError& e) {
    m.error = e.what();
    code = 3;
  } catch (const BudgetExceeded& e) {
    m.error = e.what();
    code = 2;
  } catch (const PrecisionError& e) {
    m.error = e.what();
    code = 2;
  } catch (const std::exception& e) {
    m.error = e.what();
    code = 1;
  }
  if (!m.error.empty()) err << "schottky " << m.command << ": " << m.error << "\n";
  m.exit_code = code;
  m.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string manifest_path = ctx.manifest_path;
  if (manifest_path.empty() && !ctx.out_path.empty()) manifest_path = ctx.out_path + ".manifest.json";
  if (!manifest_path.empty()) {
    std::ofstream mf(manifest_path, std::ios::binary);
    if (!mf) {
      err << "schottky: cannot write manifest " << manifest_path << "\n";
      return code ? code : 3;
    }
    mf << json_io::dump(m.to_json());
  }
  return code;
}

}  // namespace schottky::cli
