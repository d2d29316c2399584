#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "schottky/congruence.hpp"
#include "schottky/pingpong.hpp"
#include "schottky/sl2ht.hpp"
#include "schottky/unischottky.hpp"

// JSON encodings shared by every module. Rationals are strings "p/q",
// vectors and matrices nested arrays of them. Decoders throw InputError
// naming the JSON path of the offending value.
namespace schottky::json_io {

using Json = nlohmann::ordered_json;

// Parses text; syntax errors carry the byte offset and the source name.
Json parse_text(const std::string& text, const std::string& source);
Json load_file(const std::string& path);

// Canonical serialization used for every result file and for hashing.
std::string dump(const Json& j);

// --- encoders
Json encode(const Rational& q);
Json encode(const Integer& z);
Json encode(const Vector& v);
Json encode(const Matrix& m);
Json encode(const exactlin::Place& place);
Json encode(const exactlin::ProjPoint& x);
Json encode(const exactlin::ProjHyperplane& h);
Json encode(const exactlin::ProjSubspace& l);
Json encode(const exactlin::Center& c);
Json encode(const exactlin::Ball& b);
Json encode(const exactlin::MFlag& f);

Json encode(const contraction::SingularGap& g);
Json encode(const contraction::ContractionCertificate& c);
Json encode(const contraction::ProximalityCertificate& c);
Json encode(const contraction::VeryProximalCertificate& c);
Json encode(const contraction::AuditReport& r);

Json encode(const pingpong::Word& w);
Json encode(const pingpong::PingPongTable& t);
Json encode(const pingpong::FreenessReport& r);
Json encode(const pingpong::CosetHit& hit);

Json encode(const unischottky::SystemElement& e);
Json encode(const unischottky::SchottkySystem& s);
Json encode(const unischottky::SystemReport& r);
Json encode(const unischottky::ZSquaredCertificate& c);
Json encode(const unischottky::FreeProductReport& r);

Json encode(const congruence::ModMatrix& m);
Json encode(const congruence::CongruenceImage& img);
Json encode(const congruence::DensityEvidence& ev);
Json encode(const congruence::ProdenseResult& r);
Json encode(const congruence::FamilyReport& r);

Json encode(const quadratic::QuadNum& x);
Json encode(const quadratic::CirclePoint& x);
Json encode(const quadratic::Arc& a);
Json encode(const sl2ht::PreciseTable& t);
Json encode(const sl2ht::Realization& r);

// --- decoders; `path` is the JSON location used in error messages
Rational decode_rational(const Json& j, const std::string& path = "$");
Vector decode_vector(const Json& j, const std::string& path = "$");
Matrix decode_matrix(const Json& j, const std::string& path = "$");
exactlin::Place decode_place(const Json& j, const std::string& path = "$");
exactlin::ProjPoint decode_point(const Json& j, const std::string& path = "$");
exactlin::ProjHyperplane decode_hyperplane(const Json& j, const std::string& path = "$");
// {"hyperplane": f}, {"subspace": [[...], ...]} or a bare point array.
exactlin::ProjSubspace decode_subspace(const Json& j, const std::string& path = "$");
exactlin::Ball decode_ball(const Json& j, const std::string& path = "$");
exactlin::MFlag decode_mflag(const Json& j, const std::string& path = "$");

// Bare array of matrices or {"generators": [...]}.
std::vector<Matrix> decode_generators(const Json& j, const std::string& path = "$");

contraction::ContractionCertificate decode_contraction_certificate(const Json& j, const std::string& path = "$");
unischottky::SchottkySystem decode_system(const Json& j, const std::string& path = "$");

quadratic::CirclePoint decode_circle_point(const Json& j, const std::string& path = "$");
quadratic::Arc decode_arc(const Json& j, const std::string& path = "$");
// {"generators": [...], "arcs": [{"plus": [s, e], "minus": [s, e]}, ...]};
// without "arcs" the table is built by build_precise_table.
sl2ht::PreciseTable decode_precise_table(const Json& j, const std::string& path = "$");
sl2ht::PPP decode_ppp(const Json& j, const std::string& path = "$");

}  // namespace schottky::json_io
