#include "report.hpp"

#include <cmath>

#include "sio/error.hpp"

namespace sio::cli {

namespace {

template <class T>
Json optional_number(const std::optional<T>& v) {
  return v ? number(static_cast<double>(*v)) : Json(nullptr);
}

Json balance_json(const std::vector<BalanceEntry>& entries) {
  Json a = Json::array();
  for (const auto& b : entries) {
    a.push_back({{"corner", b.corner},
                 {"mass", b.mass},
                 {"mass1", b.mass1},
                 {"mass2", b.mass2},
                 {"deviation", b.deviation}});
  }
  return a;
}

}  // namespace

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json to_json(const Grid& g) { return {{"half_width", g.half_width}, {"points", g.points}}; }

Json to_json(const SchurBound& b) {
  return {{"bound", number(b.bound)},
          {"method", std::string(to_string(b.method))},
          {"grid", to_json(b.grid)},
          {"error_estimate", number(b.error_estimate)},
          {"power", optional_number(b.power)},
          {"base_bound", optional_number(b.base_bound)}};
}

Json to_json(const MomentReport& r) {
  Json moments = Json::array();
  for (const auto& [idx, v] : r.moments) moments.push_back({{"index", idx}, {"value", number(v)}});
  return {{"order", r.order},
          {"mass", number(r.mass)},
          {"moments", moments},
          {"fitted_slope", number(r.fitted_slope)},
          {"fit_s", r.fit_s},
          {"fit_abs_m", r.fit_abs_m}};
}

Json to_json(const NormEstimate& e) {
  Json history = Json::array();
  for (double h : e.history) history.push_back(number(h));
  return {{"value", number(e.value)},
          {"kind", std::string(to_string(e.kind))},
          {"p", e.p},
          {"witness",
           {{"f", e.f}, {"g", e.g}, {"support_f", e.support_f}, {"support_g", e.support_g}}},
          {"iterations", e.iterations},
          {"residual", number(e.residual)},
          {"history", history}};
}

Json to_json(const Factor2Report& r) {
  return {{"restricted", to_json(r.restricted)},
          {"operator", to_json(r.op)},
          {"ratio", number(r.ratio)},
          {"holds", r.holds}};
}

Json to_json(const SeparatedPartition& p) {
  Json removed = Json::array();
  for (const auto& b : p.removed) {
    removed.push_back({{"center", b.center}, {"radius", b.radius}, {"removed_from", b.removed_from}, {"mass", b.mass}});
  }
  return {{"level", p.level},
          {"dimension", p.dimension},
          {"fine_side", p.fine_side},
          {"tau", p.tau},
          {"alpha", p.alpha},
          {"separation", p.separation},
          {"retries", p.retries},
          {"e1", p.e1},
          {"e2", p.e2},
          {"atoms1", p.atoms1},
          {"atoms2", p.atoms2},
          {"removed", removed},
          {"balance", balance_json(p.balance)},
          {"max_deviation", p.max_deviation()}};
}

SeparatedPartition partition_from_json(const Json& j) {
  try {
    SeparatedPartition p;
    p.level = j.at("level").get<int>();
    p.dimension = j.at("dimension").get<std::size_t>();
    p.fine_side = j.at("fine_side").get<double>();
    p.tau = j.at("tau").get<double>();
    p.alpha = j.at("alpha").get<double>();
    p.separation = j.at("separation").get<double>();
    p.retries = j.at("retries").get<int>();
    p.e1 = j.at("e1").get<std::vector<Point>>();
    p.e2 = j.at("e2").get<std::vector<Point>>();
    p.atoms1 = j.at("atoms1").get<std::vector<Point>>();
    p.atoms2 = j.at("atoms2").get<std::vector<Point>>();
    for (const auto& b : j.at("removed")) {
      p.removed.push_back({b.at("center").get<Point>(), b.at("radius").get<double>(), b.at("removed_from").get<int>(),
                           b.at("mass").get<double>()});
    }
    for (const auto& b : j.at("balance")) {
      p.balance.push_back({b.at("corner").get<Point>(), b.at("mass").get<double>(), b.at("mass1").get<double>(),
                           b.at("mass2").get<double>(), b.at("deviation").get<double>()});
    }
    p.index();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::schema, std::string("invalid partition JSON: ") + e.what());
  }
}

Json to_json(const TruncationStudy& s) {
  Json rows = Json::array();
  for (const auto& r : s.rows) {
    rows.push_back({{"eps", r.eps},
                    {"norm_truncated", number(r.norm_truncated)},
                    {"norm_smooth", number(r.norm_smooth)},
                    {"norm_psi_part", number(r.norm_psi_part)},
                    {"norm_chi", number(r.norm_chi)},
                    {"norm_sectorial", number(r.norm_sectorial)},
                    {"annulus_entries", r.annulus_entries},
                    {"domination_margin", optional_number(r.domination_margin)},
                    {"psi_dominated", r.psi_dominated},
                    {"split_identity_error", number(r.split_identity_error)},
                    {"triangle_holds", r.triangle_holds},
                    {"chain_bound", optional_number(r.chain_bound)},
                    {"chain_holds", r.chain_holds}});
  }
  return {{"restricted_norm", number(s.restricted_norm)}, {"schur_bound", optional_number(s.schur_bound)}, {"rows", rows}};
}

Json to_json(const MuckenhouptReport& r) {
  return {{"convention", "diam B = 2 radius; value = (2 radius)^-alpha mu(B)^(1/p') nu(B)^(1/p) over open balls"},
          {"constant", number(r.constant)},
          {"witness_ball", {{"center", r.witness_center}, {"radius", r.witness_radius}}},
          {"witness_mu", r.witness_mu},
          {"witness_nu", r.witness_nu},
          {"p", r.p},
          {"alpha", r.alpha},
          {"scan", {{"centers", r.centers}, {"radii", r.radii}}}};
}

Json to_json(const NecessityReport& r) {
  Json balls = Json::array();
  for (const auto& b : r.balls) {
    balls.push_back({{"center", b.center},
                     {"eps", b.eps},
                     {"mu_mass", b.mu_mass},
                     {"nu_mass", b.nu_mass},
                     {"ap_value", number(b.ap_value)},
                     {"form", number(b.form)},
                     {"lower", number(b.lower)},
                     {"upper", number(b.upper)},
                     {"chain_holds", b.chain_holds},
                     {"pairs_checked", b.pairs_checked},
                     {"pointwise_violations", b.pointwise_violations},
                     {"min_pointwise_ratio", number(b.min_pointwise_ratio)}});
  }
  return {{"p", r.p},
          {"alpha", r.alpha},
          {"d", r.d},
          {"sphere_inf", number(r.sphere_inf)},
          {"c_prime", number(r.c_prime)},
          {"schur_bound", number(r.schur_bound)},
          {"restricted_norm", number(r.restricted_norm)},
          {"restricted_kind", std::string(to_string(r.restricted_kind))},
          {"ap", to_json(r.ap)},
          {"ratio", number(r.ratio)},
          {"hypothesis_samples", r.hypothesis_samples},
          {"balls", balls}};
}

}  // namespace sio::cli
