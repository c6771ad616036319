#include "knscatter/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace kn::io {

namespace {

json num(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

json cplx_list(const std::vector<cplx>& v) {
  json a = json::array();
  for (cplx z : v) a.push_back(cplx_json(z));
  return a;
}

}  // namespace

json cplx_json(cplx z) { return json::array({num(z.real()), num(z.imag())}); }

cplx cplx_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) throw Error(Errc::io, "complex value must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

cplx parse_cplx(const std::string& raw) {
  std::string s;
  for (char c : raw)
    if (c != ' ') s += c;
  if (s.empty()) throw Error(Errc::usage, "empty complex number");
  auto to_d = [&](const std::string& t) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      throw Error(Errc::usage, "cannot parse complex number '" + raw + "'");
    }
    if (used != t.size()) throw Error(Errc::usage, "cannot parse complex number '" + raw + "'");
    return v;
  };
  const char last = s.back();
  if (last != 'i' && last != 'j') return {to_d(s), 0.0};
  s.pop_back();
  // Split at the last sign that is not an exponent sign or the leading sign.
  std::size_t cut = std::string::npos;
  for (std::size_t p = s.size(); p-- > 1;) {
    if ((s[p] == '+' || s[p] == '-') && s[p - 1] != 'e' && s[p - 1] != 'E') {
      cut = p;
      break;
    }
  }
  auto imag_of = [&](const std::string& t) {
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    return to_d(t);
  };
  if (cut == std::string::npos) return {0.0, imag_of(s)};
  return {to_d(s.substr(0, cut)), imag_of(s.substr(cut))};
}

json to_json(const Potential& q) {
  json j;
  j["grid"] = {{"L", q.grid.L}, {"n", q.grid.n}};
  j["decay_tag"] = decay_name(q.decay);
  if (q.decay == DecayTag::algebraic) j["tail_scale"] = q.tail_scale;
  json s = json::array();
  for (cplx z : q.samples) s.push_back(json::array({z.real(), z.imag()}));
  j["samples"] = std::move(s);
  return j;
}

Potential potential_from_json(const json& j) {
  try {
    Potential q;
    q.grid = GridSpec::make(j.at("grid").at("L").get<double>(), j.at("grid").at("n").get<std::size_t>());
    q.decay = decay_from_name(j.value("decay_tag", std::string("schwartz")));
    q.tail_scale = j.value("tail_scale", 1.0);
    const json& s = j.at("samples");
    if (s.size() != q.grid.n) throw Error(Errc::io, "sample count does not match grid.n");
    q.samples.reserve(q.grid.n);
    for (const auto& v : s) q.samples.push_back(cplx_from_json(v));
    return q;
  } catch (const json::exception& e) {
    throw Error(Errc::io, std::string("malformed potential JSON: ") + e.what());
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write " + path);
  out << text;
  if (!out) throw Error(Errc::io, "write failed for " + path);
}

Potential read_potential(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw Error(Errc::io, path + ": " + e.what());
  }
  return potential_from_json(j);
}

void write_potential(const std::string& path, const Potential& q) { write_text(path, to_json(q).dump() + "\n"); }

json to_json(const MassReport& m, const Conserved& c, const std::vector<TailEntry>& tails) {
  json j;
  j["M"] = num(m.total);
  j["M_interior"] = num(m.interior);
  j["M_tail"] = num(m.tail);
  j["parseval_residual"] = num(m.parseval_residual);
  j["H1"] = num(c.H1);
  j["H2"] = num(c.H2);
  json t = json::array();
  for (const auto& e : tails) t.push_back({{"N", e.N}, {"high_fraction", num(e.high_fraction)}});
  j["tail_profile"] = std::move(t);
  return j;
}

json to_json(const JostData& d) {
  json j;
  j["k"] = cplx_json(d.point.k);
  j["a"] = cplx_json(d.a);
  j["b"] = d.b ? cplx_json(*d.b) : json(nullptr);
  j["method"] = method_name(d.method);
  j["err_est"] = num(d.err_est);
  return j;
}

json to_json(const FredholmReport& r) {
  json j;
  j["k"] = cplx_json(r.k);
  j["det"] = cplx_json(r.det);
  j["err_est"] = num(r.err_est);
  j["xi_cutoff"] = num(r.xi_cutoff);
  j["hs_norm"] = num(r.hs_norm);
  j["paper_bound"] = num(r.paper_bound);
  j["size"] = r.size;
  j["cutoff_too_small"] = r.cutoff_too_small;
  return j;
}

json to_json(const Zero& z) {
  return {{"z", cplx_json(z.z)},
          {"arg_z", num(std::arg(z.z))},
          {"multiplicity", z.multiplicity},
          {"newton_residual", num(z.newton_residual)},
          {"abs_a", num(z.abs_a)},
          {"cluster_unresolved", z.cluster_unresolved}};
}

namespace {
json region_json(const Region& r) {
  if (r.kind == Region::Kind::sector)
    return {{"kind", "sector"}, {"theta_min", r.theta_min}, {"theta_max", r.theta_max},
            {"r_min", num(r.r_min)}, {"r_max", num(r.r_max)}};
  return {{"kind", "rectangle"}, {"lo", cplx_json(r.lo)}, {"hi", cplx_json(r.hi)}};
}
}  // namespace

json to_json(const ZeroSet& zs) {
  json j;
  j["region"] = region_json(zs.region);
  j["total_count"] = zs.total_count;
  json a = json::array();
  for (const auto& z : zs.zeros) a.push_back(to_json(z));
  j["zeros"] = std::move(a);
  return j;
}

json to_json(const ContourCount& c) {
  return {{"count", c.count},
          {"unrounded", num(c.unrounded)},
          {"arg_winding", num(c.arg_winding)},
          {"min_abs_a", num(c.min_abs_a)},
          {"segments", c.segments}};
}

json to_json(const MassIdentityReport& r) {
  return {{"theta", r.theta},
          {"mass", num(r.mass)},
          {"ell", r.ell},
          {"zero_term", num(r.zero_term)},
          {"ray_integral", num(r.ray_integral)},
          {"low_correction", num(r.low_correction)},
          {"high_correction", num(r.high_correction)},
          {"r_min", num(r.r_min)},
          {"r_max", num(r.r_max)},
          {"min_abs_a", num(r.min_abs_a)},
          {"residual", num(r.residual)},
          {"relative_residual", num(r.mass > 0 ? r.residual / r.mass : 0.0)}};
}

json to_json(const TraceReport& r) {
  json j;
  j["mass"] = num(r.mass);
  j["zero_sum"] = num(r.zero_sum);
  j["winding_term"] = num(r.winding_term);
  j["residual"] = num(r.residual);
  j["relative_residual"] = num(r.mass > 0 ? r.residual / r.mass : 0.0);
  j["sigma_flag"] = r.sigma_flag;
  j["quadrature_converged"] = r.quadrature_converged;
  j["arg_floor"] = r.arg_floor;
  j["min_abs_a_real_line"] = num(r.measure.min_abs_a);
  j["measure_integral"] = num(r.measure.integral);
  j["measure_integral_coarse"] = num(r.measure.coarse_integral);
  j["zeros"] = to_json(r.zeros);
  return j;
}

json to_json(const BoundState& bs) {
  return {{"z", cplx_json(bs.z)},
          {"arg_z", num(std::arg(bs.z))},
          {"match_residual", num(bs.match_residual)},
          {"match_x_index", bs.match_index},
          {"abs_a", num(bs.abs_a)},
          {"abs_a_det", bs.abs_a_det >= 0 ? num(bs.abs_a_det) : json(nullptr)},
          {"newton_step", num(bs.newton_step)},
          {"min_abs_psi", num(bs.min_abs_psi)},
          {"end_abs_psi", num(bs.end_abs_psi)}};
}

json to_json(const BacklundChecks& c) {
  json j;
  j["z"] = cplx_json(c.z);
  j["mass_before"] = num(c.mass_before);
  j["mass_after"] = num(c.mass_after);
  j["mass_residual"] = num(c.mass_residual);
  j["mass_tol"] = num(c.mass_tol);
  j["rem_zeros_residual"] = num(c.rem_zeros_residual);
  json pts = json::array();
  for (std::size_t m = 0; m < c.k.size(); ++m)
    pts.push_back({{"k", cplx_json(c.k[m])}, {"a_q", cplx_json(c.a_q[m])}, {"a_B", cplx_json(c.a_B[m])}});
  j["rem_zeros_points"] = std::move(pts);
  j["dG_residual"] = num(c.dG_residual);
  j["dS_residual"] = num(c.dS_residual);
  j["identity_G2"] = num(c.identity_G2);
  j["identity_GS"] = num(c.identity_GS);
  j["local_mass"] = num(c.local_mass);
  j["unimodular"] = num(c.unimodular);
  j["S_excess"] = num(c.S_excess);
  j["d_lower_violation"] = num(c.d_lower_violation);
  j["G_left"] = num(c.G_left);
  j["G_right"] = num(c.G_right);
  j["normalization"] = num(c.normalization);
  j["passed"] = c.passed;
  return j;
}

json to_json(const SurgeryReport& r) {
  return {{"N", r.N},         {"z_abs", num(r.z_abs)}, {"q_norm", num(r.q_norm)},
          {"lhs1", num(r.lhs1)}, {"lhs2", num(r.lhs2)}, {"bound", num(r.bound)},
          {"constant", r.constant}, {"vacuous", r.vacuous}, {"holds", r.holds}};
}

json to_json(const std::vector<ChainStep>& chain) {
  json a = json::array();
  for (const auto& s : chain)
    a.push_back({{"z", cplx_json(s.z)},
                 {"arg_z", num(s.arg_z)},
                 {"mass_before", num(s.mass_before)},
                 {"mass_after", num(s.mass_after)},
                 {"rem_zeros_residual", num(s.rem_zeros_residual)},
                 {"order_before", s.order_before},
                 {"order_after", s.order_after},
                 {"match_residual", num(s.match_residual)}});
  return a;
}

json to_json(const IsospectralReport& r) {
  json j;
  j["T"] = r.T;
  j["steps"] = r.steps;
  j["dt"] = num(r.dt);
  j["k"] = cplx_list(r.k);
  j["a0"] = cplx_list(r.a0);
  j["aT"] = cplx_list(r.aT);
  j["a_residual"] = num(r.a_residual);
  j["lambda"] = r.lambda;
  j["b0"] = cplx_list(r.b0);
  j["bT"] = cplx_list(r.bT);
  j["b_residual"] = num(r.b_residual);
  j["b_residual_conjugate_law"] = num(r.b_residual_conjugate);
  j["drift"] = {{"dM", num(r.drift.dM)}, {"dH1", num(r.drift.dH1)}, {"dH2", num(r.drift.dH2)}};
  return j;
}

json to_json(const GapResult& g) {
  return {{"N0", g.N0},
          {"N1", g.N1},
          {"annulus_norm", num(g.annulus_norm)},
          {"threshold", num(g.threshold)},
          {"search_hi", num(g.search_hi)}};
}

json to_json(const WindingReport& w) {
  json j;
  j["eps"] = w.eps;
  j["N"] = w.N;
  j["mass"] = num(w.mass);
  j["high_tail"] = num(w.high_tail);
  j["low_tail"] = num(w.low_tail);
  j["hf_holds"] = w.hf_holds;
  j["lf_holds"] = w.lf_holds;
  j["part_i"] = w.part_i ? num(*w.part_i) : json(nullptr);
  j["part_ii"] = w.part_ii ? num(*w.part_ii) : json(nullptr);
  j["gap"] = to_json(w.gap);
  j["gap_holds"] = w.gap_holds;
  j["factorization"] = num(w.factorization);
  j["comparison"] = num(w.comparison);
  return j;
}

json error_json(const std::string& code, const std::string& message) {
  return {{"status", "error"}, {"error", {{"code", code}, {"message", message}}}};
}

namespace {
void row(std::ostream& os, double a, double b, double c) {
  os << std::setprecision(17) << a << ',' << b << ',' << c << '\n';
}
}  // namespace

void write_drift_csv(std::ostream& os, const std::vector<DriftSample>& history) {
  os << "t,dM,dH1,dH2\n";
  for (const auto& h : history) {
    os << std::setprecision(17) << h.t << ',';
    row(os, h.drift.dM, h.drift.dH1, h.drift.dH2);
  }
}

void write_measure_csv(std::ostream& os, const BoundaryMeasure& m) {
  os << "s,abs_a,arg_a\n";
  for (std::size_t i = 0; i < m.s.size(); ++i)
    row(os, m.s[i], std::exp(m.log_abs[i]), i < m.arg.size() ? m.arg[i] : NAN);
}

void write_ray_csv(std::ostream& os, const std::vector<std::pair<double, cplx>>& p) {
  os << "kappa,abs_a,arg_a\n";
  for (const auto& [r, a] : p) row(os, r, std::abs(a), std::arg(a));
}

}  // namespace kn::io
