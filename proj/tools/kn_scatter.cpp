#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "knscatter/analytic.hpp"
#include "knscatter/backlund.hpp"
#include "knscatter/evolution.hpp"
#include "knscatter/fredholm.hpp"
#include "knscatter/grid.hpp"
#include "knscatter/io.hpp"
#include "knscatter/jost.hpp"

using namespace kn;
using io::json;

namespace {

struct Config {
  std::string command;
  std::vector<std::string> potentials;
  std::vector<std::string> k;
  std::optional<double> theta, N, eps, tol, T, dt;
  std::vector<double> lambda;
  std::string out;
  std::uint64_t seed = 0;
  std::string method = "ode";
  std::string expect;  // a: expected value of a(k)
  // gen
  std::string family = "gaussian";
  double amplitude = 1.0, width = 1.0, center = 0.0, chirp = 0.0, twist = 0.0, carrier = 0.0, band = 1.0;
  double L = 16.0;
  std::size_t n = 4096;
  std::string output;
};

json config_json(const Config& c) {
  json j;
  j["command"] = c.command;
  j["potential"] = c.potentials;
  j["k"] = c.k;
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  j["theta"] = opt(c.theta);
  j["N"] = opt(c.N);
  j["eps"] = opt(c.eps);
  j["tol"] = opt(c.tol);
  j["T"] = opt(c.T);
  j["dt"] = opt(c.dt);
  j["lambda"] = c.lambda;
  j["out"] = c.out;
  j["seed"] = c.seed;
  j["method"] = c.method;
  if (c.command == "a") j["expect"] = c.expect.empty() ? json(nullptr) : json(c.expect);
  if (c.command == "gen")
    j["family"] = {{"name", c.family}, {"amplitude", c.amplitude}, {"width", c.width}, {"center", c.center},
                   {"chirp", c.chirp}, {"twist", c.twist}, {"carrier", c.carrier}, {"band", c.band},
                   {"L", c.L}, {"n", c.n}};
  return j;
}

struct Outcome {
  json result;
  bool ok = true;
};

void write_out(const Config& c, const std::string& name, const std::string& text) {
  if (c.out.empty()) return;
  std::filesystem::create_directories(c.out);
  io::write_text((std::filesystem::path(c.out) / name).string(), text);
}

Potential the_potential(const Config& c) {
  if (c.potentials.empty()) throw Error(Errc::usage, "--potential FILE is required");
  return io::read_potential(c.potentials.front());
}

std::vector<cplx> k_points(const Config& c) {
  std::vector<cplx> ks;
  for (const auto& s : c.k) ks.push_back(io::parse_cplx(s));
  return ks;
}

double tol_or(const Config& c, double d) {
  const double t = c.tol.value_or(d);
  if (!(t > 0.0)) throw Error(Errc::usage, "--tol must be positive");
  return t;
}

Outcome run_gen(const Config& c) {
  const GridSpec g = GridSpec::make(c.L, c.n);
  Family f;
  if (c.family == "zero") f.v = ZeroFamily{};
  else if (c.family == "gaussian") f.v = GaussianFamily{c.amplitude, c.width, c.center, c.chirp, c.twist};
  else if (c.family == "algebraic") f.v = AlgebraicSolitonFamily{};
  else if (c.family == "random") f.v = RandomBandlimitedFamily{c.seed, c.band, c.amplitude};
  else throw Error(Errc::usage, "unknown family '" + c.family + "'");
  if (c.carrier != 0.0) f = modulated(f, c.carrier);
  const Potential q = sample_potential(f, g);
  const json pj = io::to_json(q);
  if (!c.output.empty()) {
    const auto parent = std::filesystem::path(c.output).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    io::write_text(c.output, pj.dump() + "\n");
  }
  write_out(c, "potential.json", pj.dump() + "\n");
  Outcome o;
  o.result = io::to_json(mass_report(q), conserved(q), tail_profile(q));
  if (c.output.empty() && c.out.empty()) o.result["potential"] = pj;
  return o;
}

Outcome run_a(const Config& c) {
  const Potential q = the_potential(c);
  auto ks = k_points(c);
  if (ks.empty()) throw Error(Errc::usage, "--k is required");
  const double tol = tol_or(c, 1e-5);
  if (c.method != "ode" && c.method != "det" && c.method != "both")
    throw Error(Errc::usage, "--method must be ode, det or both");
  std::optional<cplx> expected;
  if (!c.expect.empty()) expected = io::parse_cplx(c.expect);
  Outcome o;
  o.result = json::array();
  for (cplx k : ks) {
    json e;
    e["k"] = io::cplx_json(k);
    std::optional<cplx> a_ode, a_det;
    if (c.method != "det") {
      const JostData d = k.imag() == 0.0 && k.real() != 0.0
                             ? jost_matrix(q, SpectralPoint::from_k(k), false)
                             : transmission_a_ode(q, k);
      e["ode"] = io::to_json(d);
      a_ode = d.a;
    }
    if (c.method != "ode") {
      const FredholmReport r = det_a(q, k);
      e["det"] = io::to_json(r);
      a_det = r.det;
    }
    if (a_ode && a_det) {
      const double diff = std::abs(*a_ode - *a_det);
      e["difference"] = diff;
      e["within_tolerance"] = diff <= tol * (1.0 + std::abs(*a_ode));
      o.ok = o.ok && diff <= tol * (1.0 + std::abs(*a_ode));
    }
    if (expected) {
      double dev = 0.0;
      for (const auto& v : {a_ode, a_det})
        if (v) dev = std::max(dev, std::abs(*v - *expected));
      e["deviation_from_expected"] = dev;
      o.ok = o.ok && dev <= tol;
    }
    o.result.push_back(e);
  }
  return o;
}

Outcome run_zeros(const Config& c) {
  const Potential q = the_potential(c);
  const Transmission a(q, c.method == "det" ? Transmission::Route::det : Transmission::Route::ode);
  const double theta = c.theta.value_or(pi / 4);
  const RadialRange rr = ray_range(q);
  const double rb = std::max(1.05 * zero_radius_bound(a.sup_norm(), theta), 2.0 * rr.r_min);
  const Region region = Region::sector(theta, pi, rr.r_min, rb);
  const ZeroSet zs = q.mass() == 0.0 ? ZeroSet{{}, region, 0} : locate_zeros(a, region, tol_or(c, 1e-3));
  Outcome o;
  o.result = io::to_json(zs);
  return o;
}

Outcome run_mass_id(const Config& c) {
  const Potential q = the_potential(c);
  const Transmission a(q);
  const MassIdentityReport r = mass_identity_check(a, c.theta.value_or(pi / 2));
  Outcome o;
  o.result = io::to_json(r);
  o.ok = r.residual <= tol_or(c, 1e-2) * r.mass;
  std::ostringstream csv;
  io::write_ray_csv(csv, r.profile);
  write_out(c, "ray.csv", csv.str());
  return o;
}

Outcome run_trace(const Config& c) {
  const Potential q = the_potential(c);
  const Transmission a(q);
  const TraceReport r = trace_formula_check(a);
  Outcome o;
  o.result = io::to_json(r);
  o.ok = r.residual <= tol_or(c, 1e-2) * r.mass && !r.sigma_flag;
  std::ostringstream csv;
  io::write_measure_csv(csv, r.measure);
  write_out(c, "measure.csv", csv.str());
  return o;
}

Outcome run_backlund(const Config& c) {
  const Potential q = the_potential(c);
  const Transmission a(q);
  cplx guess;
  auto ks = k_points(c);
  if (!ks.empty()) {
    guess = ks.front();
  } else {
    const OrderReport ord = order(a);
    if (ord.order == 0) throw Error(Errc::not_a_zero, "a has no zero in the sector pi/4 < arg k < pi");
    const ZeroSet zs = locate_zeros(a, ord.region);
    guess = zs.zeros.front().z;
    for (const auto& z : zs.zeros)
      if (std::arg(z.z) > std::arg(guess)) guess = z.z;
  }
  const BoundState bs = bound_state(a, guess);
  const Potential B = backlund_transform(q, bs);
  BacklundTolerances tol;
  if (c.tol) tol.mass_rel = tol.rem_zeros = tol_or(c, 1e-4);
  const BacklundChecks ch = backlund_checks(q, bs, B, tol);
  Outcome o;
  o.result["bound_state"] = io::to_json(bs);
  o.result["checks"] = io::to_json(ch);
  o.ok = ch.passed;
  if (c.N) {
    if (!is_dyadic(*c.N)) throw Error(Errc::usage, "--N must be dyadic");
    const SurgeryReport s = tail_surgery_check(q, B, bs.z, *c.N);
    o.result["surgery"] = io::to_json(s);
    o.ok = o.ok && s.holds;
  }
  write_out(c, "transformed.json", io::to_json(B).dump() + "\n");
  return o;
}

Outcome run_reduce(const Config& c) {
  const Potential q = the_potential(c);
  ReductionOptions ro;
  if (c.tol) ro.rem_zeros_tol = tol_or(c, 1e-4);
  const auto chain = reduce_to_order_zero(q, ro);
  const Potential& last = chain.empty() ? q : chain.back().potential;
  const Transmission a(last);
  const LowerBoundReport lb = lower_bound_and_zero_free_checks(a, 0, c.eps.value_or(0.25),
                                                               c.N.value_or(spectral_ceiling(last)), {});
  Outcome o;
  o.result["chain"] = io::to_json(chain);
  o.result["final_mass"] = last.mass();
  o.result["lower_bound"] = {{"min_abs_a", lb.min_abs_a}, {"kappa_at_min", lb.kappa_at_min},
                             {"bound", lb.bound}, {"holds", lb.holds}};
  o.ok = lb.holds;
  write_out(c, "chain.json", io::to_json(chain).dump(2) + "\n");
  write_out(c, "final_potential.json", io::to_json(last).dump() + "\n");
  return o;
}

Outcome run_evolve(const Config& c) {
  const Potential q = the_potential(c);
  const double T = c.T.value_or(1.0);
  EvolutionOptions eo;
  if (c.dt) eo.dt = *c.dt;
  auto ks = k_points(c);
  if (ks.empty()) ks = {cplx(0, 0.5), cplx(0, 1), cplx(0, 2)};
  const std::vector<double> lambdas = c.lambda.empty() ? std::vector<double>{1.0} : c.lambda;
  const IsospectralReport r = isospectral_check(q, T, ks, lambdas, eo);
  const EvolutionState& st = r.state;
  const double tol = tol_or(c, 1e-4);
  Outcome o;
  o.result = io::to_json(r);
  // The stated b law is reported but does not decide the status.
  o.result["b_phase_within_1e-3"] = r.b_residual <= 1e-3;
  o.ok = r.a_residual <= tol && r.drift.dM <= 1e-6;
  std::ostringstream csv;
  io::write_drift_csv(csv, st.history);
  write_out(c, "drift.csv", csv.str());
  write_out(c, "evolved.json", io::to_json(st.q).dump() + "\n");
  return o;
}

Outcome run_equi(const Config& c) {
  if (c.potentials.empty()) throw Error(Errc::usage, "--potential FILE is required (repeatable)");
  const double eps = c.eps.value_or(0.25);
  Outcome o;
  json members = json::array();
  double worst_threshold = 0.0;
  double sup_mass = 0.0;
  for (const auto& path : c.potentials) {
    const Potential q = io::read_potential(path);
    json m;
    m["potential"] = path;
    m["mass"] = q.mass();
    sup_mass = std::max(sup_mass, q.mass());
    json tails = json::array();
    for (const auto& t : tail_profile(q)) tails.push_back({{"N", t.N}, {"high_fraction", t.high_fraction}});
    m["tail_profile"] = std::move(tails);
    const double thr = equicontinuity_threshold(q, eps);
    m["equicontinuity_threshold"] = thr;
    worst_threshold = std::max(worst_threshold, thr);
    try {
      const double N0 = c.N.value_or(1.0 / 256.0);
      const GapResult gap = find_spectral_gap(q, eps, N0);
      m["gap"] = io::to_json(gap);
      m["winding"] = io::to_json(winding_asymptotics_check(q, eps, gap.N1));
    } catch (const Error& e) {
      if (e.code() != Errc::no_gap_found) throw;
      m["gap"] = nullptr;
      m["gap_error"] = e.what();
      o.ok = false;
    }
    members.push_back(std::move(m));
  }
  o.result["eps"] = eps;
  o.result["sup_mass"] = sup_mass;
  o.result["family_threshold"] = worst_threshold;  // one N serving every member
  o.result["members"] = std::move(members);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kn_scatter: direct scattering for the Kaup-Newell system"};
  app.require_subcommand(1);
  Config cfg;

  auto common = [&](CLI::App* s) {
    s->add_option("--potential", cfg.potentials, "potential JSON file (repeatable for equi-report)");
    s->add_option("--k", cfg.k, "spectral point RE+IMi (repeatable)");
    s->add_option("--theta", cfg.theta, "ray or sector angle in radians");
    s->add_option("--N", cfg.N, "dyadic frequency");
    s->add_option("--eps", cfg.eps, "dyadic epsilon");
    s->add_option("--tol", cfg.tol, "tolerance deciding the exit status");
    s->add_option("--out", cfg.out, "directory for reports and artifacts");
    s->add_option("--seed", cfg.seed, "seed for random families");
    s->add_option("--method", cfg.method, "ode, det or both");
  };

  struct Sub {
    const char* name;
    const char* help;
    Outcome (*run)(const Config&);
  };
  const Sub subs[] = {
      {"gen", "sample a potential family", run_gen},
      {"a", "transmission coefficient a(k)", run_a},
      {"zeros", "locate zeros of a in a sector", run_zeros},
      {"mass-id", "mass = zeros + winding along a ray", run_mass_id},
      {"trace", "trace formula check", run_trace},
      {"backlund", "bound state, transform and identity checks", run_backlund},
      {"reduce", "iterate the transform down to order zero", run_reduce},
      {"evolve", "DNLS flow and isospectral check", run_evolve},
      {"equi-report", "tail profiles, gaps and winding asymptotics over a family", run_equi},
  };
  std::vector<CLI::App*> apps;
  for (const auto& s : subs) {
    CLI::App* sa = app.add_subcommand(s.name, s.help);
    common(sa);
    apps.push_back(sa);
  }
  CLI::App* gen = apps[0];
  gen->add_option("--family", cfg.family, "zero, gaussian, algebraic or random");
  gen->add_option("--amplitude", cfg.amplitude);
  gen->add_option("--width", cfg.width);
  gen->add_option("--center", cfg.center);
  gen->add_option("--chirp", cfg.chirp);
  gen->add_option("--twist", cfg.twist);
  gen->add_option("--carrier", cfg.carrier);
  gen->add_option("--band", cfg.band);
  gen->add_option("--L", cfg.L, "half length of the grid");
  gen->add_option("--n", cfg.n, "grid points");
  gen->add_option("--output", cfg.output, "write the potential JSON to this file");
  apps[1]->add_option("--expect", cfg.expect, "expected a(k); the status then also requires |a - expect| <= tol");
  CLI::App* ev = apps[7];
  ev->add_option("--T", cfg.T, "final time (negative runs backwards)");
  ev->add_option("--dt", cfg.dt, "time step");
  ev->add_option("--lambda", cfg.lambda, "real lambda for the b check (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::size_t which = 0;
  for (std::size_t i = 0; i < apps.size(); ++i)
    if (apps[i]->parsed()) which = i;
  cfg.command = subs[which].name;

  json report;
  report["command"] = cfg.command;
  report["version"] = kVersion;
  report["config"] = config_json(cfg);
  int status = 0;
  try {
    const Outcome o = subs[which].run(cfg);
    report["status"] = o.ok ? "ok" : "fail";
    report["within_tolerance"] = o.ok;
    report["result"] = o.result;
    status = o.ok ? 0 : 1;
  } catch (const Error& e) {
    if (e.code() == Errc::usage) {
      std::cerr << "usage error: " << e.what() << "\n";
      return 2;
    }
    report["status"] = "error";
    report["error"] = {{"code", errc_name(e.code())}, {"message", e.what()}};
    status = 1;
  } catch (const std::exception& e) {
    report["status"] = "error";
    report["error"] = {{"code", "internal"}, {"message", e.what()}};
    status = 1;
  }
  const std::string text = report.dump(2) + "\n";
  std::cout << text;
  try {
    write_out(cfg, "report.json", text);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return status;
}
