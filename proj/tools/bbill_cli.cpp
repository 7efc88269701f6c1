// Command-line front end: bbill <command> [options]
//
// Every command assembles a JSON config from --config (optional) and its flags,
// validates it, runs, and writes a JSON document {version, command, config,
// result} to stdout or --out. Bulk series go to --csv with the config on a
// leading '#' line. Exit codes: 0 ok, 1 domain/precondition, 2 convergence,
// 64 usage.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bbill/bbill.hpp"
#include "bbill/io.hpp"

namespace {

using bbill::json;

constexpr int kExitDomain = 1;
constexpr int kExitConvergence = 2;
constexpr int kExitUsage = 64;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Kind { real, integer, seed, profile, text };

struct Param {
  std::string name;
  Kind kind;
  std::string help;
  json fallback = nullptr;  // null: required unless optional
  bool optional = false;
};

struct Command {
  std::string name;
  std::string help;
  std::vector<Param> params;
  std::function<json(const json&, std::ostream* csv)> run;
  std::string csv_help;
};

// ---- config access ---------------------------------------------------------

double real(const json& c, const std::string& k) { return c.at(k).get<double>(); }
long integer(const json& c, const std::string& k) { return c.at(k).get<long>(); }
bool has(const json& c, const std::string& k) { return c.contains(k) && !c.at(k).is_null(); }

bbill::RadiusProfile profile(const json& c) { return bbill::profile_from_json(c.at("profile")); }

std::optional<double> working_sigma(const json& c) {
  if (has(c, "sigma")) return real(c, "sigma");
  return std::nullopt;
}

bbill::GenFunContext context(const json& c) {
  return bbill::make_context(profile(c), real(c, "eps"), real(c, "c"), working_sigma(c),
                             static_cast<int>(integer(c, "grid_n")));
}

json convert(const Param& p, const std::string& raw) {
  try {
    std::size_t used = 0;
    switch (p.kind) {
      case Kind::real: {
        const double v = std::stod(raw, &used);
        if (used != raw.size()) break;
        return v;
      }
      case Kind::integer: {
        const long v = std::stol(raw, &used);
        if (used != raw.size()) break;
        return v;
      }
      case Kind::seed: {
        if (!raw.empty() && raw.front() == '-') break;
        const unsigned long long v = std::stoull(raw, &used);
        if (used != raw.size()) break;
        return static_cast<std::uint64_t>(v);
      }
      case Kind::profile: {
        std::string text = raw;
        if (!text.empty() && text.front() == '@') {
          std::ifstream in(text.substr(1));
          if (!in) throw UsageError("cannot read profile file " + text.substr(1));
          std::stringstream ss;
          ss << in.rdbuf();
          text = ss.str();
        }
        try {
          return json::parse(text);
        } catch (const json::parse_error&) {
          throw UsageError("--profile: not valid JSON");
        }
      }
      case Kind::text:
        return raw;
    }
  } catch (const std::invalid_argument&) {
  } catch (const std::out_of_range&) {
  }
  throw UsageError("--" + p.name + ": cannot parse '" + raw + "'");
}

// ---- commands ----------------------------------------------------------------

const Param kProfile{"profile", Kind::profile, "radius profile {\"mean\":M,\"harmonics\":[[k,d],...]} or @file"};
const Param kEps{"eps", Kind::real, "window parameter in (0, 1)", 0.5};
const Param kC{"c", Kind::real, "angular momentum"};
const Param kSigma{"sigma", Kind::real, "working strip width (needed for constant profiles)", nullptr, true};
const Param kGrid{"grid_n", Kind::integer, "sampling grid for sup-norms", 4096};
const Param kSeed{"seed", Kind::seed, "random seed (mandatory)"};

void csv_header(std::ostream* csv, const json& cfg) {
  if (csv) *csv << "# config: " << cfg.dump() << '\n';
}

json cmd_classify(const json& c, std::ostream*) {
  return bbill::verdict_to_json(
      bbill::classify(profile(c), real(c, "eps"), static_cast<int>(integer(c, "grid_n"))));
}

json cmd_find_member(const json& c, std::ostream*) {
  std::optional<double> hint;
  if (has(c, "m_hint")) hint = real(c, "m_hint");
  const auto m = bbill::find_member(static_cast<int>(integer(c, "k")), real(c, "delta"), real(c, "eps"), hint);
  return json{{"mean", m.mean},
              {"profile", bbill::profile_to_json(m.profile)},
              {"sufficient_mean_bound", m.sufficient_mean_bound},
              {"grid_steps", m.grid_steps},
              {"verdict", bbill::verdict_to_json(m.verdict)}};
}

json cmd_flight(const json& c, std::ostream* csv) {
  const auto p = profile(c);
  const double t0 = real(c, "t0");
  const double t1 = real(c, "t1");
  const auto b = bbill::bounds(p, real(c, "eps"), static_cast<int>(integer(c, "grid_n")));
  const auto w = bbill::validate_window(t0, t1, real(c, "c"), b);
  json out{{"window",
            json{{"angular", w.angular},
                 {"velocity", w.velocity},
                 {"curvature", w.curvature},
                 {"ok", w.ok()}}}};
  auto seg = bbill::flight_coeffs(t0, t1, real(c, "c"), p);
  out["segment"] = bbill::segment_to_json(seg);
  out["interior_margin"] = bbill::interior_margin(seg, p);
  if (csv) {
    csv_header(csv, c);
    bbill::write_segment_csv(*csv, seg, real(c, "dt"));
  }
  return out;
}

json state_json(const bbill::CylinderState& s) { return json{{"t", s.t}, {"K", s.K}}; }

json cmd_map(const json& c, std::ostream* csv) {
  const bbill::TwistMap map(context(c));
  bbill::CylinderState s{real(c, "t"), real(c, "K")};
  const long steps = integer(c, "steps");
  if (steps < 1) throw bbill::PreconditionError("map: steps must be positive");
  json orbit = json::array();
  if (csv) {
    csv_header(csv, c);
    *csv << "n,t,K,det\n";
    csv->precision(17);
  }
  for (long n = 0; n < steps; ++n) {
    const auto [img, j] = map.step_with_jacobian(s);
    const auto [plus, minus] = map.radial_velocity(s);
    orbit.push_back(json{{"t", s.t},
                         {"K", s.K},
                         {"rdot_plus", plus},
                         {"rdot_minus", minus},
                         {"jacobian", json::array({j.dt1_dt0, j.dt1_dK0, j.dK1_dt0, j.dK1_dK0})},
                         {"det", j.det()}});
    if (csv) *csv << n << ',' << s.t << ',' << s.K << ',' << j.det() << '\n';
    s = img;
    if (!map.in_domain(s)) break;
  }
  return json{{"sigma", map.sigma()},
              {"sigma_star", map.sigma_star()},
              {"steps", orbit},
              {"final", state_json(s)},
              {"final_in_domain", map.in_domain(s)}};
}

json cmd_simulate(const json& c, std::ostream* csv) {
  const auto ctx = context(c);
  const bbill::TwistMap map(ctx);
  const auto res = bbill::run(map, {real(c, "t"), real(c, "K")}, integer(c, "n"));
  if (csv) {
    csv_header(csv, c);
    bbill::write_bounces_csv(*csv, res.records);
  }
  if (has(c, "trajectory")) {
    std::ofstream traj(c.at("trajectory").get<std::string>());
    if (!traj) throw UsageError("cannot write trajectory file");
    csv_header(&traj, c);
    bbill::write_trajectory_csv(traj, bbill::trajectory_samples(res.records, real(c, "dt")));
  }
  double worst_reflection = 0.0;
  std::vector<double> times;
  for (const auto& r : res.records) {
    const double dr = ctx.profile.eval(r.t).dr;
    worst_reflection = std::max(worst_reflection, std::abs(r.rdot_plus + r.rdot_minus - 2 * dr));
    times.push_back(r.t);
  }
  times.push_back(res.final_state.t);
  const auto energy = res.records.empty() ? std::vector<bbill::EnergyPoint>{} : bbill::energy_series(res.records);
  double e_min = bbill::kInf, e_max = -bbill::kInf;
  for (const auto& e : energy) {
    e_min = std::min(e_min, e.energy);
    e_max = std::max(e_max, e.energy);
  }
  return json{{"bounces", res.records.size()},
              {"truncated", res.truncated},
              {"reason", res.reason},
              {"final", state_json(res.final_state)},
              {"reflection_residual", worst_reflection},
              {"el_residual", times.size() >= 3 ? bbill::num(bbill::el_residual_open(ctx, times)) : json(nullptr)},
              {"energy_range", json::array({bbill::num(e_min), bbill::num(e_max)})}};
}

json cmd_orbit(const json& c, std::ostream* csv) {
  const auto ctx = context(c);
  const auto orb = bbill::periodic_orbit(ctx, integer(c, "p"), integer(c, "q"),
                                         static_cast<int>(integer(c, "starts")),
                                         c.at("seed").get<std::uint64_t>());
  if (csv) {
    csv_header(csv, c);
    bbill::write_orbit_csv(*csv, orb);
  }
  return bbill::orbit_to_json(orb);
}

json cmd_hull(const json& c, std::ostream* csv) {
  const auto hs = bbill::hull_samples(context(c), real(c, "omega"), integer(c, "denom_cap"),
                                      static_cast<int>(integer(c, "starts")),
                                      c.at("seed").get<std::uint64_t>());
  if (csv) {
    csv_header(csv, c);
    csv->precision(17);
    *csv << "xi,phi,eta\n";
    for (std::size_t i = 0; i < hs.xs.size(); ++i) *csv << hs.xs[i] << ',' << hs.phi[i] << ',' << hs.eta[i] << '\n';
  }
  return bbill::hull_to_json(hs);
}

bbill::CertifyOptions cert_options(const json& c) {
  bbill::CertifyOptions o;
  o.omega_grid = static_cast<int>(integer(c, "omega_grid"));
  o.k_samples = static_cast<int>(integer(c, "k_samples"));
  o.grid_n = static_cast<int>(integer(c, "grid_n"));
  return o;
}

json cmd_certify(const json& c, std::ostream* csv) {
  const auto cert = bbill::certify(profile(c), real(c, "eps"), real(c, "c"), cert_options(c));
  if (csv) {
    csv_header(csv, c);
    bbill::write_a_grid_csv(*csv, cert);
  }
  return bbill::certificate_to_json(cert);
}

json cmd_c0(const json& c, std::ostream*) {
  const auto r = bbill::c0_search(profile(c), real(c, "eps"), cert_options(c),
                                  static_cast<int>(integer(c, "iterations")));
  return json{{"found", r.found},
              {"c0", r.c0},
              {"c_max", r.c_max},
              {"iterations", r.iterations},
              {"certify_calls", r.certify_calls},
              {"certified_at_half", r.half_certified},
              {"certified_at_quarter", r.quarter_certified},
              {"a_max_at_c0", bbill::num(r.a_max_at_c0)},
              {"diagnostics", r.diagnostics}};
}

json cmd_lyapunov(const json& c, std::ostream* csv) {
  const auto ctx = context(c);
  const bbill::TwistMap map(ctx);
  const long n = integer(c, "n");
  const long count = integer(c, "seeds");
  if (count < 1) throw bbill::PreconditionError("lyapunov: --seeds must be positive");
  double k_lo = 0.0, k_hi = 0.0;
  if (has(c, "k_lo") && has(c, "k_hi")) {
    k_lo = real(c, "k_lo");
    k_hi = real(c, "k_hi");
  } else {
    const auto cert = bbill::certify(ctx.profile, ctx.eps, ctx.c);
    if (!cert.certified) throw bbill::PreconditionError("lyapunov: no K range given and no certified band");
    k_lo = cert.k_lo;
    k_hi = cert.k_hi;
  }
  if (!(k_hi >= k_lo)) throw bbill::PreconditionError("lyapunov: k_hi < k_lo");
  const auto seed = c.at("seed").get<std::uint64_t>();
  std::vector<bbill::CylinderState> starts(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    auto rng = bbill::detail::seeded_engine(seed, static_cast<std::uint64_t>(i));
    const double t = bbill::detail::uniform01(rng);
    starts[static_cast<std::size_t>(i)] = {t, k_lo + (k_hi - k_lo) * bbill::detail::uniform01(rng)};
  }
  std::vector<bbill::LyapunovResult> res(starts.size());
  bbill::detail::parallel_for(starts.size(), [&](std::size_t i) { res[i] = bbill::lyapunov(map, starts[i], n); });
  json table = json::array();
  if (csv) {
    csv_header(csv, c);
    csv->precision(17);
    *csv << "seed,t0,K0,lambda,steps,truncated\n";
  }
  for (std::size_t i = 0; i < res.size(); ++i) {
    table.push_back(json{{"index", i},
                         {"t0", starts[i].t},
                         {"K0", starts[i].K},
                         {"lambda", res[i].lambda},
                         {"steps", res[i].steps},
                         {"truncated", res[i].truncated},
                         {"reason", res[i].reason}});
    if (csv) {
      *csv << i << ',' << starts[i].t << ',' << starts[i].K << ',' << res[i].lambda << ',' << res[i].steps
           << ',' << (res[i].truncated ? 1 : 0) << '\n';
    }
  }
  return json{{"k_range", json::array({k_lo, k_hi})}, {"table", table}};
}

json cmd_portrait(const json& c, std::ostream* csv) {
  const bbill::TwistMap map(context(c));
  const long nt = integer(c, "nt");
  const long nk = integer(c, "nk");
  const long n = integer(c, "n");
  if (nt < 1 || nk < 1 || n < 1) throw bbill::PreconditionError("portrait: grid sizes must be positive");
  const double k_lo = real(c, "k_lo");
  const double k_hi = real(c, "k_hi");
  std::vector<std::vector<bbill::CylinderState>> clouds(static_cast<std::size_t>(nt * nk));
  bbill::detail::parallel_for(clouds.size(), [&](std::size_t idx) {
    const long i = static_cast<long>(idx) / nk;
    const long j = static_cast<long>(idx) % nk;
    bbill::CylinderState s{(i + 0.5) / static_cast<double>(nt),
                           nk == 1 ? k_lo : k_lo + (k_hi - k_lo) * j / static_cast<double>(nk - 1)};
    auto& out = clouds[idx];
    for (long step = 0; step < n && map.in_domain(s); ++step) {
      out.push_back({s.t - std::floor(s.t), s.K});
      try {
        s = map.forward(s);
      } catch (const bbill::DomainError&) {
        break;
      }
    }
  });
  std::size_t points = 0;
  if (csv) {
    csv_header(csv, c);
    csv->precision(17);
    *csv << "orbit,t_mod_1,K\n";
  }
  json sizes = json::array();
  for (std::size_t o = 0; o < clouds.size(); ++o) {
    sizes.push_back(clouds[o].size());
    points += clouds[o].size();
    if (csv) {
      for (const auto& s : clouds[o]) *csv << o << ',' << s.t << ',' << s.K << '\n';
    }
  }
  return json{{"orbits", clouds.size()}, {"points", points}, {"orbit_lengths", sizes}};
}

std::vector<Command> commands() {
  const Param kT0{"t0", Kind::real, "first bounce time"};
  const Param kT{"t", Kind::real, "bounce time", 0.0};
  const Param kK{"K", Kind::real, "action variable K"};
  const Param kStarts{"starts", Kind::integer, "multi-start count", 16};
  const Param kOmegaGrid{"omega_grid", Kind::integer, "rotation-number grid points", 33};
  const Param kKSamples{"k_samples", Kind::integer, "K samples of a_c", 257};
  return {
      {"classify", "classify a radius profile", {kProfile, kEps, kGrid}, cmd_classify, ""},
      {"find-member",
       "smallest R_tilde member of the explicit family",
       {{"k", Kind::integer, "frequency of the second harmonic (1: single harmonic)"},
        {"delta", Kind::real, "amplitude"},
        kEps,
        {"m_hint", Kind::real, "lower end of the M search", nullptr, true}},
       cmd_find_member,
       ""},
      {"flight",
       "closed-form flight between two bounces",
       {kProfile, kEps, kC, kGrid, kT0, {"t1", Kind::real, "second bounce time"}, {"dt", Kind::real, "CSV sampling step", 0.01}},
       cmd_flight,
       "segment samples (t,r,theta,x,y)"},
      {"map",
       "iterate the billiard map with Jacobians",
       {kProfile, kEps, kC, kSigma, kGrid, kT, kK, {"steps", Kind::integer, "iterations", 1}},
       cmd_map,
       "states (n,t,K,det)"},
      {"simulate",
       "bouncing solution from an initial state",
       {kProfile, kEps, kC, kSigma, kGrid, kT, kK, {"n", Kind::integer, "number of bounces", 100},
        {"dt", Kind::real, "trajectory sampling step", 0.05},
        {"trajectory", Kind::text, "trajectory CSV path (t,x,y)", nullptr, true},
        {"seed", Kind::seed, "recorded in the manifest only", nullptr, true}},
       cmd_simulate,
       "bounces (n,t,K,rdot_plus,theta)"},
      {"orbit",
       "(p,q) minimal periodic orbit",
       {kProfile, kEps, kC, kSigma, kGrid, {"p", Kind::integer, "winding"}, {"q", Kind::integer, "period"}, kStarts, kSeed},
       cmd_orbit,
       "orbit (n,t,K)"},
      {"hull",
       "hull-function samples from convergent orbits",
       {kProfile, kEps, kC, kSigma, kGrid, {"omega", Kind::real, "rotation number"},
        {"denom_cap", Kind::integer, "largest convergent denominator", 34}, {"starts", Kind::integer, "multi-start count", 4},
        kSeed},
       cmd_hull,
       "samples (xi,phi,eta)"},
      {"certify", "invariant-curve non-existence certificate", {kProfile, kEps, kC, kGrid, kOmegaGrid, kKSamples},
       cmd_certify, "a_c grid (K,a_c)"},
      {"c0", "largest certified c by bisection",
       {kProfile, kEps, kGrid, kOmegaGrid, kKSamples, {"iterations", Kind::integer, "bisection steps", 20}}, cmd_c0, ""},
      {"lyapunov",
       "Lyapunov exponents of random states",
       {kProfile, kEps, kC, kSigma, kGrid, {"n", Kind::integer, "iterations per state", 100000},
        {"seeds", Kind::integer, "number of random states", 20},
        {"k_lo", Kind::real, "lower K (default: certified band)", nullptr, true},
        {"k_hi", Kind::real, "upper K (default: certified band)", nullptr, true}, kSeed},
       cmd_lyapunov,
       "table (seed,t0,K0,lambda,steps,truncated)"},
      {"portrait",
       "phase-portrait point clouds (t mod 1, K)",
       {kProfile, kEps, kC, kSigma, kGrid, {"nt", Kind::integer, "initial phases", 8},
        {"nk", Kind::integer, "initial K values", 8}, {"k_lo", Kind::real, "lowest initial K"},
        {"k_hi", Kind::real, "highest initial K"}, {"n", Kind::integer, "iterations per orbit", 500}},
       cmd_portrait,
       "points (orbit,t_mod_1,K)"},
  };
}

json load_config(const std::string& path, const std::string& command) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error&) {
    throw UsageError("config file is not valid JSON");
  }
  if (doc.contains("config")) doc = doc.at("config");
  if (!doc.is_object()) throw UsageError("config must be a JSON object");
  if (doc.contains("command") && doc.at("command") != command) {
    throw UsageError("config was produced by '" + doc.at("command").get<std::string>() + "', not '" + command + "'");
  }
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Breathing circle billiard toolkit"};
  app.set_version_flag("--version", std::string(bbill::kVersion));
  app.require_subcommand(1);

  const auto cmds = commands();
  struct Bound {
    CLI::App* sub;
    std::map<std::string, std::string> raw;
    std::map<std::string, CLI::Option*> opts;
    std::string config_path, out_path, csv_path;
  };
  std::vector<Bound> bound(cmds.size());
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    auto& b = bound[i];
    b.sub = app.add_subcommand(cmds[i].name, cmds[i].help);
    for (const auto& p : cmds[i].params) {
      std::string help = p.help;
      if (!p.fallback.is_null()) help += " [default " + p.fallback.dump() + "]";
      static const std::map<Kind, std::string> kTypeNames{
          {Kind::real, "FLOAT"}, {Kind::integer, "INT"}, {Kind::seed, "UINT"}, {Kind::profile, "JSON"}, {Kind::text, "PATH"}};
      b.opts[p.name] = b.sub->add_option("--" + p.name, b.raw[p.name], help)->type_name(kTypeNames.at(p.kind));
    }
    b.sub->add_option("--config", b.config_path, "JSON config or a previous output document");
    b.sub->add_option("--out", b.out_path, "write the JSON document here instead of stdout");
    if (!cmds[i].csv_help.empty()) b.sub->add_option("--csv", b.csv_path, "CSV output: " + cmds[i].csv_help);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  for (std::size_t i = 0; i < cmds.size(); ++i) {
    auto& b = bound[i];
    if (!b.sub->parsed()) continue;
    const auto& cmd = cmds[i];
    try {
      json cfg = json::object();
      json base = b.config_path.empty() ? json::object() : load_config(b.config_path, cmd.name);
      cfg["command"] = cmd.name;
      for (const auto& p : cmd.params) {
        json v = nullptr;
        if (b.opts.at(p.name)->count() > 0) {
          v = convert(p, b.raw.at(p.name));
        } else if (base.contains(p.name)) {
          v = base.at(p.name);
        } else {
          v = p.fallback;
        }
        if (v.is_null() && !p.optional) {
          throw UsageError("missing required option --" + p.name);
        }
        cfg[p.name] = v;
      }
      std::unique_ptr<std::ofstream> csv;
      if (!b.csv_path.empty()) {
        csv = std::make_unique<std::ofstream>(b.csv_path);
        if (!*csv) throw UsageError("cannot write " + b.csv_path);
      }
      json result;
      try {
        result = cmd.run(cfg, csv.get());
      } catch (const json::exception& e) {
        throw UsageError(std::string("config has a field of the wrong type: ") + e.what());
      }
      const json doc{{"version", bbill::kVersion}, {"command", cmd.name}, {"config", cfg}, {"result", result}};
      if (b.out_path.empty()) {
        std::cout << doc.dump(2) << '\n';
      } else {
        std::ofstream out(b.out_path);
        if (!out) throw UsageError("cannot write " + b.out_path);
        out << doc.dump(2) << '\n';
      }
      return 0;
    } catch (const UsageError& e) {
      std::cerr << "error: " << e.what() << "\n\n" << b.sub->help();
      return kExitUsage;
    } catch (const bbill::ConvergenceError& e) {
      std::cerr << "convergence failure: " << e.what() << '\n';
      return kExitConvergence;
    } catch (const bbill::Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitDomain;
    }
  }
  return kExitUsage;
}
