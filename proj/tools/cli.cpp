#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <sstream>

#include "CLI11.hpp"
#include "acceptance.hpp"
#include "dissmps/aklt_mps.hpp"
#include "dissmps/connection.hpp"
#include "dissmps/io.hpp"
#include "dissmps/linalg.hpp"
#include "dissmps/liouvillian.hpp"
#include "dissmps/rydberg_eit.hpp"
#include "dissmps/spin_algebra.hpp"
#include "dissmps/symmetry_general.hpp"
#include "dissmps/trajectory.hpp"
#include "dissmps/uniqueness.hpp"
#include "json.hpp"

namespace dissmps::cli {

namespace {

using json = nlohmann::json;

BoundaryKind parse_boundary(const std::string& s) { return s == "periodic" ? BoundaryKind::Periodic : BoundaryKind::Open; }

const std::vector<std::string> kBoundaries = {"open", "periodic"};

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

json parse_json_file(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& ex) {
    throw ValidationError("cannot read " + path + ": " + ex.what());
  }
  try {
    return json::parse(text);
  } catch (const json::exception& ex) {
    throw ValidationError("malformed JSON in " + path + ": " + ex.what());
  }
}

// Semantic option values of a parsed subcommand; output routing and worker
// counts are excluded so they do not change the config hash.
json effective_config(const CLI::App& sub) {
  json cfg = json::object();
  cfg["command"] = sub.get_name();
  for (const CLI::Option* o : sub.get_options()) {
    const std::string name = o->get_single_name();
    if (name == "help" || name == "out" || name == "workers") continue;
    if (o->get_expected_min() == 0) {
      cfg[name] = o->count() > 0 && o->as<bool>();
      continue;
    }
    std::vector<std::string> vals;
    if (o->count() > 0) {
      vals = o->results();
    } else {
      std::string d = o->get_default_str();
      if (!d.empty() && d.front() == '[' && d.back() == ']') d = d.substr(1, d.size() - 2);
      if (o->get_items_expected_max() > 1) {
        std::stringstream ss(d);
        std::string item;
        while (std::getline(ss, item, ',')) vals.push_back(item);
      } else {
        vals.push_back(d);
      }
    }
    json arr = json::array();
    for (const std::string& v : vals) {
      char* end = nullptr;
      const double x = std::strtod(v.c_str(), &end);
      if (!v.empty() && end == v.c_str() + v.size())
        arr.push_back(std::isfinite(x) ? json(x) : json(v));
      else
        arr.push_back(v);
    }
    if (o->get_items_expected_max() > 1)
      cfg[name] = arr;
    else
      cfg[name] = arr.empty() ? json(nullptr) : arr.back();
  }
  return cfg;
}

std::string scalar_text(const json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  throw ValidationError("config key '" + key + "' must be a scalar or an array of scalars");
}

// Applies file values to options the command line left unset.
void apply_config(CLI::App& sub, const json& cfg) {
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    if (it.key() == "command") continue;
    std::string key = it.key();
    std::replace(key.begin(), key.end(), '_', '-');
    CLI::Option* o = sub.get_option_no_throw("--" + key);
    if (o == nullptr || key == "help") throw ValidationError("unknown config key '" + it.key() + "'");
    if (o->count() > 0) continue;
    if (o->get_expected_min() == 0) {
      require(it->is_boolean(), "config key '" + it.key() + "' must be boolean");
      if (!it->get<bool>()) continue;
      o->add_result(std::string("true"));
    } else if (it->is_array()) {
      for (const json& v : *it) o->add_result(scalar_text(v, it.key()));
    } else {
      o->add_result(scalar_text(*it, it.key()));
    }
    o->run_callback();
  }
}

class Emitter {
 public:
  Emitter(const CLI::App& sub, std::string out_path, std::ostream& out, std::uint64_t seed)
      : out_path_(std::move(out_path)), out_(out) {
    prov_ = make_provenance(sub.get_name(), canonical_json(effective_config(sub).dump()), seed);
  }

  void csv(const CsvTable& table) const { write(table.to_string(&prov_)); }

  void json_doc(json doc) const {
    doc["provenance"] = {{"command", prov_.command},
                         {"config_hash", prov_.config_hash},
                         {"seed", prov_.seed},
                         {"version", prov_.version}};
    write(doc.dump(2) + "\n");
  }

  const Provenance& provenance() const { return prov_; }

 private:
  void write(const std::string& content) const {
    if (out_path_.empty())
      out_ << content;
    else
      write_file_atomic(out_path_, content);
  }

  std::string out_path_;
  std::ostream& out_;
  Provenance prov_;
};

struct CoolingOpts {
  int n = 4;
  std::string boundary = "open";
  std::string protocol = "mp";
  std::string integrator = "rk4";
  int trajectories = 100;
  double tmax = 100.0;
  double dt = 1e-2;
  std::uint64_t seed = 1;
  int record_every = 100;
  bool edge_pinning = false;
  int ell = 5;
  double theta = 2.0 * kPi / 5.0;
  int quadrature = 256;
  double gamma = 1.0;
};

struct UniquenessOpts {
  std::string boundary = "open";
  std::string family = "mp";
  int n_min = 0;
  int n_max = 6;
};

struct CwOpts {
  int quadrature = 256;
  double gamma = 1.0;
};

struct ScalingOpts {
  std::vector<double> n = {256.0, 4096.0, 65536.0};
  double n0 = 4.0;
  double p = 0.5;
  double tauc = 1.0;
  double taur = 0.0;
  double t0 = 0.0;
  std::string detector = "ideal";
  double eta = 0.0;
  double dark_rate = 0.0;
  double tau0 = 1.0;
  int k = 1;
  int seeds = 20;
  std::uint64_t seed = 1;
};

struct OracleOpts {
  int m = 2;
  std::string edges = "aligned";
  double tauc = 10.0;
  int runs = 10000;
  std::uint64_t seed = 1;
  std::string dissipation = "interface";
};

struct RydbergOpts {
  double g = 0.1, omega = 1.0, gamma = 1.0, u = 1.0;
  bool exact_chi = false;
};

struct TeffOpts {
  int n = 4;
  double fss = 0.99;
  std::string boundary = "open";
};

struct ImperfectOpts {
  int n = 4;
  std::string boundary = "periodic";
  std::vector<double> t2 = {1.0, 3.0, 10.0, 30.0, 100.0};
  bool long_range = true;
  double c6 = 1.0;
  double g = 0.1, omega = 1.0, gamma = 1.0, u = 1.0;
  double cutoff = 0.0;
  std::string geometry;
};

struct KminOpts {
  std::string target = "aklt";
  std::string mps;
  std::string group;
  int quadrature = 24;
};

struct GhzOpts {
  int choice = 1;
  int n0 = 3;
  int n = 6;
  std::string init = "ghz";
  std::uint64_t seed = 1;
  bool force_first_jump = false;
  double tau = 60.0;
};

struct ReproduceOpts {
  std::vector<int> only;
};

void run_cooling(const CoolingOpts& o, int workers, const Emitter& em) {
  require(o.trajectories >= 1, "trajectories must be >= 1");
  require(o.record_every >= 1, "record-every must be >= 1");
  Protocol p;
  p.kind = o.protocol == "cw" ? ProtocolKind::CW : ProtocolKind::MP;
  p.ell = o.ell;
  p.theta = o.theta;
  p.quadrature = o.quadrature;
  p.gamma = o.gamma;
  TrajectoryConfig cfg;
  cfg.liouvillian = make_spec(o.n, parse_boundary(o.boundary), p, o.edge_pinning);
  cfg.t_max = o.tmax;
  cfg.dt = o.dt;
  cfg.seed = o.seed;
  cfg.record_every = o.record_every;
  cfg.integrator = o.integrator == "spectral" ? Integrator::Spectral : Integrator::RK4;
  EnsembleRecord e = run_ensemble(cfg, o.trajectories, workers);
  CsvTable t({"t", "F_mean", "F_stderr", "E_mean", "E_stderr", "jumps_cum_mean"});
  for (size_t k = 0; k < e.times.size(); ++k) {
    const double E = k < e.E_mean.size() ? e.E_mean[k] : std::numeric_limits<double>::quiet_NaN();
    const double Es = k < e.E_stderr.size() ? e.E_stderr[k] : std::numeric_limits<double>::quiet_NaN();
    t.add_row(std::vector<double>{e.times[k], e.F_mean[k], e.F_stderr[k], E, Es, e.jumps_cum_mean[k]});
  }
  em.csv(t);
}

void run_uniqueness(const UniquenessOpts& o, const Emitter& em) {
  const BoundaryKind kind = parse_boundary(o.boundary);
  const JumpFamily fam = o.family == "cw" ? JumpFamily::CW : JumpFamily::MP;
  const int n_min = o.n_min > 0 ? o.n_min : (kind == BoundaryKind::Open ? 2 : 3);
  require(n_min <= o.n_max, "n-min must not exceed n-max");
  CsvTable t({"n", "det_numeric", "det_analytic", "rel_err", "verdict"});
  for (int n = n_min; n <= o.n_max; ++n) {
    UniquenessCertificate c = kind == BoundaryKind::Open ? det_certificate_open(n, fam) : det_certificate_periodic(n, fam);
    t.add_row(std::vector<std::string>{std::to_string(n), format_double(c.detBdagB), format_double(c.analytic),
                                       format_double(c.rel_err), c.unique ? "unique" : "degenerate"});
  }
  em.csv(t);
}

void run_cw(const CwOpts& o, const Emitter& em) {
  CsvTable t({"label", "rate"});
  for (const JumpOperator& j : cw_diagonalize(o.quadrature, o.gamma))
    t.add_row(std::vector<std::string>{j.label, format_double(j.rate)});
  em.csv(t);
}

void run_scaling(const ScalingOpts& o, const Emitter& em) {
  ScalingModel m;
  m.p = o.p;
  m.tau_c = o.tauc;
  m.tau_r = o.taur;
  m.n0 = o.n0;
  m.T0 = o.t0;
  DetectorModel det;
  det.method = o.detector == "m1" ? DetectorMethod::M1 : o.detector == "m2" ? DetectorMethod::M2 : DetectorMethod::Ideal;
  det.eta = o.eta;
  det.dark_rate = o.dark_rate;
  det.tau0 = o.tau0;
  det.k = o.k;
  require(o.seeds >= 1, "seeds must be >= 1");
  CsvTable t({"n", "T_mean", "T_p90", "error_bound", "discarded_mean"});
  for (double n : o.n) {
    TreeResult r = monte_carlo_tree(m, det, n, o.seeds, o.seed);
    t.add_row(std::vector<double>{n, r.T_mean, r.T_p90, r.error_bound, r.discarded_mean});
  }
  em.csv(t);
}

void run_oracle(const OracleOpts& o, const Emitter& em) {
  const EdgePreset preset =
      o.edges == "random" ? EdgePreset::Random : o.edges == "postjump" ? EdgePreset::PostJump : EdgePreset::Aligned;
  const OracleDissipation dis = o.dissipation == "all-bonds" ? OracleDissipation::AllBonds : OracleDissipation::Interface;
  OracleResult r = many_body_connection_oracle(o.m, preset, o.tauc, o.runs, o.seed, dis);
  em.json_doc({{"m", r.m},
               {"tau_c", r.tau_c},
               {"runs", r.runs},
               {"p_empirical", r.p_empirical},
               {"p_stderr", r.p_stderr},
               {"p_exact", r.p_exact},
               {"p_dark", r.p_dark},
               {"p_overlap", r.p_overlap},
               {"fidelity_empirical", r.fidelity_empirical},
               {"fidelity_exact", r.fidelity_exact},
               {"gamma1", r.gamma1}});
}

EITParams eit_params(double g, double omega, double gamma, double u) {
  EITParams p;
  p.g = g;
  p.omega = omega;
  p.gamma = gamma;
  p.U = u;
  return p;
}

void run_rydberg(const RydbergOpts& o, const Emitter& em) {
  const EffectiveRate r = effective_rate(eit_params(o.g, o.omega, o.gamma, o.u), o.exact_chi);
  em.json_doc({{"U_DD_re", r.U_DD.real()},
               {"U_DD_im", r.U_DD.imag()},
               {"Gamma_DD", r.Gamma_DD},
               {"chi", r.chi},
               {"in_regime", r.in_regime}});
}

void run_teff(const TeffOpts& o, const Emitter& em) {
  const TeffResult r = effective_temperature(o.fss, o.n, parse_boundary(o.boundary));
  em.json_doc({{"T_eff", r.unbounded ? json(nullptr) : json(r.T_eff)},
               {"gap", r.gap},
               {"ratio", r.unbounded ? json(nullptr) : json(r.ratio)},
               {"unbounded", r.unbounded}});
}

std::vector<Eigen::Vector3d> read_geometry(const std::string& path) {
  const json doc = parse_json_file(path);
  require(doc.is_object() && doc.contains("positions") && doc["positions"].is_array(),
          "geometry file needs a \"positions\" array");
  for (auto it = doc.begin(); it != doc.end(); ++it)
    require(it.key() == "positions", "unknown geometry key '" + it.key() + "'");
  std::vector<Eigen::Vector3d> pos;
  for (const json& p : doc["positions"]) {
    require(p.is_array() && (p.size() == 2 || p.size() == 3), "positions must be [x, y] or [x, y, z]");
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    for (size_t i = 0; i < p.size(); ++i) {
      require(p[i].is_number(), "coordinates must be numbers");
      v(static_cast<Eigen::Index>(i)) = p[i].get<double>();
    }
    pos.push_back(v);
  }
  return pos;
}

void run_imperfect(const ImperfectOpts& o, const Emitter& em) {
  ImperfectionSpec s;
  s.n = o.n;
  s.boundary = parse_boundary(o.boundary);
  s.eit = eit_params(o.g, o.omega, o.gamma, o.u);
  s.C6 = o.c6;
  s.long_range = o.long_range;
  s.range_cutoff = o.cutoff;
  if (!o.geometry.empty()) s.positions = read_geometry(o.geometry);
  require(!o.t2.empty(), "t2 needs at least one value");
  CsvTable t({"T2", "F_SS", "T_eff", "T_eff_over_gap", "residual"});
  for (double t2 : o.t2) {
    s.T2 = t2;
    const SteadyStateResult r = imperfect_steady_state(s);
    double teff = std::numeric_limits<double>::quiet_NaN(), ratio = teff;
    if (r.F_SS < 1.0) {
      try {
        const TeffResult tr = effective_temperature(r.F_SS, s.n, s.boundary);
        teff = tr.T_eff;
        ratio = tr.ratio;
      } catch (const NoSolution&) {
      }
    } else {
      teff = ratio = 0.0;
    }
    t.add_row(std::vector<double>{t2, r.F_SS, teff, ratio, r.residual});
  }
  em.csv(t);
}

void run_kmin(const KminOpts& o, const Emitter& em) {
  GroupAction g;
  CMat bright;
  if (o.target == "aklt") {
    g = so3_spin1_pair(o.quadrature);
    bright = bright_manifold(total_J_projectors().P[2]);
  } else if (o.target == "ghz") {
    CMat x(2, 2);
    x << 0, 1, 1, 0;
    g = finite_group("Z2", {CMat::Identity(4, 4), kron(x, x)});
    bright = bright_manifold(ghz_parent_term());
  } else {
    require(!o.mps.empty() && !o.group.empty(), "target mps needs --mps and --group files");
    const MPSSpec spec = mps_from_json(read_file(o.mps));
    g = group_from_json(read_file(o.group));
    bright = bright_manifold(bright_projector(spec));
  }
  require(g.dim() == bright.rows(), "group acts on a space of the wrong dimension");
  const IrrepDecomposition dec = decompose(g, bright);
  const JumpSetPlan plan = construct_jump_set(dec, g);
  json blocks = json::array();
  for (const IrrepBlock& b : dec.blocks) blocks.push_back({{"irrep", b.irrep}, {"d", b.d}, {"K", b.K}});
  em.json_doc({{"group", g.name},
               {"k_min", k_min(dec)},
               {"blocks", blocks},
               {"jumps", plan.psi.size()},
               {"coverage_rank", plan.coverage_rank},
               {"dim_bright", plan.dim_bright}});
}

void run_ghz(const GhzOpts& o, const Emitter& em) {
  const GhzInit init = o.init == "aligned" ? GhzInit::Aligned : o.init == "random" ? GhzInit::Random : GhzInit::Ghz;
  const GhzOutcome r = ghz_connection_check(o.choice, o.n0, o.n, init, o.seed, o.force_first_jump, o.tau);
  em.json_doc({{"class", r.cls},
               {"zeta_re", r.zeta.real()},
               {"zeta_im", r.zeta.imag()},
               {"jumps", r.jumps},
               {"final_n", r.final_n},
               {"p_first", r.p_first},
               {"overlap0", r.overlap0},
               {"overlap1", r.overlap1}});
}

void run_reproduce(const ReproduceOpts& o, const std::string& dir, std::ostream& out, const Emitter& em) {
  acceptance::Options opt;
  opt.only = o.only;
  opt.on_result = [&out](const acceptance::CriterionResult& r) { out << acceptance::format_line(r) << std::endl; };
  const auto results = acceptance::run_all(opt);
  CsvTable t({"id", "name", "status", "measured", "expected", "seconds", "budget_seconds", "detail"});
  std::string text;
  int passed = 0;
  for (const auto& r : results) {
    t.add_row(std::vector<std::string>{std::to_string(r.id), r.name, r.pass ? "PASS" : "FAIL", r.measured, r.expected,
                                       format_double(r.seconds), format_double(r.budget_seconds), r.detail});
    text += acceptance::format_line(r) + "\n";
    passed += r.pass ? 1 : 0;
  }
  text += std::to_string(passed) + "/" + std::to_string(results.size()) + " criteria passed\n";
  out << std::to_string(passed) << "/" << results.size() << " criteria passed" << std::endl;
  std::filesystem::create_directories(dir);
  write_file_atomic((std::filesystem::path(dir) / "report.csv").string(), t.to_string(&em.provenance()));
  write_file_atomic((std::filesystem::path(dir) / "report.txt").string(), text);
}

// Position of the subcommand token, skipping the value of --config.
std::optional<std::size_t> find_command(const std::vector<std::string>& args, const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      ++i;
      continue;
    }
    if (std::find(names.begin(), names.end(), args[i]) != names.end()) return i;
  }
  return std::nullopt;
}

std::optional<std::string> find_config(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

}  // namespace

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dissipative preparation of matrix product states"};
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::string out_path;
  int workers = 0;
  app.add_option("--config", config_path, "JSON config; command-line flags override file values");

  auto common = [&](CLI::App* s, bool with_out = true) {
    if (with_out) s->add_option("--out", out_path, "Output file (stdout when omitted)");
    s->add_option("--workers", workers, "Worker threads (0: DISS_MPS_THREADS or hardware)")->check(CLI::NonNegativeNumber);
  };

  CoolingOpts cool;
  auto* s_cool = app.add_subcommand("simulate-cooling", "Trajectory ensemble cooling to the AKLT ground space");
  s_cool->add_option("--n", cool.n, "Chain length")->check(CLI::Range(2, 8));
  s_cool->add_option("--boundary", cool.boundary)->check(CLI::IsMember(kBoundaries));
  s_cool->add_option("--protocol", cool.protocol)->check(CLI::IsMember({"mp", "cw"}));
  s_cool->add_option("--integrator", cool.integrator)->check(CLI::IsMember({"rk4", "spectral"}));
  s_cool->add_option("--trajectories", cool.trajectories);
  s_cool->add_option("--tmax", cool.tmax);
  s_cool->add_option("--dt", cool.dt);
  s_cool->add_option("--seed", cool.seed);
  s_cool->add_option("--record-every", cool.record_every, "Steps of dt between records");
  s_cool->add_flag("--edge-pinning", cool.edge_pinning);
  s_cool->add_option("--ell", cool.ell);
  s_cool->add_option("--theta", cool.theta);
  s_cool->add_option("--quadrature", cool.quadrature);
  s_cool->add_option("--gamma", cool.gamma);
  common(s_cool);

  UniquenessOpts uniq;
  auto* s_uniq = app.add_subcommand("uniqueness-check", "Determinant certificates of steady-state uniqueness");
  s_uniq->add_option("--boundary", uniq.boundary)->check(CLI::IsMember(kBoundaries));
  s_uniq->add_option("--family", uniq.family)->check(CLI::IsMember({"mp", "cw"}));
  s_uniq->add_option("--n-min", uniq.n_min, "First chain length (0: 2 open, 3 periodic)");
  s_uniq->add_option("--n-max", uniq.n_max)->check(CLI::Range(2, 12));
  common(s_uniq);

  CwOpts cw;
  auto* s_cw = app.add_subcommand("cw-rates", "Continuous-rotation jump operators and rates");
  s_cw->add_option("--quadrature", cw.quadrature);
  s_cw->add_option("--gamma", cw.gamma);
  common(s_cw);

  ScalingOpts sc;
  auto* s_sc = app.add_subcommand("connect-scaling", "Monte-Carlo connection tree");
  s_sc->add_option("--n", sc.n, "Target lengths")->delimiter(',');
  s_sc->add_option("--n0", sc.n0);
  s_sc->add_option("--p", sc.p);
  s_sc->add_option("--tauc", sc.tauc);
  s_sc->add_option("--taur", sc.taur);
  s_sc->add_option("--t0", sc.t0);
  s_sc->add_option("--detector", sc.detector)->check(CLI::IsMember({"ideal", "m1", "m2"}));
  s_sc->add_option("--eta", sc.eta, "Detector inefficiency 1 - efficiency");
  s_sc->add_option("--dark-rate", sc.dark_rate);
  s_sc->add_option("--tau0", sc.tau0);
  s_sc->add_option("--k", sc.k);
  s_sc->add_option("--seeds", sc.seeds);
  s_sc->add_option("--seed", sc.seed);
  common(s_sc);

  OracleOpts orc;
  auto* s_orc = app.add_subcommand("connect-oracle", "Dense many-body check of one connection");
  s_orc->add_option("--m", orc.m, "Sites per segment")->check(CLI::Range(1, 4));
  s_orc->add_option("--edges", orc.edges)->check(CLI::IsMember({"aligned", "random", "postjump"}));
  s_orc->add_option("--tauc", orc.tauc);
  s_orc->add_option("--runs", orc.runs);
  s_orc->add_option("--seed", orc.seed);
  s_orc->add_option("--dissipation", orc.dissipation)->check(CLI::IsMember({"interface", "all-bonds"}));
  common(s_orc);

  RydbergOpts ry;
  auto* s_ry = app.add_subcommand("rydberg-rates", "Effective doubly-dark interaction and decay");
  s_ry->add_option("--g", ry.g);
  s_ry->add_option("--omega", ry.omega);
  s_ry->add_option("--gamma", ry.gamma);
  s_ry->add_option("--u", ry.u);
  s_ry->add_flag("--exact-chi", ry.exact_chi);
  common(s_ry);

  TeffOpts te;
  auto* s_te = app.add_subcommand("teff", "Effective temperature of a steady-state fidelity");
  s_te->add_option("--n", te.n)->check(CLI::Range(2, 8));
  s_te->add_option("--fss", te.fss);
  s_te->add_option("--boundary", te.boundary)->check(CLI::IsMember(kBoundaries));
  common(s_te);

  ImperfectOpts im;
  auto* s_im = app.add_subcommand("imperfect", "Steady-state fidelity with dephasing and long-range decay");
  s_im->add_option("--n", im.n)->check(CLI::Range(2, 8));
  s_im->add_option("--boundary", im.boundary)->check(CLI::IsMember(kBoundaries));
  s_im->add_option("--t2", im.t2, "Dephasing times in units of 1/Gamma_DD")->delimiter(',');
  s_im->add_option("--long-range", im.long_range);
  s_im->add_option("--c6", im.c6);
  s_im->add_option("--g", im.g);
  s_im->add_option("--omega", im.omega);
  s_im->add_option("--gamma", im.gamma);
  s_im->add_option("--u", im.u);
  s_im->add_option("--cutoff", im.cutoff, "Largest pair distance kept (0 keeps all)");
  s_im->add_option("--geometry", im.geometry, "JSON file {\"positions\": [[x, y], ...]}");
  common(s_im);

  KminOpts km;
  auto* s_km = app.add_subcommand("kmin", "Minimum number of jump operators");
  s_km->add_option("--target", km.target)->check(CLI::IsMember({"aklt", "ghz", "mps"}));
  s_km->add_option("--mps", km.mps, "MPS JSON file");
  s_km->add_option("--group", km.group, "Group JSON file");
  s_km->add_option("--quadrature", km.quadrature);
  common(s_km);

  GhzOpts gh;
  auto* s_gh = app.add_subcommand("ghz-check", "Connect two GHZ segments");
  s_gh->add_option("--choice", gh.choice)->check(CLI::Range(1, 2));
  s_gh->add_option("--n0", gh.n0);
  s_gh->add_option("--n", gh.n);
  s_gh->add_option("--init", gh.init)->check(CLI::IsMember({"ghz", "aligned", "random"}));
  s_gh->add_option("--seed", gh.seed);
  s_gh->add_flag("--force-first-jump", gh.force_first_jump);
  s_gh->add_option("--tau", gh.tau);
  common(s_gh);

  ReproduceOpts rep;
  std::string rep_dir = "reproduce";
  auto* s_rep = app.add_subcommand("reproduce-all", "Run every acceptance criterion and write a report");
  s_rep->add_option("--out", rep_dir, "Report directory");
  s_rep->add_option("--only", rep.only, "Criterion ids")->delimiter(',')->check(CLI::Range(1, 12));
  common(s_rep, false);

  std::vector<std::string> names;
  for (const CLI::App* s : app.get_subcommands({})) names.push_back(s->get_name());

  std::vector<std::string> args = args_in;
  json cfg = json::object();
  try {
    if (auto path = find_config(args)) {
      cfg = parse_json_file(*path);
      require(cfg.is_object(), "config must be a JSON object");
      if (cfg.contains("command")) {
        require(cfg["command"].is_string(), "config command must be a string");
        const std::string cmd = cfg["command"].get<std::string>();
        require(std::find(names.begin(), names.end(), cmd) != names.end(), "unknown command '" + cmd + "'");
        auto pos = find_command(args, names);
        if (!pos)
          args.insert(args.begin(), cmd);
        else
          require(args[*pos] == cmd, "config command '" + cmd + "' conflicts with '" + args[*pos] + "'");
      }
    }
  } catch (const ValidationError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitValidation;
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    apply_config(*sub, cfg);
    if (workers > 0) setenv("DISS_MPS_THREADS", std::to_string(workers).c_str(), 1);
    const std::string name = sub->get_name();
    std::uint64_t seed = 0;
    if (name == "simulate-cooling") seed = cool.seed;
    if (name == "connect-scaling") seed = sc.seed;
    if (name == "connect-oracle") seed = orc.seed;
    if (name == "ghz-check") seed = gh.seed;
    Emitter em(*sub, name == "reproduce-all" ? std::string() : out_path, out, seed);
    if (name == "simulate-cooling") run_cooling(cool, workers, em);
    if (name == "uniqueness-check") run_uniqueness(uniq, em);
    if (name == "cw-rates") run_cw(cw, em);
    if (name == "connect-scaling") run_scaling(sc, em);
    if (name == "connect-oracle") run_oracle(orc, em);
    if (name == "rydberg-rates") run_rydberg(ry, em);
    if (name == "teff") run_teff(te, em);
    if (name == "imperfect") run_imperfect(im, em);
    if (name == "kmin") run_kmin(km, em);
    if (name == "ghz-check") run_ghz(gh, em);
    if (name == "reproduce-all") run_reproduce(rep, rep_dir, out, em);
  } catch (const CLI::Error& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitValidation;
  } catch (const CapExceeded& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitCap;
  } catch (const ValidationError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace dissmps::cli
