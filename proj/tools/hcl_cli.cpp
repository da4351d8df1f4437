// hcl: Melnikov coefficients, bounded-solution counts, Kimura verdicts and
// homoclinic continuation for the coupled Ginzburg-Landau steady states.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hcl/continuation.hpp"
#include "hcl/fuchsian.hpp"
#include "hcl/melnikov.hpp"
#include "hcl/report_io.hpp"
#include "hcl/variational.hpp"
#include "json.hpp"

namespace {

using namespace hcl;
namespace fs = std::filesystem;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Relative paths resolve against $HCL_OUTPUT_DIR when it is set. Without
// --out the result goes to $HCL_OUTPUT_DIR/<fallback>, or to stdout.
void emit(const std::string& out, const std::string& fallback, const std::string& text) {
  const char* dir = std::getenv("HCL_OUTPUT_DIR");
  fs::path path;
  if (!out.empty()) {
    path = out;
    if (path.is_relative() && dir && *dir) path = fs::path(dir) / path;
  } else if (dir && *dir) {
    path = fs::path(dir) / fallback;
  } else {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
  if (!f) throw IoError("write to '" + path.string() + "' failed");
}

std::vector<int> parse_ell_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto dash = item.find('-', 1);
    int a = 0, b = 0;
    try {
      a = std::stoi(item.substr(0, dash));
      b = dash != std::string::npos ? std::stoi(item.substr(dash + 1)) : a;
    } catch (const std::invalid_argument&) {
      throw CLI::ValidationError("--ell-list", "malformed ell list '" + text + "'");
    } catch (const std::out_of_range&) {
      throw CLI::ValidationError("--ell-list", "malformed ell list '" + text + "'");
    }
    if (b < a) throw DomainError("ell range '" + item + "' is decreasing");
    for (int l = a; l <= b; ++l) out.push_back(l);
  }
  if (out.empty()) throw DomainError("empty ell list");
  return out;
}

// --------------------------------------------------------------- presets

struct ContinueOptions {
  std::string diagram = "fig7a";
  std::optional<double> s, beta1, beta2, beta3, beta4;
  std::string control;
  std::optional<double> lambda_min, lambda_max;
  int orbit_sign = 0;
  bool symmetric = false;
  double T = 15.0;
  int N = 80;
  int max_points = 0;
  double max_step = 0.0;
  std::string format = "csv";
  bool mesh = false;
  std::string out;
};

struct Preset {
  SystemParams p;
  Param control = Param::beta3;
  double lambda_min = -0.3, lambda_max = 0.3;
  int orbit_sign = -1;
  bool symmetric = false;
  bool both_ways = true;
  int max_points = 120;
  double max_step = 0.05;
};

Preset preset_for(const std::string& name) {
  Preset pr;
  pr.p.s = 2.0;
  pr.p.beta2 = 1.0;
  pr.p.beta3 = 0.0;
  if (name == "fig7a" || name == "fig7b" || name == "fig7c") {
    pr.p.beta4 = 2.0;
    pr.p.beta1 = name == "fig7a" ? 1.7071068 : name == "fig7b" ? 7.5355339 : 17.36396103;
  } else if (name == "fig9") {
    pr.p.beta1 = 1.0;
    pr.p.beta4 = 0.0;
    pr.control = Param::beta1;
    pr.lambda_min = 0.5;
    pr.lambda_max = 13.0;
    pr.orbit_sign = 1;
    pr.symmetric = true;
    pr.both_ways = false;
    pr.max_points = 400;
    pr.max_step = 0.2;
  } else if (name == "custom") {
    pr.p.beta1 = 1.7071068;
    pr.p.beta4 = 0.0;
  } else {
    throw DomainError("unknown diagram '" + name + "'");
  }
  return pr;
}

std::string run_continue(const ContinueOptions& o) {
  Preset pr = preset_for(o.diagram);
  if (o.s) pr.p.s = *o.s;
  if (o.beta1) pr.p.beta1 = *o.beta1;
  if (o.beta2) pr.p.beta2 = *o.beta2;
  if (o.beta3) pr.p.beta3 = *o.beta3;
  if (o.beta4) pr.p.beta4 = *o.beta4;
  if (!o.control.empty()) pr.control = parse_param(o.control);
  if (pr.control == Param::nu1) throw DomainError("nu1 is always free and cannot be the control");
  if (o.lambda_min) pr.lambda_min = *o.lambda_min;
  if (o.lambda_max) pr.lambda_max = *o.lambda_max;
  if (o.orbit_sign != 0) pr.orbit_sign = o.orbit_sign;
  if (o.symmetric) {
    pr.symmetric = true;
    pr.both_ways = false;
  }
  if (o.max_points > 0) pr.max_points = o.max_points;
  if (o.max_step > 0.0) pr.max_step = o.max_step;
  if (!(pr.lambda_min < pr.lambda_max)) throw DomainError("need lambda-min < lambda-max");

  const continuation::BvpMesh guess = continuation::mesh_from_homoclinic(o.T, o.N, pr.orbit_sign);
  const continuation::BranchPoint start = continuation::solve_homoclinic(guess, pr.p);
  continuation::ContinuationConfig cfg;
  cfg.max_points = pr.max_points;
  cfg.max_step = pr.max_step;
  cfg.lambda_min = pr.lambda_min;
  cfg.lambda_max = pr.lambda_max;
  cfg.symmetric = pr.symmetric;
  cfg.track_pitchfork = pr.symmetric;
  continuation::Branch br;
  if (pr.both_ways) {
    br = continuation::continue_both_ways(start, pr.control, cfg);
  } else {
    br = continuation::continue_branch(start, pr.control, cfg);
    continuation::detect_special_points(br, cfg);
  }

  if (o.format == "csv") {
    std::ostringstream os;
    continuation::write_branch_csv(os, br);
    return os.str();
  }
  nlohmann::json j = nlohmann::json::parse(continuation::branch_to_json(br, o.mesh));
  j["diagram"] = o.diagram;
  j["orbit_sign"] = pr.orbit_sign;
  if (pr.symmetric) {
    nlohmann::json pfs = nlohmann::json::array();
    for (const auto& sp : br.special) {
      if (sp.kind != continuation::SpecialKind::pitchfork) continue;
      nlohmann::json e{{"lambda", sp.lambda}};
      const auto ell = fuchsian::find_resonant_ell(br.points.front().params.s, sp.lambda, 1e-2);
      e["ell"] = ell ? nlohmann::json(*ell) : nlohmann::json(nullptr);
      try {
        const auto dir = continuation::pitchfork_direction(br, sp);
        e["coefficient"] = dir.coefficient;
        e["criticality"] = std::string(melnikov::to_string(dir.criticality));
      } catch (const ConvergenceError& err) {
        e["criticality"] = nullptr;
        e["switch_error"] = err.what();
      }
      pfs.push_back(e);
    }
    j["pitchforks"] = pfs;
  }
  return j.dump(2);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hcl: homoclinic bifurcation analysis of the coupled Ginzburg-Landau steady-state system"};
  app.require_subcommand(1);

  // resonance
  auto* res = app.add_subcommand("resonance", "Resonance curves beta1(s, ell); CSV columns s,ell,beta1");
  double s_min = 0.1, s_max = 3.0;
  std::string ell_list = "0-4";
  int points = 60;
  std::string res_out;
  res->add_option("--s-min", s_min, "Smallest s (> 0)")->capture_default_str();
  res->add_option("--s-max", s_max, "Largest s")->capture_default_str();
  res->add_option("--ell-list", ell_list, "Comma-separated ells or ranges, e.g. 0,2,4 or 0-4")->capture_default_str();
  res->add_option("--points", points, "Samples per ell")->capture_default_str();
  res->add_option("--out", res_out, "Output file (default: stdout)");

  // melnikov
  auto* mel = app.add_subcommand(
      "melnikov",
      "Melnikov coefficients at beta1 = resonance(s, ell). JSON fields: mode, s, ell, beta1, beta2, beta4, "
      "a2/b2/bar_a2/bar_b2 {value, error, degenerate}, closed_form_a2/b2, series_a2/b2, classification");
  double m_s = 2.0, m_beta2 = 1.0, m_beta4 = 1.0, m_tol = 1e-12;
  int m_ell = 0;
  std::string m_mode = "sn", m_out;
  mel->add_option("--s", m_s, "s > 0")->capture_default_str();
  mel->add_option("--ell", m_ell, "Resonance index (>= 0)")->capture_default_str();
  mel->add_option("--beta2", m_beta2, "beta2 (pitchfork mode)")->capture_default_str();
  mel->add_option("--beta4", m_beta4, "beta4 (saddle-node mode)")->capture_default_str();
  mel->add_option("--mode", m_mode, "sn (saddle-node) or pf (pitchfork)")
      ->check(CLI::IsMember({"sn", "pf"}))
      ->capture_default_str();
  mel->add_option("--tol", m_tol, "Quadrature tolerance")->capture_default_str();
  mel->add_option("--out", m_out, "Output file (default: stdout)");

  // bounded
  auto* bnd = app.add_subcommand(
      "bounded", "Independent bounded solutions of the VE along x_+^h. JSON fields: s, beta1, T, n0, sines");
  double b_s = 2.0, b_beta1 = 1.7071068, b_T = 20.0, b_sv = 1e-4;
  std::string b_out;
  bnd->add_option("--s", b_s, "s > 0")->capture_default_str();
  bnd->add_option("--beta1", b_beta1, "beta1")->capture_default_str();
  bnd->add_option("--T", b_T, "Half-length of the integration window")->capture_default_str();
  bnd->add_option("--sv-tol", b_sv, "Principal-angle sine threshold")->capture_default_str();
  bnd->add_option("--out", b_out, "Output file (default: stdout)");

  // continue
  auto* con = app.add_subcommand(
      "continue",
      "Homoclinic continuation. CSV columns: <control>,nu1,x2_0,max_x2,min_x2,residual,special. "
      "JSON: control, symmetric, points[], special[] (and pitchforks[] for symmetric runs)");
  ContinueOptions co;
  con->add_option("--diagram", co.diagram, "fig7a | fig7b | fig7c | fig9 | custom")
      ->check(CLI::IsMember({"fig7a", "fig7b", "fig7c", "fig9", "custom"}))
      ->capture_default_str();
  con->add_option("--s", co.s, "Override s");
  con->add_option("--beta1", co.beta1, "Override beta1");
  con->add_option("--beta2", co.beta2, "Override beta2");
  con->add_option("--beta3", co.beta3, "Override beta3");
  con->add_option("--beta4", co.beta4, "Override beta4");
  con->add_option("--control", co.control, "Control parameter: beta1..beta4");
  con->add_option("--lambda-min", co.lambda_min, "Lower control bound");
  con->add_option("--lambda-max", co.lambda_max, "Upper control bound");
  con->add_option("--orbit-sign", co.orbit_sign, "Starting orbit x_+^h (1) or x_-^h (-1)")
      ->check(CLI::IsMember({-1, 1}));
  con->add_flag("--symmetric", co.symmetric, "Stay on x2 = x4 = 0 and track pitchforks (beta3 = beta4 = 0)");
  con->add_option("--T", co.T, "Truncation half-length")->capture_default_str();
  con->add_option("--N", co.N, "Mesh intervals (even, >= 40)")->capture_default_str();
  con->add_option("--max-points", co.max_points, "Point budget per leg");
  con->add_option("--max-step", co.max_step, "Largest arclength step");
  con->add_option("--format", co.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  con->add_flag("--mesh", co.mesh, "Include meshes in JSON output");
  con->add_option("--out", co.out, "Output file (default: stdout)");

  // kimura
  auto* kim = app.add_subcommand(
      "kimura", "Kimura triangularizability of the Fuchsian NVE. JSON fields: triangularizable, witness, "
                "witness_index, witness_value, rho, combinations");
  double k_nu1 = 0.0, k_nu2 = 0.0, k_tol = 1e-9;
  std::vector<double> k_rho;
  std::string k_out;
  auto* opt_nu1 = kim->add_option("--nu1", k_nu1, "Coefficient nu1 (> 0)");
  auto* opt_nu2 = kim->add_option("--nu2", k_nu2, "Coefficient nu2");
  auto* opt_rho = kim->add_option("--rho", k_rho, "Exponent differences r1 r2 r3")->expected(3);
  opt_nu1->needs(opt_nu2);
  opt_nu2->needs(opt_nu1);
  opt_rho->excludes(opt_nu1)->excludes(opt_nu2);
  kim->add_option("--tol", k_tol, "Odd-integer tolerance in (0, 1e-3]")->capture_default_str();
  kim->add_option("--out", k_out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::cerr << "error: usage: " << msg << '\n';
    return 2;
  }

  try {
    if (*res) {
      const auto samples = fuchsian::resonance_curve(s_min, s_max, parse_ell_list(ell_list), points);
      std::ostringstream os;
      os << "s,ell,beta1\n" << std::setprecision(17);
      for (const auto& r : samples) os << r.s << ',' << r.ell << ',' << r.beta1 << '\n';
      emit(res_out, "resonance.csv", os.str());
    } else if (*mel) {
      if (m_ell < 0) throw DomainError("ell must be nonnegative");
      const melnikov::MelnikovReport rep = m_mode == "sn" ? melnikov::saddle_node_report(m_s, m_ell, m_beta4, m_tol)
                                                          : melnikov::pitchfork_report(m_s, m_ell, m_beta2, m_tol);
      emit(m_out, "melnikov.json", report_io::to_json(rep));
    } else if (*bnd) {
      SystemParams p;
      p.s = b_s;
      p.beta1 = b_beta1;
      const auto count = variational::count_bounded_solutions(variational::ve_along_homoclinic(p), b_T, b_sv);
      emit(b_out, "bounded.json", report_io::to_json(count, b_s, b_beta1));
    } else if (*con) {
      emit(co.out, co.format == "csv" ? "branch.csv" : "branch.json", run_continue(co));
    } else if (*kim) {
      if (opt_rho->count() == 0 && opt_nu1->count() == 0)
        throw CLI::ValidationError("kimura needs either --nu1/--nu2 or --rho");
      const fuchsian::ExponentScheme scheme = opt_rho->count() ? fuchsian::scheme_from_rho(k_rho[0], k_rho[1], k_rho[2])
                                                               : fuchsian::exponents_from_nu(k_nu1, k_nu2);
      emit(k_out, "kimura.json", report_io::to_json(fuchsian::kimura_triangularizable(scheme, k_tol), scheme));
    }
  } catch (const CLI::Error& e) {
    std::cerr << "error: usage: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: domain: " << e.what() << '\n';
    return 3;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: convergence: " << e.what() << '\n';
    return 4;
  } catch (const IoError& e) {
    std::cerr << "error: io: " << e.what() << '\n';
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
