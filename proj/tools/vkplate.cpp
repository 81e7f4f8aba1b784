// vkplate command line: run, korn, reduce, check.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vkplate/config.hpp"
#include "vkplate/io.hpp"

namespace {

constexpr double kCompatTol = 1e-10;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw vkplate::ValidationError("cannot read config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<double> parse_hs(const std::string& text) {
  std::vector<double> hs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      hs.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw vkplate::ValidationError("--h: bad thickness '" + item + "'");
    }
  }
  return hs;
}

void print_tensor(const char* name, const vkplate::SymTensor2D& t) {
  std::printf("%s (Voigt 11,22,12; engineering shear):\n", name);
  for (int i = 0; i < 3; ++i) {
    std::printf("  %s %s %s\n", vkplate::format_double(t.voigt()(i, 0)).c_str(),
                vkplate::format_double(t.voigt()(i, 1)).c_str(), vkplate::format_double(t.voigt()(i, 2)).c_str());
  }
}

struct Compat {
  vkplate::CompatibilityReport elastic, viscous;
};

Compat compatibility(const vkplate::RunConfig& cfg) {
  return {vkplate::check_compatibility(cfg.material.elastic.tensor(), cfg.material.b_full, kCompatTol),
          vkplate::check_compatibility(cfg.material.viscous.tensor(), cfg.material.b_full, kCompatTol)};
}

int cmd_reduce(const std::string& path) {
  const vkplate::RunConfig cfg = vkplate::parse_config(read_file(path));
  const vkplate::ReducedForm el = vkplate::reduce_form(cfg.material.elastic.tensor());
  const vkplate::ReducedForm vi = vkplate::reduce_form(cfg.material.viscous.tensor());
  print_tensor("elastic Q2", el.tensor);
  std::printf("elastic Q2(Id2) = %s\n", vkplate::format_double(el.tensor.form(Eigen::Matrix2d::Identity())).c_str());
  print_tensor("viscous Q2", vi.tensor);
  std::printf("viscous Q2(Id2) = %s\n", vkplate::format_double(vi.tensor.form(Eigen::Matrix2d::Identity())).c_str());
  const Eigen::Matrix2d k = vkplate::reduce_heat_conductivity(cfg.material.k3);
  std::printf("reduced conductivity:\n  %s %s\n  %s %s\n", vkplate::format_double(k(0, 0)).c_str(),
              vkplate::format_double(k(0, 1)).c_str(), vkplate::format_double(k(1, 0)).c_str(),
              vkplate::format_double(k(1, 1)).c_str());
  const vkplate::RegimeTensors rt =
      vkplate::regime_tensors(cfg.material.alpha, cfg.material.b_full, vi.tensor);
  std::printf("alpha = %s: thermal stress %s, dissipation heating %s\n",
              vkplate::format_double(cfg.material.alpha).c_str(), rt.b_thermal.isZero(0.0) ? "off" : "on",
              rt.c_visc_alpha.is_zero() ? "off" : "on");
  return 0;
}

void print_report(const char* name, const vkplate::CompatibilityReport& r) {
  std::printf("%s tensor splitting: %s (max |%s| = %.3e, tol %.1e)\n", name, r.tensor_pass() ? "PASS" : "FAIL",
              r.worst_tensor_entry.c_str(), r.max_tensor_coupling, r.tol);
}

int cmd_check(const std::string& path) {
  const vkplate::RunConfig cfg = vkplate::parse_config(read_file(path));
  const Compat c = compatibility(cfg);
  print_report("elastic", c.elastic);
  print_report("viscous", c.viscous);
  const vkplate::CompatibilityReport& t = c.elastic;
  std::printf("thermal expansion in-plane: %s (max |%s| = %.3e, tol %.1e)\n", t.thermal_pass() ? "PASS" : "FAIL",
              t.worst_thermal_entry.c_str(), t.max_thermal_coupling, t.tol);
  const bool pass = c.elastic.pass() && c.viscous.tensor_pass();
  std::printf("%s\n", pass ? "PASS" : "FAIL");
  return pass ? 0 : 1;
}

int cmd_run(const std::string& path, bool force) {
  const vkplate::RunConfig cfg = vkplate::parse_config(read_file(path));
  const Compat c = compatibility(cfg);
  const bool tensors_ok = c.elastic.tensor_pass() && c.viscous.tensor_pass();
  const bool thermal_ok = cfg.material.alpha != 2.0 || c.elastic.thermal_pass();
  if (!(tensors_ok && thermal_ok)) {
    std::fprintf(stderr, "%s: material is not compatible (%s)\n", force ? "warning" : "error",
                 !tensors_ok ? (c.elastic.tensor_pass() ? c.viscous.worst_tensor_entry : c.elastic.worst_tensor_entry).c_str()
                             : c.elastic.worst_thermal_entry.c_str());
    if (!force) return 1;
  }
  const vkplate::PlateMesh mesh = cfg.mesh();
  const vkplate::MaterialSet mat = cfg.material_set();
  const vkplate::Loads loads = cfg.plate_loads();
  vkplate::StepObserver observer;
  if (cfg.output.vtk_stride > 0) {
    observer = [&](int k, const vkplate::PlateState& s) {
      if (k % cfg.output.vtk_stride != 0) return;
      char name[32];
      std::snprintf(name, sizeof name, "_%06d.vtk", k);
      vkplate::export_vtk(mesh, s, cfg.output.vtk_prefix + name);
    };
  }
  const vkplate::Trajectory traj = vkplate::run(mesh, mat, loads, cfg.initial_conditions(), cfg.sim, observer);
  vkplate::export_csv(traj.ledger, cfg.output.csv);
  const vkplate::LedgerRow& last = traj.ledger.back();
  std::printf("steps %zu  t %s  elastic %.6e  residual %.3e (normalized %.3e)  min_mu %.6e\n", traj.stats.size(),
              vkplate::format_double(last.t).c_str(), last.elastic, last.balance_residual, last.normalized_residual,
              last.min_mu);
  return 0;
}

int cmd_korn(const vkplate::KornConfig& k, const std::string& out) {
  if (k.n < 2 || k.nz < 2) throw vkplate::ValidationError("--n and --nz must be >= 2");
  const vkplate::KornStudy study = vkplate::scaling_study(k.hs, k.n, k.nz, k.z);
  const std::string csv = vkplate::korn_csv(study);
  if (out.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    vkplate::write_text(out, csv);
  }
  std::fprintf(stderr, "least-squares slope %.6f\n", study.slope);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermoviscoelastic von Karman plate solver and thin-slab Korn study"};
  app.require_subcommand(1);

  std::string config;
  bool force = false;
  auto* run = app.add_subcommand("run", "simulate and write the energy ledger (and optional VTK)");
  run->add_option("config", config, "config file")->required();
  run->add_flag("--force", force, "run even if the material violates the splitting conditions");

  std::string hs = "0.4,0.2,0.1";
  int n = 8;
  int nz = 3;
  std::string z = "identity";
  std::string out;
  auto* korn = app.add_subcommand("korn", "Korn constant scaling study, CSV to stdout or --out");
  korn->set_help_flag("--help", "Print this help message and exit");
  std::string korn_config;
  korn->add_option("--config", korn_config, "take defaults from the [korn] section of a config file");
  auto* opt_h = korn->add_option("--h", hs, "comma-separated decreasing thicknesses");
  auto* opt_n = korn->add_option("--n", n, "in-plane cells per side");
  auto* opt_nz = korn->add_option("--nz", nz, "cells through the thickness");
  auto* opt_z = korn->add_option("--z", z, "identity or perturbed");
  korn->add_option("--out", out, "CSV path");

  auto* reduce = app.add_subcommand("reduce", "print the reduced plate tensors");
  reduce->add_option("config", config, "config file")->required();
  auto* check = app.add_subcommand("check", "report the material splitting conditions");
  check->add_option("config", config, "config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(config, force);
    if (*korn) {
      vkplate::KornConfig k = korn_config.empty() ? vkplate::KornConfig{}
                                                  : vkplate::parse_config(read_file(korn_config)).korn;
      if (opt_h->count()) k.hs = parse_hs(hs);
      if (opt_n->count()) k.n = n;
      if (opt_nz->count()) k.nz = nz;
      if (opt_z->count()) {
        if (z != "identity" && z != "perturbed") throw vkplate::ValidationError("--z must be 'identity' or 'perturbed'");
        k.z = z == "identity" ? vkplate::ZKind::identity : vkplate::ZKind::perturbed;
      }
      return cmd_korn(k, out);
    }
    if (*reduce) return cmd_reduce(config);
    if (*check) return cmd_check(config);
  } catch (const vkplate::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const vkplate::SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return 2;
  } catch (const vkplate::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
