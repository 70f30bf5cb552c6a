#include "ccflow/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <future>
#include <iostream>

#include "ccflow/io.hpp"
#include "ccflow/jacobian.hpp"

namespace ccflow {

namespace {

void add_experiment_flags(CLI::App* cmd, ExperimentConfig& cfg, std::string& config_path) {
  cmd->add_option("--config", config_path, "experiment config file; flags override it");
  cmd->add_option("--mesh", cfg.mesh, "mesh file or preset:NAME");
  cmd->add_option("--preset", cfg.mesh,
                  "preset name (shorthand for --mesh preset:NAME)")
      ->transform([](std::string s) { return "preset:" + s; });
  cmd->add_option("--structure", cfg.structure, "cp|vs|mixed with -euclidean|-hyperbolic");
  cmd->add_option("--structure-file", cfg.structure_file, "explicit structure file");
  cmd->add_option("--eta", cfg.eta, "default | uniform:VAL | list:v0,v1,...");
  cmd->add_option("--epsilon", cfg.epsilon, "default | alternating | list:...");
  cmd->add_option("--u0", cfg.u0, "zeros | random | list:...");
  cmd->add_option("--seed", cfg.seed, "seed for random u0");
  cmd->add_option("--u0-range", cfg.u0_range, "amplitude of random u0");
  cmd->add_option("--target", cfg.target, "uniform | zero | current | list:...");
  cmd->add_option("--s", cfg.s, "order of the fractional flow");
  cmd->add_option("--integrator", cfg.integrator, "rk45 | rk4");
  cmd->add_option("--dt-init", cfg.dt_init, "initial step");
  cmd->add_option("--dt-min", cfg.dt_min, "smallest step before failing");
  cmd->add_option("--dt-max", cfg.dt_max, "largest step");
  cmd->add_option("--tol-curvature", cfg.tol_curvature, "stopping residual (inf norm)");
  cmd->add_option("--t-max", cfg.t_max, "time horizon");
  cmd->add_option("--surgery", cfg.surgery, "off | delaunay | weighted_delaunay");
  cmd->add_flag("--frozen-initial-curvature", cfg.frozen_initial_curvature,
                "drive the flow with the initial curvature held fixed");
  cmd->add_flag("--delaunay-guard", cfg.delaunay_guard,
                "without surgery, stop instead of leaving the Delaunay region");
  cmd->add_option("--trace", cfg.trace_path, "trace CSV output path");
  cmd->add_option("--summary", cfg.summary_path, "summary output path");
}

// Flags given on the command line win over the config file.
ExperimentConfig merge_config(const CLI::App* cmd, const ExperimentConfig& flag_values,
                              const std::string& config_path) {
  if (config_path.empty()) return flag_values;
  ExperimentConfig cfg = load_experiment_file(config_path);
  auto set_if = [&](std::initializer_list<const char*> names, auto member) {
    for (const char* name : names) {
      if (cmd->count(name)) {
        cfg.*member = flag_values.*member;
        return;
      }
    }
  };
  set_if({"--mesh", "--preset"}, &ExperimentConfig::mesh);
  set_if({"--structure"}, &ExperimentConfig::structure);
  set_if({"--structure-file"}, &ExperimentConfig::structure_file);
  set_if({"--eta"}, &ExperimentConfig::eta);
  set_if({"--epsilon"}, &ExperimentConfig::epsilon);
  set_if({"--u0"}, &ExperimentConfig::u0);
  set_if({"--seed"}, &ExperimentConfig::seed);
  set_if({"--u0-range"}, &ExperimentConfig::u0_range);
  set_if({"--target"}, &ExperimentConfig::target);
  set_if({"--s"}, &ExperimentConfig::s);
  set_if({"--integrator"}, &ExperimentConfig::integrator);
  set_if({"--dt-init"}, &ExperimentConfig::dt_init);
  set_if({"--dt-min"}, &ExperimentConfig::dt_min);
  set_if({"--dt-max"}, &ExperimentConfig::dt_max);
  set_if({"--tol-curvature"}, &ExperimentConfig::tol_curvature);
  set_if({"--t-max"}, &ExperimentConfig::t_max);
  set_if({"--surgery"}, &ExperimentConfig::surgery);
  set_if({"--frozen-initial-curvature"}, &ExperimentConfig::frozen_initial_curvature);
  set_if({"--delaunay-guard"}, &ExperimentConfig::delaunay_guard);
  set_if({"--trace"}, &ExperimentConfig::trace_path);
  set_if({"--summary"}, &ExperimentConfig::summary_path);
  return cfg;
}

int run_one_flow(const ExperimentConfig& cfg, bool print_summary) {
  PreparedExperiment prep = prepare_experiment(cfg);
  const FlowResult result = run_flow(prep.mesh, *prep.family, prep.flow);
  if (!cfg.trace_path.empty()) emit_trace_file(cfg.trace_path, result);
  if (!cfg.summary_path.empty()) {
    std::ofstream out(cfg.summary_path);
    emit_summary(out, result);
  }
  if (print_summary) emit_summary(std::cout, result);
  if (result.status == FlowStatus::StepFailure) return 2;
  return result.converged ? 0 : 2;
}

int run_check(const ExperimentConfig& cfg) {
  PreparedExperiment prep = prepare_experiment(cfg);
  const auto& mesh = prep.mesh;
  std::cout << "mesh: V=" << mesh.num_vertices() << " E=" << mesh.num_edges()
            << " F=" << mesh.num_faces() << " chi=" << mesh.euler_characteristic() << '\n';

  bool clean = true;
  if (const auto* dcs = prep.family->structure()) {
    const auto rep = check_structure_condition(mesh, dcs->epsilon, dcs->eta);
    clean = rep.ok();
    std::cout << "structure_condition: "
              << (rep.ok() ? "ok"
                           : std::to_string(rep.edge_violations.size()) + " edge / " +
                                 std::to_string(rep.corner_violations.size()) +
                                 " corner violations")
              << '\n';
  } else {
    std::cout << "structure_condition: ok (vertex scaling)\n";
  }

  const MetricState ms = compute_metric(mesh, prep.family->lengths(), prep.background);
  std::cout << "min_angle=" << format_double(ms.min_angle) << '\n';
  std::cout << "gauss_bonnet_residual="
            << format_double(ms.gauss_bonnet_residual(mesh.euler_characteristic())) << '\n';

  const JacobianL J = jacobian_L(mesh, *prep.family, ms);
  const SpectralForm spec = spectral_decompose(J);
  std::cout << "lambda_min=" << format_double(spec.lambda_min())
            << " lambda_max=" << format_double(spec.lambda_max()) << " rank=" << spec.rank()
            << "/" << mesh.num_vertices() << '\n';

  const DelaunayReport del = delaunay_check(mesh, ms);
  std::cout << "delaunay: " << (del.clean() ? "clean" : std::to_string(del.violations.size()) +
                                                            " violations")
            << " min_slack=" << format_double(del.min_slack) << '\n';
  const WeightedDelaunayReport wdel = weighted_delaunay_indicator(mesh, *prep.family, ms);
  std::cout << "weighted_delaunay: "
            << (wdel.violations.empty() ? "clean"
                                        : std::to_string(wdel.violations.size()) + " violations")
            << '\n';

  try {
    validate_target(prep.flow, mesh, prep.background);
    std::cout << "target: ok\n";
  } catch (const Error& err) {
    std::cout << "target: " << err.what() << '\n';
    return 1;
  }
  return clean ? 0 : 1;
}

int run_sweep(const ExperimentConfig& base_cfg, const std::string& s_values) {
  std::vector<double> svals;
  {
    std::stringstream ss(s_values);
    std::string tok;
    while (std::getline(ss, tok, ',')) svals.push_back(std::stod(tok));
  }
  if (svals.empty()) {
    std::cerr << "sweep: no s values\n";
    return 1;
  }
  std::vector<std::future<FlowResult>> futures;
  for (double s : svals) {
    ExperimentConfig cfg = base_cfg;
    cfg.s = s;
    if (!base_cfg.trace_path.empty())
      cfg.trace_path = base_cfg.trace_path + ".s" + std::to_string(s);
    futures.push_back(std::async(std::launch::async, [cfg]() {
      PreparedExperiment prep = prepare_experiment(cfg);
      FlowResult r = run_flow(prep.mesh, *prep.family, prep.flow);
      if (!cfg.trace_path.empty()) emit_trace_file(cfg.trace_path, r);
      return r;
    }));
  }
  std::cout << "s,converged,final_residual,fitted_rate,flips,accepted_steps,wall_s\n";
  int rc = 0;
  for (std::size_t i = 0; i < svals.size(); ++i) {
    const FlowResult r = futures[i].get();
    std::cout << svals[i] << ',' << (r.converged ? "true" : "false") << ','
              << format_double(r.final_residual) << ',' << format_double(r.fitted_decay_rate)
              << ',' << r.flip_events.size() << ',' << r.accepted_steps << ','
              << format_double(r.wall_seconds) << '\n';
    if (r.status == FlowStatus::StepFailure) rc = 2;
    else if (!r.converged && rc == 0) rc = 2;
  }
  return rc;
}

} // namespace

int cli_run(const std::vector<std::string>& args) {
  CLI::App app{"discrete conformal structures and fractional combinatorial Calabi flows"};
  app.require_subcommand(1);

  ExperimentConfig flow_cfg, check_cfg, sweep_cfg;
  std::string flow_file, check_file, sweep_file, s_values = "-1,-0.5,0,0.5,1,2";

  CLI::App* flow_cmd = app.add_subcommand("flow", "integrate one flow, write trace and summary");
  add_experiment_flags(flow_cmd, flow_cfg, flow_file);

  CLI::App* check_cmd =
      app.add_subcommand("check", "report structure condition, spectrum and Delaunay state");
  add_experiment_flags(check_cmd, check_cfg, check_file);

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run several s values, compare decay rates");
  add_experiment_flags(sweep_cmd, sweep_cfg, sweep_file);
  sweep_cmd->add_option("--s-values", s_values, "comma-separated list of s");

  CLI::App* preset_cmd = app.add_subcommand("preset-list", "list named meshes");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) { // --help
      CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
      std::cout << sub->help();
      return 0;
    }
    std::cerr << e.what() << '\n' << app.help();
    return 1;
  }

  try {
    if (preset_cmd->parsed()) {
      for (const auto& name : preset_names()) {
        const TriangulatedSurface m = preset_mesh(name);
        std::cout << name << " V=" << m.num_vertices() << " E=" << m.num_edges()
                  << " F=" << m.num_faces() << " chi=" << m.euler_characteristic() << '\n';
      }
      return 0;
    }
    if (flow_cmd->parsed()) return run_one_flow(merge_config(flow_cmd, flow_cfg, flow_file), true);
    if (check_cmd->parsed()) return run_check(merge_config(check_cmd, check_cfg, check_file));
    if (sweep_cmd->parsed())
      return run_sweep(merge_config(sweep_cmd, sweep_cfg, sweep_file), s_values);
  } catch (const Error& err) {
    std::cerr << err.what() << '\n';
    return err.code() == ErrorCode::StepFailure ? 2 : 1;
  } catch (const std::exception& err) {
    std::cerr << err.what() << '\n';
    return 1;
  }
  return 1;
}

} // namespace ccflow
