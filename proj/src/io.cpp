#include "ccflow/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace ccflow {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

[[noreturn]] void parse_fail(int line, int column, const std::string& what) {
  throw Error(ErrorCode::ParseError,
              "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& tok, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) parse_fail(line, static_cast<int>(used) + 1, "trailing junk in number");
    return v;
  } catch (const std::invalid_argument&) {
    parse_fail(line, 1, "expected a number, got '" + tok + "'");
  } catch (const std::out_of_range&) {
    parse_fail(line, 1, "number out of range: '" + tok + "'");
  }
}

std::vector<double> parse_list(const std::string& spec, int line) {
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(parse_number(tok, line));
  }
  return out;
}

} // namespace

TriangulatedSurface read_mesh(std::istream& in) {
  int n = 0, f = 0;
  std::string header;
  if (!std::getline(in, header)) parse_fail(1, 1, "missing mesh header");
  {
    std::istringstream hs(header);
    if (!(hs >> n >> f) || n <= 0 || f <= 0) parse_fail(1, 1, "mesh header must be 'N F'");
  }
  std::vector<std::array<int, 3>> faces;
  faces.reserve(f);
  for (int k = 0; k < f; ++k) {
    std::string row;
    if (!std::getline(in, row)) parse_fail(k + 2, 1, "missing face row");
    std::istringstream rs(row);
    std::array<int, 3> tri{};
    if (!(rs >> tri[0] >> tri[1] >> tri[2]))
      parse_fail(k + 2, 1, "face row needs three vertex indices");
    faces.push_back(tri);
  }
  return TriangulatedSurface::from_faces(faces, n);
}

TriangulatedSurface read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open mesh file '" + path + "'");
  return read_mesh(in);
}

void write_mesh(std::ostream& out, const TriangulatedSurface& mesh) {
  out << mesh.num_vertices() << ' ' << mesh.num_faces() << '\n';
  for (const auto& f : mesh.faces()) out << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

TriangulatedSurface resolve_mesh(const std::string& source) {
  if (source.rfind("preset:", 0) == 0) return preset_mesh(source.substr(7));
  return read_mesh_file(source);
}

DiscreteConformalStructure read_structure(std::istream& in, const TriangulatedSurface& mesh) {
  DiscreteConformalStructure dcs;
  dcs.epsilon = VectorXi::Zero(mesh.num_vertices());
  dcs.eta = VectorXd::Zero(mesh.num_edges());
  VectorXd f = VectorXd::Zero(mesh.num_vertices());
  std::vector<bool> v_seen(mesh.num_vertices(), false), e_seen(mesh.num_edges(), false);
  bool bg_seen = false;
  std::string row;
  int line = 0;
  while (std::getline(in, row)) {
    ++line;
    row = trim(row.substr(0, row.find('#')));
    if (row.empty()) continue;
    std::istringstream rs(row);
    std::string tag;
    rs >> tag;
    if (tag == "format=1" || tag == "format") continue;
    if (tag == "background") {
      std::string bg;
      rs >> bg;
      if (bg == "euclidean")
        dcs.background = Background::Euclidean;
      else if (bg == "hyperbolic")
        dcs.background = Background::Hyperbolic;
      else
        parse_fail(line, 12, "unknown background '" + bg + "'");
      bg_seen = true;
    } else if (tag == "v") {
      int i = -1, eps = -1;
      double fi = 0;
      if (!(rs >> i >> eps >> fi) || i < 0 || i >= mesh.num_vertices() || (eps != 0 && eps != 1))
        parse_fail(line, 1, "vertex row must be 'v i eps f' with eps in {0,1}");
      dcs.epsilon[i] = eps;
      f[i] = fi;
      v_seen[i] = true;
    } else if (tag == "e") {
      int k = -1;
      double eta = 0;
      if (!(rs >> k >> eta) || k < 0 || k >= mesh.num_edges())
        parse_fail(line, 1, "edge row must be 'e k eta'");
      dcs.eta[k] = eta;
      e_seen[k] = true;
    } else {
      parse_fail(line, 1, "unknown record '" + tag + "'");
    }
  }
  if (!bg_seen) parse_fail(line + 1, 1, "missing background line");
  for (int i = 0; i < mesh.num_vertices(); ++i)
    if (!v_seen[i]) parse_fail(line + 1, 1, "missing vertex " + std::to_string(i));
  for (int e = 0; e < mesh.num_edges(); ++e)
    if (!e_seen[e]) parse_fail(line + 1, 1, "missing edge " + std::to_string(e));
  dcs.u = u_from_f(dcs.background, dcs.epsilon, f);
  return dcs;
}

DiscreteConformalStructure read_structure_file(const std::string& path,
                                               const TriangulatedSurface& mesh) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open structure file '" + path + "'");
  return read_structure(in, mesh);
}

void write_structure(std::ostream& out, const TriangulatedSurface& mesh,
                     const DiscreteConformalStructure& dcs) {
  out << "format=1\n";
  out << "background " << background_name(dcs.background) << '\n';
  const VectorXd f = f_from_u(dcs.background, dcs.epsilon, dcs.u);
  for (int i = 0; i < mesh.num_vertices(); ++i)
    out << "v " << i << ' ' << dcs.epsilon[i] << ' ' << format_double(f[i]) << '\n';
  for (int e = 0; e < mesh.num_edges(); ++e)
    out << "e " << e << ' ' << format_double(dcs.eta[e]) << '\n';
}

ExperimentConfig load_experiment(std::istream& in) {
  ExperimentConfig cfg;
  std::string row;
  int line = 0;
  while (std::getline(in, row)) {
    ++line;
    const std::string stripped = trim(row.substr(0, row.find('#')));
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) parse_fail(line, 1, "expected 'key = value'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string val = trim(stripped.substr(eq + 1));
    if (key == "mesh") cfg.mesh = val;
    else if (key == "structure") cfg.structure = val;
    else if (key == "structure_file") cfg.structure_file = val;
    else if (key == "eta") cfg.eta = val;
    else if (key == "epsilon") cfg.epsilon = val;
    else if (key == "u0") cfg.u0 = val;
    else if (key == "seed") cfg.seed = static_cast<unsigned>(parse_number(val, line));
    else if (key == "u0_range") cfg.u0_range = parse_number(val, line);
    else if (key == "target") cfg.target = val;
    else if (key == "s") cfg.s = parse_number(val, line);
    else if (key == "integrator") cfg.integrator = val;
    else if (key == "dt_init") cfg.dt_init = parse_number(val, line);
    else if (key == "dt_min") cfg.dt_min = parse_number(val, line);
    else if (key == "dt_max") cfg.dt_max = parse_number(val, line);
    else if (key == "tol_curvature") cfg.tol_curvature = parse_number(val, line);
    else if (key == "t_max") cfg.t_max = parse_number(val, line);
    else if (key == "surgery") cfg.surgery = val;
    else if (key == "frozen_initial_curvature") cfg.frozen_initial_curvature = val == "true";
    else if (key == "delaunay_guard") cfg.delaunay_guard = val == "true";
    else if (key == "trace") cfg.trace_path = val;
    else if (key == "summary") cfg.summary_path = val;
    else parse_fail(line, 1, "unknown key '" + key + "'");
  }
  return cfg;
}

ExperimentConfig load_experiment_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open config file '" + path + "'");
  return load_experiment(in);
}

void dump_experiment(std::ostream& out, const ExperimentConfig& cfg) {
  out << "mesh = " << cfg.mesh << '\n';
  out << "structure = " << cfg.structure << '\n';
  if (!cfg.structure_file.empty()) out << "structure_file = " << cfg.structure_file << '\n';
  out << "eta = " << cfg.eta << '\n';
  out << "epsilon = " << cfg.epsilon << '\n';
  out << "u0 = " << cfg.u0 << '\n';
  out << "seed = " << cfg.seed << '\n';
  out << "u0_range = " << format_double(cfg.u0_range) << '\n';
  out << "target = " << cfg.target << '\n';
  out << "s = " << format_double(cfg.s) << '\n';
  out << "integrator = " << cfg.integrator << '\n';
  out << "dt_init = " << format_double(cfg.dt_init) << '\n';
  out << "dt_min = " << format_double(cfg.dt_min) << '\n';
  out << "dt_max = " << format_double(cfg.dt_max) << '\n';
  out << "tol_curvature = " << format_double(cfg.tol_curvature) << '\n';
  out << "t_max = " << format_double(cfg.t_max) << '\n';
  out << "surgery = " << cfg.surgery << '\n';
  out << "frozen_initial_curvature = " << (cfg.frozen_initial_curvature ? "true" : "false")
      << '\n';
  out << "delaunay_guard = " << (cfg.delaunay_guard ? "true" : "false") << '\n';
  if (!cfg.trace_path.empty()) out << "trace = " << cfg.trace_path << '\n';
  if (!cfg.summary_path.empty()) out << "summary = " << cfg.summary_path << '\n';
}

namespace {

// Deterministic uniform in [-1, 1) from raw mt19937_64 output.
double uniform_pm1(std::mt19937_64& rng) {
  return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
}

VectorXd preset_vs_lengths(const std::string& mesh_source, const TriangulatedSurface& mesh,
                           Background bg) {
  if (mesh_source == "preset:flat_torus_4x4") {
    VectorXd l(mesh.num_edges());
    auto coord = [](int v) { return std::pair<int, int>{v / 4, v % 4}; };
    for (int e = 0; e < mesh.num_edges(); ++e) {
      const auto [a, b] = mesh.edge_endpoints(e);
      const auto [ai, aj] = coord(a);
      const auto [bi, bj] = coord(b);
      const int dx = std::min(std::abs(ai - bi), 4 - std::abs(ai - bi));
      const int dy = std::min(std::abs(aj - bj), 4 - std::abs(aj - bj));
      l[e] = std::sqrt(static_cast<double>(dx * dx + dy * dy));
    }
    return l;
  }
  if (mesh_source == "preset:genus2_one_vertex" && bg == Background::Hyperbolic) {
    // Equilateral length with zero curvature: 18 corners of angle pi/9 each.
    const double c = std::cos(std::numbers::pi / 9.0);
    return VectorXd::Constant(mesh.num_edges(), std::acosh(c / (1.0 - c)));
  }
  return VectorXd::Constant(mesh.num_edges(), 1.0);
}

} // namespace

PreparedExperiment prepare_experiment(const ExperimentConfig& cfg) {
  PreparedExperiment prep;
  prep.mesh = resolve_mesh(cfg.mesh);
  const int n = prep.mesh.num_vertices();
  const int ne = prep.mesh.num_edges();

  std::string kind, bg_name;
  {
    const auto dash = cfg.structure.rfind('-');
    if (dash == std::string::npos)
      throw Error(ErrorCode::ParseError, "structure must look like cp-euclidean");
    kind = cfg.structure.substr(0, dash);
    bg_name = cfg.structure.substr(dash + 1);
  }
  if (bg_name == "euclidean") prep.background = Background::Euclidean;
  else if (bg_name == "hyperbolic") prep.background = Background::Hyperbolic;
  else throw Error(ErrorCode::ParseError, "unknown background '" + bg_name + "'");
  if (kind != "cp" && kind != "vs" && kind != "mixed")
    throw Error(ErrorCode::ParseError, "unknown structure kind '" + kind + "'");

  // Per-vertex epsilon.
  VectorXi epsilon = VectorXi::Constant(n, kind == "cp" ? 1 : 0);
  if (kind == "mixed") {
    if (cfg.epsilon == "default" || cfg.epsilon == "alternating")
      for (int i = 0; i < n; ++i) epsilon[i] = i % 2;
    else if (cfg.epsilon.rfind("list:", 0) == 0) {
      const auto vals = parse_list(cfg.epsilon.substr(5), 0);
      if (static_cast<int>(vals.size()) != n)
        throw Error(ErrorCode::DimensionMismatch, "epsilon list sized to vertices");
      for (int i = 0; i < n; ++i) epsilon[i] = vals[i] != 0.0 ? 1 : 0;
    } else {
      throw Error(ErrorCode::ParseError, "bad epsilon spec '" + cfg.epsilon + "'");
    }
  }

  // Per-edge eta.
  VectorXd eta = VectorXd::Constant(ne, kind == "mixed" ? 0.8 : 1.0);
  if (cfg.eta.rfind("uniform:", 0) == 0)
    eta.setConstant(parse_number(cfg.eta.substr(8), 0));
  else if (cfg.eta.rfind("list:", 0) == 0) {
    const auto vals = parse_list(cfg.eta.substr(5), 0);
    if (static_cast<int>(vals.size()) != ne)
      throw Error(ErrorCode::DimensionMismatch, "eta list sized to edges");
    for (int e = 0; e < ne; ++e) eta[e] = vals[e];
  } else if (cfg.eta != "default") {
    throw Error(ErrorCode::ParseError, "bad eta spec '" + cfg.eta + "'");
  }

  // Base structure (before the u0 move).
  DiscreteConformalStructure base;
  base.background = prep.background;
  base.epsilon = epsilon;
  base.eta = eta;
  base.u = VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (prep.background == Background::Hyperbolic && epsilon[i] == 1)
      base.u[i] = u_from_r(1.0); // unit-radius packing as the base point
  }
  if (!cfg.structure_file.empty()) base = read_structure_file(cfg.structure_file, prep.mesh);

  // Base metric for vertex scaling: an explicit structure file wins over the
  // preset's natural lengths.
  const VectorXd vs_base_lengths =
      kind == "vs" ? (cfg.structure_file.empty()
                          ? preset_vs_lengths(cfg.mesh, prep.mesh, prep.background)
                          : dcs_lengths(prep.mesh, base))
                   : VectorXd();

  // Initial conformal move u0 relative to the base.
  VectorXd du0 = VectorXd::Zero(n);
  if (cfg.u0 == "zeros" || cfg.u0 == "base") {
    // keep base
  } else if (cfg.u0 == "random" || cfg.u0 == "perturb") {
    std::mt19937_64 rng(cfg.seed);
    for (int i = 0; i < n; ++i) du0[i] = cfg.u0_range * uniform_pm1(rng);
    if (prep.background == Background::Euclidean) du0.array() -= du0.mean();
  } else if (cfg.u0.rfind("list:", 0) == 0) {
    const auto vals = parse_list(cfg.u0.substr(5), 0);
    if (static_cast<int>(vals.size()) != n)
      throw Error(ErrorCode::DimensionMismatch, "u0 list sized to vertices");
    for (int i = 0; i < n; ++i) du0[i] = vals[i] - base.u[i];
  } else {
    throw Error(ErrorCode::ParseError, "bad u0 spec '" + cfg.u0 + "'");
  }

  // Target curvature.
  const double gb = 2.0 * std::numbers::pi * prep.mesh.euler_characteristic();
  VectorXd target(n);
  if (cfg.target == "uniform") {
    if (prep.background == Background::Euclidean)
      target.setConstant(gb / n);
    else
      target.setZero(); // admissible for chi < 0; validation rejects otherwise
  } else if (cfg.target == "zero") {
    target.setZero();
  } else if (cfg.target == "current") {
    if (kind == "vs") {
      target = compute_metric(prep.mesh, vs_base_lengths, prep.background).K;
    } else {
      const StructureFamily fam(prep.mesh, base);
      target = compute_metric(prep.mesh, fam.lengths(), prep.background).K;
    }
  } else if (cfg.target.rfind("list:", 0) == 0) {
    const auto vals = parse_list(cfg.target.substr(5), 0);
    if (static_cast<int>(vals.size()) != n)
      throw Error(ErrorCode::DimensionMismatch, "target list sized to vertices");
    for (int i = 0; i < n; ++i) target[i] = vals[i];
  } else {
    throw Error(ErrorCode::ParseError, "bad target spec '" + cfg.target + "'");
  }

  // Family. The initial move is shrunk geometrically until the starting
  // metric is a valid polyhedral metric (flows and surgery both need one).
  for (double shrink = 1.0;; shrink *= 0.85) {
    if (shrink < 1e-6)
      throw Error(ErrorCode::DegenerateLength, "no valid starting metric for this u0");
    try {
      if (kind == "vs") {
        const VectorXd l0 =
            vertex_scale_lengths(prep.mesh, vs_base_lengths, shrink * du0, prep.background);
        if (min_triangle_slack(prep.mesh, l0) <= 1e-6) continue;
        prep.family = std::make_unique<ScalingFamily>(prep.background, l0);
      } else {
        DiscreteConformalStructure start = base;
        start.u += shrink * du0;
        auto fam = std::make_unique<StructureFamily>(prep.mesh, std::move(start));
        if (min_triangle_slack(prep.mesh, fam->lengths()) <= 1e-6) continue;
        prep.family = std::move(fam);
      }
      break;
    } catch (const Error& err) {
      if (err.code() != ErrorCode::DegenerateLength && err.code() != ErrorCode::InvalidU)
        throw;
    }
  }

  // Flow config.
  prep.flow.s = cfg.s;
  prep.flow.target_K = target;
  if (cfg.integrator == "rk45") prep.flow.integrator = Integrator::RK45Adaptive;
  else if (cfg.integrator == "rk4") prep.flow.integrator = Integrator::RK4Fixed;
  else throw Error(ErrorCode::ParseError, "unknown integrator '" + cfg.integrator + "'");
  prep.flow.dt_init = cfg.dt_init;
  prep.flow.dt_min = cfg.dt_min;
  prep.flow.dt_max = cfg.dt_max;
  prep.flow.tol_curvature = cfg.tol_curvature;
  prep.flow.t_max = cfg.t_max;
  if (cfg.surgery == "off") prep.flow.surgery = SurgeryMode::Off;
  else if (cfg.surgery == "delaunay") prep.flow.surgery = SurgeryMode::Delaunay;
  else if (cfg.surgery == "weighted_delaunay")
    prep.flow.surgery = SurgeryMode::WeightedDelaunay;
  else throw Error(ErrorCode::ParseError, "unknown surgery mode '" + cfg.surgery + "'");
  prep.flow.frozen_initial_curvature = cfg.frozen_initial_curvature;
  prep.flow.delaunay_guard = cfg.delaunay_guard;
  if (prep.flow.surgery != SurgeryMode::Off) prep.flow.dt_max = std::min(prep.flow.dt_max, 0.1);
  return prep;
}

void emit_trace(std::ostream& out, const FlowResult& result) {
  const int n = result.trace.empty() ? 0 : static_cast<int>(result.trace.front().K.size());
  out << "# format=1\n";
  out << "t,calabi_energy,sum_u,min_angle,lambda_min,lambda_max,flips";
  for (int i = 0; i < n; ++i) out << ",K_" << i;
  for (int i = 0; i < n; ++i) out << ",u_" << i;
  out << '\n';
  std::size_t next_flip = 0;
  for (const auto& rec : result.trace) {
    while (next_flip < result.flip_events.size() &&
           result.flip_events[next_flip].t <= rec.t) {
      const auto& ev = result.flip_events[next_flip++];
      out << "FLIP," << format_double(ev.t) << ',' << ev.v_i << ',' << ev.v_j << ',' << ev.v_k
          << ',' << ev.v_l << ',' << format_double(ev.new_length) << ','
          << format_double(ev.slack_before) << ',' << format_double(ev.slack_after) << '\n';
    }
    out << format_double(rec.t) << ',' << format_double(rec.calabi) << ','
        << format_double(rec.sum_u) << ',' << format_double(rec.min_angle) << ','
        << format_double(rec.lambda_min) << ',' << format_double(rec.lambda_max) << ','
        << rec.flips;
    for (int i = 0; i < n; ++i) out << ',' << format_double(rec.K[i]);
    for (int i = 0; i < n; ++i) out << ',' << format_double(rec.u[i]);
    out << '\n';
  }
  for (; next_flip < result.flip_events.size(); ++next_flip) {
    const auto& ev = result.flip_events[next_flip];
    out << "FLIP," << format_double(ev.t) << ',' << ev.v_i << ',' << ev.v_j << ',' << ev.v_k
        << ',' << ev.v_l << ',' << format_double(ev.new_length) << ','
        << format_double(ev.slack_before) << ',' << format_double(ev.slack_after) << '\n';
  }
}

void emit_trace_file(const std::string& path, const FlowResult& result) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ParseError, "cannot open trace file '" + path + "'");
  emit_trace(out, result);
}

void emit_summary(std::ostream& out, const FlowResult& result) {
  out << "format=1\n";
  out << "converged=" << (result.converged ? "true" : "false") << '\n';
  const char* status = result.status == FlowStatus::Converged
                           ? "converged"
                           : result.status == FlowStatus::ReachedTMax ? "t_max" : "step_failure";
  out << "status=" << status << '\n';
  out << "final_residual=" << format_double(result.final_residual) << '\n';
  out << "fitted_rate=" << format_double(result.fitted_decay_rate) << '\n';
  out << "flip_count=" << result.flip_events.size() << '\n';
  out << "accepted_steps=" << result.accepted_steps << '\n';
  out << "rejected_steps=" << result.rejected_steps << '\n';
  out << "surgery_needed=" << (result.surgery_needed ? "true" : "false") << '\n';
  out << "max_gauss_bonnet_residual=" << format_double(result.max_gb_residual) << '\n';
  out << "wall_time_s=" << format_double(result.wall_seconds) << '\n';
  if (!result.message.empty()) out << "message=" << result.message << '\n';
}

} // namespace ccflow
