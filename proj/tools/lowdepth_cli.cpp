#include <openssl/evp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lowdepth/lowdepth.hpp"

namespace ld = lowdepth;
using ld::json;

namespace {

// ------------------------------------------------------------- hashing

std::string hex(const unsigned char* d, unsigned len) {
  std::ostringstream out;
  for (unsigned i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(d[i]);
  return out.str();
}

/// SHA-1 of "blob <size>\0<content>", the object id git assigns to a file.
std::string git_blob_hash(const std::string& content) {
  const std::string data = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha1(), nullptr) != 1)
    throw ld::NumericalError("sha1 digest failed");
  return hex(md, len);
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ------------------------------------------------------------ run context

struct Context {
  unsigned threads = 0;
  std::string config_path;
  std::string manifest_path;
  std::string out_path;
  std::vector<std::string> inputs;   // files read by the command
  std::vector<std::string> outputs;  // files written by the command
  std::optional<std::uint64_t> seed;

  ld::ExecPolicy policy() const { return ld::ExecPolicy{threads}; }

  std::string read(const std::string& path) {
    inputs.push_back(path);
    return ld::read_text_file(path);
  }

  void write(const std::string& path, const std::string& text) {
    ld::write_text_file(path, text);
    outputs.push_back(path);
  }

  /// Primary result: to --out when given, otherwise stdout.
  void emit(const std::string& text) {
    if (out_path.empty()) std::cout << text;
    else write(out_path, text);
  }
  void emit(const json& j) { emit(j.dump(2) + "\n"); }
};

Context ctx;

// --------------------------------------------------------- ensemble flags

struct EnsembleOpts {
  std::string ensemble = "brickwork";
  int n = 0;
  int xi = 0;
  std::string kind = "haar";
  int local_depth = 2;
  std::uint64_t key_seed = 0;
  int depth = 1;
  std::string circuit;

  void add(CLI::App* app) {
    app->add_option("--ensemble", ensemble, "brickwork | local | global | identity | fixed")
        ->check(CLI::IsMember({"brickwork", "local", "global", "identity", "fixed"}))
        ->capture_default_str();
    app->add_option("--n", n, "number of qubits");
    app->add_option("--xi", xi, "brickwork patch size");
    app->add_option("--kind", kind, "haar | clifford | lrc | pfc (brickwork); haar | clifford | orthogonal (local, global)")
        ->check(CLI::IsMember({"haar", "clifford", "lrc", "pfc", "orthogonal"}))
        ->capture_default_str();
    app->add_option("--local-depth", local_depth, "depth of each lrc patch circuit")->capture_default_str();
    app->add_option("--key-seed", key_seed, "key seed of pfc patches")->capture_default_str();
    app->add_option("--depth", depth, "depth of the local ensemble; collision also reports the 1 + n/3^(2d) bound for it")->capture_default_str();
    app->add_option("--circuit", circuit, "circuit JSON for --ensemble fixed");
  }

  ld::TwoQubitKind two_qubit_kind() const {
    if (kind == "haar") return ld::TwoQubitKind::Haar;
    if (kind == "clifford") return ld::TwoQubitKind::Clifford;
    if (kind == "orthogonal") return ld::TwoQubitKind::Orthogonal;
    throw ld::UsageError("--kind " + kind + " is only valid for brickwork ensembles");
  }

  ld::BrickworkSpec brickwork_spec(std::optional<int> default_xi = std::nullopt) const {
    ld::LocalKind lk;
    if (kind == "haar") lk = ld::LocalKind::haar();
    else if (kind == "clifford") lk = ld::LocalKind::clifford();
    else if (kind == "lrc") lk = ld::LocalKind::local_random_circuit(local_depth);
    else if (kind == "pfc") lk = ld::LocalKind::pfc(key_seed);
    else throw ld::UsageError("--kind " + kind + " is not a brickwork patch kind");
    int x = xi;
    if (x == 0 && default_xi) x = *default_xi;
    ld::detail::require(x >= 1, "--xi is required for brickwork ensembles");
    return ld::BrickworkSpec{n, x, lk};
  }

  ld::Ensemble make(std::optional<int> default_xi = std::nullopt) {
    if (ensemble == "fixed") {
      ld::detail::require(!circuit.empty(), "--ensemble fixed needs --circuit");
      return ld::Ensemble::fixed(ld::circuit_from_json(ld::parse_json_text(ctx.read(circuit), circuit)));
    }
    ld::detail::require(n >= 1, "--n is required and must be positive");
    if (ensemble == "brickwork") {
      const auto spec = brickwork_spec(default_xi);
      ld::brickwork_patches(spec);
      return ld::Ensemble::brickwork(spec);
    }
    if (ensemble == "local") return ld::Ensemble::local_circuit(n, depth, two_qubit_kind());
    if (ensemble == "global") return ld::Ensemble::global(n, two_qubit_kind());
    return ld::Ensemble::identity(n);
  }
};

void add_seed(CLI::App* app) {
  app->add_option("--seed", ctx.seed, "master seed of the random streams")->required();
}

std::uint64_t seed() { return *ctx.seed; }

// ------------------------------------------------------------- commands

void cmd_build(EnsembleOpts& e) {
  ld::RngStream rng(seed(), 0);
  ctx.emit(ld::circuit_to_json(e.make().sample(rng)).dump() + "\n");
}

json collision_json(const ld::CollisionReport& r) {
  json j{{"z_estimate", r.z_estimate},
         {"std_error", r.std_error},
         {"haar_reference", r.haar_reference},
         {"light_cone", r.light_cone},
         {"lower_bound", r.lower_bound_value},
         {"samples", r.samples},
         {"seed", r.seed},
         {"stabilizer_backend", r.stabilizer_backend}};
  if (r.depth_for_bound) {
    j["depth"] = *r.depth_for_bound;
    j["depth_bound"] = *r.depth_bound_value;
  }
  return j;
}

ld::Matrix moment_probe(const std::string& probe, int n, int k) {
  const auto dim = static_cast<Eigen::Index>(ld::pow2(n * k));
  if (probe == "zero") {
    ld::Matrix a = ld::Matrix::Zero(dim, dim);
    a(0, 0) = 1.0;
    return a;
  }
  ld::RngStream rng(seed(), ~std::uint64_t{0});
  std::normal_distribution<double> nd;
  ld::Matrix g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = ld::cplx(nd(rng), nd(rng));
  ld::Matrix h = (g + g.adjoint()) / 2.0;
  return h / h.norm();
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      ld::detail::require(used == item.size(), "");
    } catch (const std::exception&) {
      throw ld::UsageError(what + ": expected comma-separated integers, got '" + text + "'");
    }
  }
  return out;
}

struct CompiledInput {
  ld::Circuit circuit;
  std::optional<std::vector<int>> relabeling;
};

/// A plain circuit JSON or the report written by `compile`.
CompiledInput load_compiled(const std::string& path) {
  const json j = ld::parse_json_text(ctx.read(path), path);
  if (j.contains("circuit") && j.contains("relabeling")) {
    try {
      return {ld::circuit_from_json(j.at("circuit")), j.at("relabeling").get<std::vector<int>>()};
    } catch (const json::exception& ex) {
      throw ld::UsageError(path + ": " + ex.what());
    }
  }
  return {ld::circuit_from_json(j), std::nullopt};
}

ld::ShadowObservable load_observable(const std::string& pauli, const std::string& projector, const std::string& dense) {
  const int given = !pauli.empty() + !projector.empty() + !dense.empty();
  ld::detail::require(given == 1, "give exactly one of --pauli, --projector, --dense");
  if (!pauli.empty()) return ld::PauliObservable{ld::PauliString::from_label(pauli)};
  if (!projector.empty())
    return ld::StabilizerProjector{ld::circuit_from_json(ld::parse_json_text(ctx.read(projector), projector))};
  const json j = ld::parse_json_text(ctx.read(dense), dense);
  try {
    const auto rows = j.at("matrix");
    const auto d = static_cast<Eigen::Index>(rows.size());
    ld::Matrix m(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
      ld::detail::require(static_cast<Eigen::Index>(rows[r].size()) == d, dense + ": matrix is not square");
      for (Eigen::Index c = 0; c < d; ++c) m(r, c) = ld::cplx(rows[r][c][0].get<double>(), rows[r][c][1].get<double>());
    }
    return ld::DenseObservable{m};
  } catch (const json::exception& ex) {
    throw ld::UsageError(dense + ": expected {\"matrix\": [[[re, im], ...], ...]}: " + ex.what());
  }
}

json estimate_json(const ld::ShadowEstimate& e) {
  return {{"value", e.value},
          {"method", e.method == ld::ShadowMethod::Mean ? "mean" : "median_of_means"},
          {"batches", e.batches},
          {"batch_means", e.batch_means},
          {"n_snapshots", e.n_snapshots},
          {"mean", e.mean},
          {"std_error", e.std_error},
          {"sample_variance", e.sample_variance}};
}

json time_reversal_json(const ld::TimeReversalResult& r) {
  return {{"with_long_range", r.with_long_range},
          {"faraway_one_frequency", r.faraway_one_frequency},
          {"std_error", r.std_error},
          {"threshold", r.threshold},
          {"faraway", r.faraway},
          {"runs", r.n_runs},
          {"seed", r.seed}};
}

// --------------------------------------------------------- config files

/// Appends `--key value` for every config entry whose flag is absent from
/// argv, so command-line flags take precedence over the file.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  const json cfg = ld::parse_json_text(ld::read_text_file(path), path);
  ld::detail::require(cfg.is_object(), path + ": config must be a JSON object");
  auto present = [&](const std::string& flag) {
    for (const auto& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
  };
  auto scalar = [&](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
  for (const auto& [key, value] : cfg.items()) {
    const std::string flag = "--" + key;
    if (present(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) joined += (joined.empty() ? "" : ",") + scalar(v);
      args.push_back(flag);
      args.push_back(joined);
    } else {
      args.push_back(flag);
      args.push_back(scalar(value));
    }
  }
  return args;
}

// ------------------------------------------------------------- manifest

const CLI::App* leaf_of(const CLI::App& app) {
  const CLI::App* cur = &app;
  while (!cur->get_subcommands().empty()) cur = cur->get_subcommands().front();
  return cur;
}

std::string command_path(const CLI::App& app) {
  std::string path;
  for (const CLI::App* cur = &app; !cur->get_subcommands().empty();) {
    cur = cur->get_subcommands().front();
    path += (path.empty() ? "" : " ") + cur->get_name();
  }
  return path;
}

json config_snapshot(const CLI::App& app) {
  json cfg = json::object();
  for (const CLI::Option* opt : leaf_of(app)->get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help") continue;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      cfg[name] = res.size() == 1 ? json(res.front()) : json(res);
    } else if (!opt->get_default_str().empty()) {
      cfg[name] = opt->get_default_str();
    }
  }
  return cfg;
}

void write_manifest(const CLI::App& app, const std::vector<std::string>& argv, const std::string& started) {
  std::string path = ctx.manifest_path;
  if (path.empty() && !ctx.out_path.empty()) path = ctx.out_path + ".manifest.json";
  if (path.empty()) return;
  const json cfg = config_snapshot(app);
  json inputs = json::array();
  std::string hashed = cfg.dump();
  for (const auto& in : ctx.inputs) {
    const std::string content = ld::read_text_file(in);
    inputs.push_back({{"path", in}, {"hash", git_blob_hash(content)}});
    hashed += content;
  }
  json m{{"command", command_path(app)},
         {"argv", argv},
         {"config", cfg},
         {"seed", ctx.seed ? json(*ctx.seed) : json(nullptr)},
         {"inputs", inputs},
         {"content_hash", git_blob_hash(hashed)},
         {"outputs", ctx.outputs},
         {"started", started},
         {"finished", utc_now()}};
  ld::write_text_file(path, m.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-depth random unitary toolkit: ensembles, design diagnostics, geometry compilation, shadows, protocols"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--threads", ctx.threads, "worker threads (0 = available parallelism)");
  app.add_option("--config", ctx.config_path, "JSON file of flag defaults; explicit flags win");
  app.add_option("--manifest", ctx.manifest_path, "run manifest path (default <out>.manifest.json when --out is set)");
  app.add_option("--out", ctx.out_path, "write the primary result here instead of stdout");

  // build
  EnsembleOpts build_e;
  auto* build = app.add_subcommand("build", "sample one circuit from an ensemble and write it as JSON");
  build_e.add(build);
  add_seed(build);
  build->callback([&] { cmd_build(build_e); });

  // verify
  auto* verify = app.add_subcommand("verify", "design diagnostics");
  verify->require_subcommand(1);

  EnsembleOpts col_e;
  std::size_t col_samples = 20000;
  std::string col_basis = "haar";
  auto* col = verify->add_subcommand("collision", "collision probability in a random product basis");
  col_e.add(col);
  col->add_option("--samples", col_samples)->capture_default_str();
  col->add_option("--basis", col_basis, "haar | clifford product basis")
      ->check(CLI::IsMember({"haar", "clifford"}))
      ->capture_default_str();
  add_seed(col);
  col->callback([&] {
    const auto basis = col_basis == "clifford" ? ld::ProductBasis::Clifford : ld::ProductBasis::Haar;
    std::optional<int> d;
    if (col->count("--depth") > 0) d = col_e.depth;
    ctx.emit(collision_json(ld::collision_probability(col_e.make(), col_samples, seed(), basis, d, ctx.policy())));
  });

  EnsembleOpts fp_e;
  int fp_k = 2;
  std::size_t fp_pairs = 10000;
  auto* fp = verify->add_subcommand("frame", "frame potential E|tr(U^dag V)|^{2k}");
  fp_e.add(fp);
  fp->add_option("--k", fp_k)->capture_default_str();
  fp->add_option("--pairs", fp_pairs)->capture_default_str();
  add_seed(fp);
  fp->callback([&] {
    const auto r = ld::frame_potential(fp_e.make(), fp_k, fp_pairs, seed(), ctx.policy());
    ctx.emit(json{{"k", fp_k}, {"estimate", r.estimate}, {"std_error", r.std_error},
                  {"haar_reference", r.haar_reference}, {"pairs", r.pairs}});
  });

  EnsembleOpts mo_e;
  int mo_k = 2;
  std::size_t mo_samples = 2000;
  std::string mo_probe = "zero";
  auto* mo = verify->add_subcommand("moment", "Monte Carlo k-th moment channel against the exact Haar twirl");
  mo_e.add(mo);
  mo->add_option("--k", mo_k)->capture_default_str();
  mo->add_option("--samples", mo_samples)->capture_default_str();
  mo->add_option("--probe", mo_probe, "zero (|0><0| on all copies) | random (Hermitian, from the seed)")
      ->check(CLI::IsMember({"zero", "random"}))
      ->capture_default_str();
  add_seed(mo);
  mo->callback([&] {
    const auto e = mo_e.make();
    ld::detail::require(mo_k >= 1, "--k must be >= 1");
    ld::detail::require_cap(e.n() * mo_k <= 12, "moment: n*k exceeds 12");
    const ld::Matrix a = moment_probe(mo_probe, e.n(), mo_k);
    const auto est = ld::moment_channel_mc(e, mo_k, a, mo_samples, seed(), ctx.policy());
    const auto exact = ld::haar_twirl_exact(ld::MomentOperatorDense{mo_k, static_cast<int>(ld::pow2(e.n())), a});
    ctx.emit(json{{"k", mo_k},
                  {"n", e.n()},
                  {"probe", mo_probe},
                  {"samples", est.sample_count},
                  {"trace_distance", ld::trace_distance(est.mean_channel_output.matrix, exact.matrix)},
                  {"frobenius_distance", (est.mean_channel_output.matrix - exact.matrix).norm()},
                  {"standard_error", est.standard_error}});
  });

  EnsembleOpts sw_e;
  std::size_t sw_samples = 1000;
  std::string sw_set;
  auto* sw = verify->add_subcommand("swaptest", "light-cone purity of (I + U Z_0 U^dag)/2^n");
  sw_e.add(sw);
  sw->add_option("--samples", sw_samples)->capture_default_str();
  sw->add_option("--set", sw_set, "comma-separated qubits (default: light cone of qubit 0)");
  add_seed(sw);
  sw->callback([&] {
    std::optional<std::vector<int>> set;
    if (!sw_set.empty()) set = parse_int_list(sw_set, "--set");
    const auto r = ld::swap_test_lower_bound(sw_e.make(), sw_samples, seed(), set, ctx.policy());
    ctx.emit(json{{"purity_mean", r.purity_mean},
                  {"std_error", r.std_error},
                  {"haar_reference", r.haar_reference},
                  {"light_cone_value", r.light_cone_value},
                  {"light_cone_size", r.light_cone_size},
                  {"max_dev_from_light_cone_value", r.max_dev_from_light_cone_value},
                  {"samples", r.samples}});
  });

  EnsembleOpts epr_e;
  std::size_t epr_samples = 200;
  auto* epr = verify->add_subcommand("epr", "Bell fidelities after V (x) V on Z_0-flipped EPR pairs");
  epr_e.add(epr);
  epr->add_option("--samples", epr_samples)->capture_default_str();
  add_seed(epr);
  epr->callback([&] {
    const auto r = ld::orthogonal_epr_test(epr_e.make(), epr_samples, seed(), ctx.policy());
    ctx.emit(json{{"fidelity", r.fidelity},
                  {"std_error", r.std_error},
                  {"mean_fidelity", r.mean_fidelity},
                  {"mean_std_error", r.mean_std_error},
                  {"samples", r.samples}});
  });

  std::string eq_original, eq_compiled, eq_relabel;
  double eq_tol = ld::kEquivalenceTol;
  auto* eq = verify->add_subcommand("equivalence", "compare two circuits up to global phase and a relabeling");
  eq->add_option("--original", eq_original, "circuit JSON")->required();
  eq->add_option("--compiled", eq_compiled, "circuit JSON or the report written by compile")->required();
  eq->add_option("--relabeling", eq_relabel, "comma-separated target of each original qubit");
  eq->add_option("--tol", eq_tol)->capture_default_str();
  eq->callback([&] {
    const ld::Circuit original = ld::circuit_from_json(ld::parse_json_text(ctx.read(eq_original), eq_original));
    auto compiled = load_compiled(eq_compiled);
    std::vector<int> relabel = ld::identity_relabeling(original.n());
    if (compiled.relabeling) relabel = *compiled.relabeling;
    if (!eq_relabel.empty()) relabel = parse_int_list(eq_relabel, "--relabeling");
    const auto r = ld::verify_compilation(original, compiled.circuit, relabel, eq_tol);
    ctx.emit(json{{"equal", r.equal}, {"max_dev", r.max_dev}, {"tol", eq_tol}});
  });

  // compile
  std::string cp_geometry, cp_circuit;
  int cp_root = 0;
  bool cp_path_only = false;
  auto* cp = app.add_subcommand("compile", "map a nearest-neighbour 1D circuit onto a connectivity graph");
  cp->add_option("--geometry", cp_geometry, "edge list or JSON geometry")->required();
  cp->add_option("--circuit", cp_circuit, "1D circuit JSON");
  cp->add_option("--root", cp_root, "root of the depth-first search")->capture_default_str();
  cp->add_option("--seed", ctx.seed, "recorded in the manifest; compilation is deterministic");
  cp->add_flag("--path-only", cp_path_only, "only report the Hamiltonian path");
  cp->callback([&] {
    const ld::Geometry g = [&] {
      const std::string text = ctx.read(cp_geometry);
      return text.find_first_not_of(" \t\r\n") != std::string::npos && text[text.find_first_not_of(" \t\r\n")] == '{'
                 ? ld::geometry_from_json(ld::parse_json_text(text, cp_geometry))
                 : ld::parse_edge_list(text);
    }();
    if (cp_path_only) {
      ctx.emit(ld::ham_path_to_json(ld::hamiltonian_path_g4(g, cp_root)));
      return;
    }
    ld::detail::require(!cp_circuit.empty(), "--circuit is required unless --path-only is given");
    const ld::Circuit c = ld::circuit_from_json(ld::parse_json_text(ctx.read(cp_circuit), cp_circuit));
    const auto out = ld::compile_1d_to_geometry(c, g, cp_root);
    ctx.emit(json{{"circuit", ld::circuit_to_json(out.circuit)},
                  {"relabeling", out.relabeling},
                  {"path", ld::ham_path_to_json(out.path)},
                  {"max_colors", out.max_colors},
                  {"max_conflict_degree", out.max_conflict_degree},
                  {"swap_count", out.swap_count},
                  {"input_depth", c.depth()},
                  {"output_depth", out.circuit.depth()},
                  {"overhead", out.overhead}});
  });

  // shadows
  auto* sh = app.add_subcommand("shadows", "classical shadows with shallow random circuits");
  sh->require_subcommand(1);

  EnsembleOpts shc_e;
  shc_e.kind = "clifford";
  std::string shc_prep;
  std::size_t shc_snapshots = 1000;
  auto* shc = sh->add_subcommand("collect", "sample snapshots (U, b) as NDJSON");
  shc_e.add(shc);
  shc->add_option("--prep", shc_prep, "circuit JSON preparing the state (default |0^n>)");
  shc->add_option("--snapshots", shc_snapshots)->capture_default_str();
  add_seed(shc);
  shc->callback([&] {
    std::optional<ld::Circuit> prep;
    if (!shc_prep.empty()) {
      prep = ld::circuit_from_json(ld::parse_json_text(ctx.read(shc_prep), shc_prep));
      if (shc_e.n == 0) shc_e.n = prep->n();
    } else {
      ld::detail::require(shc_e.n >= 2, "--n or --prep is required");
      prep = ld::Circuit(shc_e.n);
    }
    const auto e = shc_e.make(shc_e.n >= 2 ? std::optional<int>(ld::log_depth_xi(shc_e.n)) : std::nullopt);
    ctx.emit(ld::snapshots_to_ndjson(ld::collect_shadows(*prep, e, shc_snapshots, seed(), ctx.policy())));
  });

  std::string she_file, she_pauli, she_projector, she_dense, she_method = "mom";
  int she_batches = ld::default_batches();
  auto* she = sh->add_subcommand("estimate", "estimate tr(O rho) from stored snapshots");
  she->add_option("--snapshots", she_file, "NDJSON written by shadows collect")->required();
  she->add_option("--pauli", she_pauli, "Pauli label, character j acting on qubit j, optional sign");
  she->add_option("--projector", she_projector, "Clifford circuit JSON preparing the target stabilizer state");
  she->add_option("--dense", she_dense, "JSON {\"matrix\": [[[re, im], ...], ...]}");
  she->add_option("--method", she_method, "mean | mom")->check(CLI::IsMember({"mean", "mom"}))->capture_default_str();
  she->add_option("--batches", she_batches, "median-of-means batch count")->capture_default_str();
  she->callback([&] {
    const auto snaps = ld::snapshots_from_ndjson(ctx.read(she_file));
    const auto o = load_observable(she_pauli, she_projector, she_dense);
    const auto method = she_method == "mean" ? ld::ShadowMethod::Mean : ld::ShadowMethod::MedianOfMeans;
    ctx.emit(estimate_json(ld::estimate_observable(snaps, o, method, she_batches, ctx.policy())));
  });

  // stats
  auto* st = app.add_subcommand("stats", "output-distribution statistics");
  st->require_subcommand(1);

  int tv_n = 0, tv_N = 0;
  auto* tv = st->add_subcommand("tvbound", "exact TV between N Haar-output samples and N uniform samples");
  tv->add_option("--n", tv_n)->required();
  tv->add_option("--N", tv_N)->required();
  tv->callback([&] {
    const auto r = ld::tv_haar_vs_uniform(tv_n, tv_N);
    ctx.emit(json{{"n", tv_n}, {"N", tv_N}, {"tv_exact", r.tv_exact}, {"bound", r.paper_bound}});
  });

  EnsembleOpts far_e;
  std::size_t far_circuits = 100;
  double far_threshold = 0.1;
  std::string far_csv, far_format = "json";
  auto* far = st->add_subcommand("far", "TV to uniform, Berger bound and k-norms per sampled circuit");
  far_e.add(far);
  far->add_option("--circuits", far_circuits)->capture_default_str();
  far->add_option("--threshold", far_threshold)->capture_default_str();
  far->add_option("--csv", far_csv, "also write the per-circuit table here");
  far->add_option("--format", far_format, "json summary | csv table on the primary output")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  add_seed(far);
  far->callback([&] {
    const auto r = ld::far_from_uniform_report(far_e.make(), far_circuits, seed(), far_threshold, ctx.policy());
    const std::string csv = ld::circuit_stats_csv(r.circuits);
    if (!far_csv.empty()) ctx.write(far_csv, csv);
    if (far_format == "csv") {
      ctx.emit(csv);
      return;
    }
    ctx.emit(json{{"circuits", r.circuits.size()},
                  {"threshold", r.threshold},
                  {"fraction_tv_ge_threshold", r.fraction_tv_ge_threshold},
                  {"mean_tv", r.mean_tv},
                  {"mean_tv_std_error", r.mean_tv_std_error}});
  });

  EnsembleOpts kn_e;
  int kn_k = 2;
  std::size_t kn_circuits = 100;
  double kn_a = 0.5, kn_eps = 0.0;
  auto* kn = st->add_subcommand("knorm", "tail frequency of the k-norm around k!/2^{(k-1)n}");
  kn_e.add(kn);
  kn->add_option("--k", kn_k)->capture_default_str();
  kn->add_option("--circuits", kn_circuits)->capture_default_str();
  kn->add_option("--a", kn_a, "relative deviation threshold")->capture_default_str();
  kn->add_option("--eps", kn_eps, "design error used in the Chebyshev bound")->capture_default_str();
  add_seed(kn);
  kn->callback([&] {
    const auto r = ld::knorm_concentration_probe(kn_e.make(), kn_k, kn_circuits, kn_a, seed(), kn_eps, ctx.policy());
    ctx.emit(json{{"k", kn_k},
                  {"a", kn_a},
                  {"tail_frequency", r.tail_frequency},
                  {"tail_std_error", r.tail_std_error},
                  {"reference", r.reference},
                  {"mean_knorm", r.mean_knorm},
                  {"haar_mean", r.haar_mean},
                  {"chebyshev_bound", r.chebyshev_bound},
                  {"circuits", r.circuits}});
  });

  // protocols
  auto* pr = app.add_subcommand("protocol", "protocol demonstrations");
  pr->require_subcommand(1);

  ld::TimeReversalConfig tr_cfg;
  std::string tr_partner, tr_mode = "both";
  auto* tr = pr->add_subcommand("timereversal", "detect long-range couplings by a time-reversal experiment");
  tr->add_option("--side", tr_cfg.side, "grid side")->capture_default_str();
  tr->add_option("--depth", tr_cfg.depth, "local layers")->capture_default_str();
  tr->add_option("--theta", tr_cfg.theta, "coupling angle in radians")->capture_default_str();
  tr->add_option("--perturbed", tr_cfg.perturbed, "flipped qubit")->capture_default_str();
  tr->add_option("--partner", tr_partner, "comma-separated partner of every qubit (default antipodal)");
  tr->add_option("--runs", tr_cfg.runs)->capture_default_str();
  tr->add_option("--long-range", tr_mode, "on | off | both")->check(CLI::IsMember({"on", "off", "both"}))->capture_default_str();
  add_seed(tr);
  tr->callback([&] {
    if (!tr_partner.empty()) tr_cfg.partner = parse_int_list(tr_partner, "--partner");
    json results = json::array();
    if (tr_mode != "off") results.push_back(time_reversal_json(ld::time_reversal_experiment(tr_cfg, true, seed(), ctx.policy())));
    if (tr_mode != "on") results.push_back(time_reversal_json(ld::time_reversal_experiment(tr_cfg, false, seed(), ctx.policy())));
    ctx.emit(json{{"side", tr_cfg.side}, {"depth", tr_cfg.depth}, {"theta", tr_cfg.theta},
                  {"perturbed", tr_cfg.perturbed}, {"results", results}});
  });

  EnsembleOpts pu_e;
  pu_e.kind = "pfc";
  std::string pu_source = "pure";
  std::size_t pu_pairs = 20, pu_trials = 100;
  double pu_margin = 0.0;
  auto* pu = pr->add_subcommand("purity", "decide pure vs maximally mixed from SWAP tests");
  pu_e.add(pu);
  pu->add_option("--source", pu_source, "pure | mixed")->check(CLI::IsMember({"pure", "mixed"}))->capture_default_str();
  pu->add_option("--pairs", pu_pairs, "SWAP tests per decision")->capture_default_str();
  pu->add_option("--trials", pu_trials, "independent decisions")->capture_default_str();
  pu->add_option("--margin", pu_margin)->capture_default_str();
  add_seed(pu);
  pu->callback([&] {
    ld::detail::require(pu_e.n >= 1, "--n is required");
    const ld::StateSource src = pu_source == "pure"
                                    ? ld::StateSource{ld::PureStateSource{pu_e.make(2)}}
                                    : ld::StateSource{ld::MaximallyMixedSource{pu_e.n}};
    const auto decisions = ld::parallel_map<ld::PurityDecision>(pu_trials, ctx.policy(), [&](std::size_t t) {
      ld::RngStream rng(seed(), t);
      return ld::purity_distinguisher(src, pu_pairs, rng, pu_margin);
    });
    std::size_t pure = 0;
    ld::MeanAccumulator stat;
    for (const auto& d : decisions) {
      pure += d.decided_pure ? 1 : 0;
      stat.add(d.statistic);
    }
    const std::size_t correct = pu_source == "pure" ? pure : pu_trials - pure;
    ctx.emit(json{{"source", pu_source},
                  {"pairs", pu_pairs},
                  {"trials", pu_trials},
                  {"decided_pure", pure},
                  {"accuracy", pu_trials ? static_cast<double>(correct) / static_cast<double>(pu_trials) : 0.0},
                  {"mean_statistic", stat.mean()},
                  {"statistic_std_error", stat.std_error()}});
  });

  const std::string started = utc_now();
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = merge_config(args);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    write_manifest(app, args, started);
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const ld::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << leaf_of(app)->help();
    return 2;
  } catch (const ld::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ld::exit_code_for(e);
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
