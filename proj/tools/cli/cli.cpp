#include "cli/cli.hpp"

#include <fractalnet/boundary.hpp>
#include <fractalnet/error.hpp>
#include <fractalnet/export.hpp>
#include <fractalnet/spec_io.hpp>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <ostream>
#include <set>

namespace fractalnet::cli {

namespace {

const std::vector<std::string> kCommands = {"build", "energy", "kernel", "walk", "crossings", "boundary", "export"};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

bool is_stochastic(const std::string& command) {
  return command == "walk" || command == "crossings" || command == "boundary";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSingularSystem:
    case ErrorCode::kJunctionInconsistency:
    case ErrorCode::kNotSeparable:
    case ErrorCode::kDivisionByZero:
      return kCheckFailure;
    default:
      return kUsageError;
  }
}

unsigned effective_threads(unsigned requested) {
  unsigned cap = default_thread_count();
  return requested == 0 ? cap : std::min(requested, cap);
}

struct Context {
  const RunConfig& config;
  IfsSpec spec;
  std::shared_ptr<const Attractor> attractor;
  Network net;
  ResultManifest manifest;

  void write(const std::string& name, const std::string& text) {
    write_text(config.out / name, text);
    manifest.artifacts.push_back({name, sha256_hex(text), text.size()});
  }

  void check(std::string name, bool pass, std::string detail = {}) {
    manifest.checks.push_back({std::move(name), pass, std::move(detail)});
  }

  VertexIndex vertex(const std::string& text) const {
    if (text == "o") return net.root();
    try {
      if (!text.empty() && text[0] == 'q') {
        std::size_t i = std::stoul(text.substr(1));
        if (i >= spec.symbol_count()) throw UsageError(fmt::format("no generator {}", text));
        return net.index_of(attractor->rational_point(Word{}, i), 0);
      }
      std::size_t pos = 0;
      unsigned long v = std::stoul(text, &pos);
      if (pos == text.size() && v < net.vertex_count()) return static_cast<VertexIndex>(v);
    } catch (const std::logic_error&) {
    }
    throw UsageError(fmt::format("bad vertex '{}': expected an id below {}, 'o' or 'qI'", text, net.vertex_count()));
  }

  RationalVector u0() const {
    RationalVector out(spec.symbol_count(), Rational(0));
    if (config.u0.empty()) {
      out[0] = 1;
      return out;
    }
    std::vector<std::string> parts;
    std::string cur;
    for (char c : config.u0) {
      if (c == ',') {
        parts.push_back(cur);
        cur.clear();
      } else if (c != ' ') {
        cur += c;
      }
    }
    parts.push_back(cur);
    if (parts.size() != out.size()) {
      throw UsageError(fmt::format("--u0 needs {} values, got {}", out.size(), parts.size()));
    }
    for (std::size_t i = 0; i < parts.size(); ++i) out[i] = parse_rational(parts[i]);
    return out;
  }

  WalkConfig walk_config() const {
    WalkConfig wc;
    wc.start = vertex(config.start);
    wc.walks = config.walks;
    wc.step_cap = config.step_cap;
    wc.seed = *config.seed;
    wc.threads = effective_threads(config.threads);
    wc.keep_paths = config.paths;
    return wc;
  }

  std::string seeded(const std::string& stem, const std::string& ext) const {
    return fmt::format("{}_seed{}.{}", stem, *config.seed, ext);
  }
};

void cmd_build(Context& ctx) {
  ctx.write("graph.json", dump_json(graph_json(ctx.net)));
  ctx.write("graph.dot", graph_dot(ctx.net));
  ctx.write("counts.json", dump_json(counts_json(ctx.net)));
  ctx.check("connected", is_connected(ctx.net));
}

void cmd_energy(Context& ctx) {
  ExtensionMatrices m = extension_matrices(ctx.spec);
  RationalVector u0 = ctx.u0();
  HGFunction u = harmonic_generate(ctx.net, m, u0);
  ExactEnergyBreakdown b = energy_by_levels(u.values);
  const Rational r_max = ctx.spec.max_ratio();
  const Rational bound = b.horizontal[0] / (Rational(1) - r_max);

  bool ratio_ok = true, vertical_ok = true;
  auto levels = nlohmann::json::array();
  for (std::size_t k = 0; k < b.horizontal.size(); ++k) {
    nlohmann::json row = {{"level", k},
                          {"horizontal", format_rational(b.horizontal[k])},
                          {"vertical", format_rational(b.vertical[k])}};
    if (k > 0) {
      ratio_ok = ratio_ok && b.horizontal[k] <= r_max * b.horizontal[k - 1];
      vertical_ok = vertical_ok && b.vertical[k] <= b.horizontal[k];
      if (b.horizontal[k - 1] != 0) row["ratio"] = format_rational(Rational(b.horizontal[k] / b.horizontal[k - 1]));
    }
    levels.push_back(std::move(row));
  }
  ctx.check("level_ratio", ratio_ok, fmt::format("E_k <= {} E_(k-1) for k = 1..{}", format_rational(r_max),
                                                 b.horizontal.size() - 1));
  ctx.check("vertical_le_horizontal", vertical_ok, "F_k <= E_k");
  ctx.check("total_bound", b.total <= bound,
            fmt::format("total {} vs bound {}", format_double(to_double(b.total)), format_double(to_double(bound))));

  nlohmann::json u0_json = nlohmann::json::array();
  for (const Rational& v : u0) u0_json.push_back(format_rational(v));
  nlohmann::json report = {{"M", ctx.net.truncation()},
                           {"u0", u0_json},
                           {"r_max", format_rational(r_max)},
                           {"bound", format_rational(bound)},
                           {"total", format_rational(b.total)},
                           {"total_float", to_double(b.total)},
                           {"levels", std::move(levels)}};
  ctx.write("energy.csv", energy_csv(b, true));
  ctx.write("energy_report.json", dump_json(report));
}

void cmd_kernel(Context& ctx) {
  BoundaryMode mode;
  if (ctx.config.mode == "free") {
    mode = BoundaryMode::kFree;
  } else if (ctx.config.mode == "wired") {
    mode = BoundaryMode::kWired;
  } else {
    throw UsageError(fmt::format("--mode must be free or wired, got '{}'", ctx.config.mode));
  }
  SolverOptions opts;
  double tol = ctx.config.tol.value_or(1e-10);
  EnergyKernelSolver solver(ctx.net, mode, opts);
  VertexIndex x = ctx.vertex(ctx.config.center);
  VertexIndex y = ctx.vertex(ctx.config.other);
  KernelElement k = solver.kernel(x);
  double r = effective_resistance(solver, x, y);
  nlohmann::json j = kernel_json(k, r);
  j["other"] = y;
  ctx.write("kernel.json", dump_json(j));
  ctx.write("kernel_values.csv", function_csv(k.values));
  ctx.check("residual", k.residual <= tol, fmt::format("{} <= {}", format_double(k.residual), format_double(tol)));
}

void cmd_walk(Context& ctx) {
  TransitionKernel kernel(ctx.net);
  WalkConfig wc = ctx.walk_config();
  WalkEnsemble ens = sample_ensemble(kernel, wc);
  ctx.write(ctx.seeded("ensemble", "json"), dump_json(ensemble_json(ens)));
  if (wc.keep_paths) {
    std::optional<VertexFunction> f;
    if (ctx.spec.extension_matrices) f = harmonic_generate(ctx.net, extension_matrices(ctx.spec), ctx.u0()).approx();
    ctx.write(ctx.seeded("walks", "csv"), walk_csv(ctx.net, ens, f ? &*f : nullptr));
  }
  ctx.check("absorbed", ens.cap_exhausted == 0, fmt::format("{} walks hit the step cap", ens.cap_exhausted));
}

void cmd_crossings(Context& ctx) {
  TransitionKernel kernel(ctx.net);
  WalkConfig wc = ctx.walk_config();
  VertexFunction f = harmonic_generate(ctx.net, extension_matrices(ctx.spec), ctx.u0()).approx();
  CrossingsReport r = crossings_bound_check(kernel, f, ctx.config.a, ctx.config.b, wc);
  nlohmann::json j = crossings_json(r);
  j["seed"] = wc.seed;
  j["start"] = wc.start;
  j["M"] = ctx.net.truncation();
  ctx.write(ctx.seeded("crossings", "json"), dump_json(j));
  ctx.check("crossings_bound", r.pass,
            fmt::format("mean {} + 3 ci {} vs bound {}", format_double(r.crossings.mean), format_double(r.crossings.ci95),
                        format_double(r.bound)));
}

void cmd_boundary(Context& ctx) {
  ExtensionMatrices m = extension_matrices(ctx.spec);
  const std::size_t depth = ctx.config.depth;
  if (depth > ctx.net.truncation()) {
    throw Error(ErrorCode::kDepthExceedsTruncation, fmt::format("depth {} exceeds M = {}", depth, ctx.net.truncation()));
  }
  TransitionKernel kernel(ctx.net);
  WalkConfig wc = ctx.walk_config();
  wc.keep_paths = false;
  WalkEnsemble ens = sample_ensemble(kernel, wc);

  std::string csv = "walk_id,vertex_id,address\n";
  std::set<Word> distinct;
  for (std::size_t i = 0; i < ens.samples.size(); ++i) {
    const PathSample& p = ens.samples[i];
    if (!p.absorbed) continue;
    Word w = address_of_path(ctx.net, p, depth).prefix;
    csv += fmt::format("{},{},{}\n", i, p.end, w.to_string());
    distinct.insert(w);
  }
  std::vector<Word> words(distinct.begin(), distinct.end());
  CorrespondenceOptions opts;
  opts.family_level = std::min(ctx.config.family_level, depth);
  opts.continuity_depth = depth;
  opts.seed = wc.seed;
  CorrespondenceReport r = verify_correspondence(*ctx.attractor, m, words, depth, opts);
  nlohmann::json j = to_json(r);
  j["seed"] = wc.seed;
  j["walks"] = wc.walks;
  j["distinct_addresses"] = words.size();
  j["family_level"] = opts.family_level;
  ctx.write(ctx.seeded("addresses", "csv"), csv);
  ctx.write(ctx.seeded("correspondence", "json"), dump_json(j));
  ctx.check("round_trip", r.round_trip_failed == 0, fmt::format("{} of {} failed", r.round_trip_failed, r.round_trip_tested));
  ctx.check("separation", r.separated + r.same_point == r.pairs,
            fmt::format("{} separated, {} identified, {} pairs", r.separated, r.same_point, r.pairs));
  ctx.check("continuity", r.max_gap <= r.continuity_bound,
            fmt::format("gap {} <= {}", format_double(r.max_gap), format_double(r.continuity_bound)));
}

void cmd_export(Context& ctx) {
  HGFunction u = harmonic_generate(ctx.net, extension_matrices(ctx.spec), ctx.u0());
  ctx.write("function.csv", function_csv(u.values));
  ctx.write("graph.json", dump_json(graph_json(ctx.net)));
}

}  // namespace

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j = {{"command", c.command},
                      {"spec", c.spec.string()},
                      {"walks", c.walks},
                      {"step_cap", c.step_cap},
                      {"u0", c.u0},
                      {"center", c.center},
                      {"other", c.other},
                      {"start", c.start},
                      {"mode", c.mode},
                      {"a", c.a},
                      {"b", c.b},
                      {"depth", c.depth},
                      {"family_level", c.family_level},
                      {"paths", c.paths}};
  j["level"] = c.level ? nlohmann::json(*c.level) : nlohmann::json();
  j["seed"] = c.seed ? nlohmann::json(*c.seed) : nlohmann::json();
  j["tol"] = c.tol ? nlohmann::json(*c.tol) : nlohmann::json();
  return j;
}

bool ResultManifest::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

namespace {

nlohmann::json hashed_part(const ResultManifest& m) {
  auto artifacts = nlohmann::json::array();
  for (const Artifact& a : m.artifacts) artifacts.push_back({{"path", a.path}, {"sha256", a.sha256}, {"bytes", a.bytes}});
  auto checks = nlohmann::json::array();
  for (const Check& c : m.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  return {{"command", m.command},
          {"config", m.config},
          {"artifacts", std::move(artifacts)},
          {"checks", std::move(checks)},
          {"library_version", m.library_version}};
}

}  // namespace

std::string ResultManifest::hash() const { return sha256_hex(dump_json(hashed_part(*this))); }

nlohmann::json ResultManifest::to_json() const {
  nlohmann::json j = hashed_part(*this);
  j["manifest_sha256"] = hash();
  j["pass"] = all_pass();
  j["output_directory"] = output_directory;
  j["timestamp"] = timestamp;
  j["wall_clock_seconds"] = wall_clock_seconds;
  return j;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::string out;
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
  return out;
}

ResultManifest execute(const RunConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  if (std::find(kCommands.begin(), kCommands.end(), config.command) == kCommands.end()) {
    throw UsageError(fmt::format("unknown command '{}'", config.command));
  }
  if (config.spec.empty()) throw UsageError("--spec is required");
  if (!config.level) throw UsageError("--level is required");
  if (is_stochastic(config.command) && !config.seed) throw UsageError("--seed is required for " + config.command);
  if (config.walks == 0 || config.step_cap == 0) throw UsageError("--walks and --step-cap must be positive");
  if (config.tol && !(*config.tol > 0)) throw UsageError("--tol must be positive");
  if (!std::filesystem::exists(config.spec)) throw UsageError("spec file not found: " + config.spec.string());

  IfsSpec spec = load_spec(config.spec);
  validate_spec(spec, std::min<std::size_t>(*config.level, 3));
  auto attractor = std::make_shared<const Attractor>(spec, *config.level);
  Context ctx{config, spec, attractor, Network::build(attractor, *config.level), {}};
  ctx.manifest.command = config.command;
  ctx.manifest.config = to_json(config);
  ctx.manifest.library_version = FRACTALNET_VERSION;
  ctx.manifest.output_directory = config.out.string();

  if (config.command == "build") cmd_build(ctx);
  if (config.command == "energy") cmd_energy(ctx);
  if (config.command == "kernel") cmd_kernel(ctx);
  if (config.command == "walk") cmd_walk(ctx);
  if (config.command == "crossings") cmd_crossings(ctx);
  if (config.command == "boundary") cmd_boundary(ctx);
  if (config.command == "export") cmd_export(ctx);

  ctx.manifest.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ctx.manifest.timestamp = fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::now()));
  write_text(config.out / "manifest.json", dump_json(ctx.manifest.to_json()));
  return ctx.manifest;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig config;
  CLI::App app{"Harmonic analysis and random walks on fractal networks", "fractalnet"};
  app.set_config("--config", "", "TOML or INI file with option defaults (flags override it)");
  app.require_subcommand(1, 1);
  app.fallthrough();
  for (const auto& name : kCommands) app.add_subcommand(name)->fallthrough();

  std::string spec, out_dir;
  app.add_option("--spec", spec, "IFS spec JSON file");
  app.add_option("--level", config.level, "truncation level M");
  app.add_option("--seed", config.seed, "64-bit seed (walk, crossings, boundary)");
  app.add_option("--walks", config.walks, "number of walks")->capture_default_str();
  app.add_option("--step-cap", config.step_cap, "steps before a walk is abandoned")->capture_default_str();
  app.add_option("--tol", config.tol, "solver residual tolerance for kernel");
  app.add_option("--out", out_dir, "output directory")->default_str(config.out.string());
  app.add_option("--threads", config.threads, "worker threads, capped by FRACTALNET_THREADS");
  app.add_option("--u0", config.u0, "initial values on V_0, e.g. 1,0,0");
  app.add_option("--center", config.center, "kernel center")->capture_default_str();
  app.add_option("--other", config.other, "second resistance endpoint")->capture_default_str();
  app.add_option("--start", config.start, "walk start vertex")->capture_default_str();
  app.add_option("--mode", config.mode, "free or wired")->capture_default_str();
  app.add_option("--a", config.a, "crossing interval lower end")->capture_default_str();
  app.add_option("--b", config.b, "crossing interval upper end")->capture_default_str();
  app.add_option("--depth", config.depth, "boundary address depth")->capture_default_str();
  app.add_option("--family-level", config.family_level, "test family level")->capture_default_str();
  app.add_flag("--paths", config.paths, "record walk paths (walk)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kSuccess;
    }
    err << "fractalnet: " << e.what() << "\n";
    return kUsageError;
  }
  config.command = app.get_subcommands().front()->get_name();
  config.spec = spec;
  if (!out_dir.empty()) config.out = out_dir;

  try {
    ResultManifest m = execute(config);
    for (const Check& c : m.checks) {
      out << fmt::format("check {}: {}{}\n", c.name, c.pass ? "PASS" : "FAIL", c.detail.empty() ? "" : " (" + c.detail + ")");
    }
    out << fmt::format("{} artifacts written to {}\n", m.artifacts.size() + 1, config.out.string());
    return m.all_pass() ? kSuccess : kCheckFailure;
  } catch (const UsageError& e) {
    err << "fractalnet: " << e.what() << "\n";
    return kUsageError;
  } catch (const Error& e) {
    err << "fractalnet: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "fractalnet: " << e.what() << "\n";
    return kUsageError;
  }
}

}  // namespace fractalnet::cli
