#include "pimsim/driver.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace pimsim {

namespace fs = std::filesystem;

std::vector<std::uint8_t> gmem_image(std::span<const std::int8_t> input) {
  std::vector<std::uint8_t> out(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) out[i] = static_cast<std::uint8_t>(input[i]);
  return out;
}

std::vector<std::int8_t> read_output(const SimResult& sim, const Network& net) {
  const auto addr = static_cast<std::size_t>(output_gaddr(net));
  const auto n = static_cast<std::size_t>(net.layers[static_cast<std::size_t>(net.terminal())].out_shape.numel());
  if (addr + n > sim.gmem.size()) throw Error("output range lies outside global memory");
  std::vector<std::int8_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<std::int8_t>(sim.gmem[addr + i]);
  return out;
}

NetRun run_network(const Network& net, const ArchConfig& cfg, Strategy strategy, std::span<const std::int8_t> input,
                   const SimOptions& options) {
  NetRun r;
  r.input = input.empty() ? default_input(net) : std::vector<std::int8_t>(input.begin(), input.end());
  r.compiled = compile(net, cfg, strategy);
  auto gmem = gmem_image(r.input);
  r.sim = simulate(r.compiled.program, cfg, gmem, options);
  r.report = finalize_report(r.sim, cfg, static_cast<int>(net.layers.size()));
  r.output = read_output(r.sim, net);
  return r;
}

SweepSpec parse_sweep_axis(const std::string& text) {
  auto eq = text.find('=');
  if (eq == std::string::npos) throw Error("sweep axis must look like rob=1,2,4 or strategy=both");
  const std::string key = text.substr(0, eq);
  std::vector<std::string> values;
  std::stringstream ss(text.substr(eq + 1));
  for (std::string v; std::getline(ss, v, ',');)
    if (!v.empty()) values.push_back(v);
  if (values.empty()) throw Error("sweep axis '" + key + "' has no values");
  SweepSpec spec;
  if (key == "rob") {
    spec.axis = SweepAxis::RobSize;
    for (const auto& v : values) {
      std::size_t used = 0;
      int n = 0;
      try {
        n = std::stoi(v, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != v.size() || n < 1) throw Error("invalid rob size '" + v + "'");
      spec.rob_sizes.push_back(n);
    }
  } else if (key == "strategy") {
    spec.axis = SweepAxis::Strategy;
    for (const auto& v : values) {
      if (v == "both") {
        spec.strategies.push_back(Strategy::UtilizationFirst);
        spec.strategies.push_back(Strategy::PerformanceFirst);
      } else if (auto s = parse_strategy(v)) {
        spec.strategies.push_back(*s);
      } else {
        throw Error("unknown strategy '" + v + "'");
      }
    }
  } else {
    throw Error("unknown sweep axis '" + key + "' (expected rob or strategy)");
  }
  return spec;
}

std::vector<SweepPoint> run_sweep(const Network& net, const ArchConfig& cfg, const SweepSpec& spec, int jobs) {
  std::vector<SweepPoint> points;
  std::vector<CompileResult> programs;  // one per point for strategy sweeps, shared otherwise
  if (spec.axis == SweepAxis::RobSize) {
    programs.push_back(compile(net, cfg, spec.base_strategy));
    for (int rob : spec.rob_sizes)
      points.push_back({"rob=" + std::to_string(rob), spec.base_strategy, rob, {}});
  } else {
    for (Strategy s : spec.strategies) {
      programs.push_back(compile(net, cfg, s));
      points.push_back({"strategy=" + std::string(strategy_name(s)), s, cfg.rob_size, {}});
    }
  }
  const auto input = gmem_image(default_input(net));
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        ArchConfig c = cfg;
        c.rob_size = points[i].rob_size;
        const Program& p = programs[spec.axis == SweepAxis::RobSize ? 0 : i].program;
        auto sim = simulate(p, c, input);
        points[i].report = finalize_report(sim, c, static_cast<int>(net.layers.size()));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(points.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const DeadlockError&) {
      throw;
    } catch (const std::exception& e) {
      throw Error("sweep point " + points[i].label + ": " + e.what());
    }
  }
  return points;
}

std::string sweep_summary_csv(const std::vector<SweepPoint>& points) {
  std::ostringstream os;
  os.precision(17);
  os << kSweepHeader << "\n";
  for (const auto& p : points)
    os << p.label << "," << strategy_name(p.strategy) << "," << p.rob_size << "," << p.report.total_cycles << ","
       << p.report.latency_s << "," << p.report.energy.total_pj << "," << p.report.avg_power_mw << "\n";
  return os.str();
}

std::string sweep_detail_csv(const std::vector<SweepPoint>& points) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& p : points) out += emit_report_csv(p.report, p.label, false);
  return out;
}

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, std::string_view data) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << data;
  if (!out) throw Error("write failed: " + p.string());
}

Network load_net(const std::string& path) {
  Network net = load_network(path);
  if (const char* seed = std::getenv("PIMSIM_SEED")) {
    std::string s(seed);
    std::size_t used = 0;
    std::uint64_t base = 0;
    try {
      base = std::stoull(s, &used, 0);
    } catch (const std::exception&) {
      used = 0;
    }
    if (s.empty() || used != s.size()) throw Error("PIMSIM_SEED must be an unsigned integer, got '" + s + "'");
    override_seeds(net, base);
  }
  return net;
}

ArchConfig load_cfg(const std::string& path, int rob_size, int dispatch_width) {
  ArchConfig cfg = load_config(path);
  if (rob_size > 0) cfg.rob_size = rob_size;
  if (dispatch_width > 0) cfg.dispatch_width = dispatch_width;
  if (auto v = validate_config(cfg); !v.empty())
    throw ConfigError(ConfigError::Kind::Semantic, v.front().where, v.front().message);
  return cfg;
}

std::vector<std::int8_t> load_input(const std::string& path, const Network* net) {
  std::string raw = read_file(path);
  if (net && static_cast<std::int64_t>(raw.size()) != net->input_shape.numel())
    throw Error("input file has " + std::to_string(raw.size()) + " bytes, network expects " +
                std::to_string(net->input_shape.numel()));
  return std::vector<std::int8_t>(raw.begin(), raw.end());
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct Options {
  std::string net, cfg, out, strategy = "performance", input, trace, axis, net_for_asm;
  std::string dump = "pimsim_deadlock.txt";
  int rob_size = 0, dispatch_width = 0, jobs = 0;
  bool csv = false, check = false;
};

int cmd_compile(const Options& o, std::ostream& out) {
  Network net = load_net(o.net);
  ArchConfig cfg = load_cfg(o.cfg, 0, 0);
  CompileResult r = compile(net, cfg, *parse_strategy(o.strategy));
  fs::create_directories(o.out);
  write_file(fs::path(o.out) / "program.asm", emit_asm(r.program, file_weight_writer(o.out)));
  write_file(fs::path(o.out) / "placement.json", placement_report(net, r));
  out << "wrote " << (fs::path(o.out) / "program.asm").string() << " and "
      << (fs::path(o.out) / "placement.json").string() << "\n";
  return 0;
}

int cmd_run(const Options& o, std::ostream& out, std::ostream& err) {
  ArchConfig cfg = load_cfg(o.cfg, o.rob_size, o.dispatch_width);
  std::optional<Network> net;
  Program program;
  if (ends_with(o.net, ".asm")) {
    if (!o.net_for_asm.empty()) net = load_net(o.net_for_asm);
    program = parse_asm(read_file(o.net), file_weight_reader(fs::path(o.net).parent_path().string()));
    for (const auto& v : validate_program(program, cfg)) {
      if (v.kind == Violation::Kind::Structural) throw Error("invalid program: " + v.str());
      err << "warning: " << v.str() << "\n";
    }
  } else {
    net = load_net(o.net);
    program = compile(*net, cfg, *parse_strategy(o.strategy)).program;
  }
  if (o.check && !net) throw Error("--check on an assembly program needs --net");

  std::vector<std::int8_t> input;
  if (!o.input.empty()) input = load_input(o.input, net ? &*net : nullptr);
  else if (net) input = default_input(*net);

  SimResult sim;
  try {
    sim = simulate(program, cfg, gmem_image(input));
  } catch (const DeadlockError& d) {
    write_file(o.dump, d.dump());
    err << d.what() << "\nstate dump: " << o.dump << "\n";
    return 3;
  }

  int layers = 0;
  if (net) layers = static_cast<int>(net->layers.size());
  Report report = finalize_report(sim, cfg, layers);
  if (!o.trace.empty()) write_file(o.trace, trace_jsonl(sim));
  out << (o.csv ? emit_report_csv(report, "run") : emit_report_json(report));

  if (o.check) {
    auto expected = reference_inference(*net, input);
    auto actual = read_output(sim, *net);
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (expected[i] != actual[i]) {
        err << "check failed: first mismatch at output index " << i << ": expected " << int{expected[i]} << ", got "
            << int{actual[i]} << "\n";
        return 1;
      }
    }
    err << "check passed: " << expected.size() << " output values match the reference\n";
  }
  return 0;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  Network net = load_net(o.net);
  ArchConfig cfg = load_cfg(o.cfg, 0, 0);
  SweepSpec spec = parse_sweep_axis(o.axis);
  spec.base_strategy = *parse_strategy(o.strategy);
  int jobs = o.jobs > 0 ? o.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  auto points = run_sweep(net, cfg, spec, jobs);
  write_file(o.out, sweep_summary_csv(points));
  fs::path detail = fs::path(o.out);
  detail.replace_extension(".detail.csv");
  write_file(detail, sweep_detail_csv(points));
  out << sweep_summary_csv(points);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"pimsim: compiler and cycle-accurate simulator for a crossbar PIM accelerator"};
  app.require_subcommand(1);
  Options o;
  const auto strategies = CLI::IsMember({"utilization", "performance"});

  auto* compile_cmd = app.add_subcommand("compile", "compile a network to assembly");
  compile_cmd->add_option("network", o.net, "network JSON")->required();
  compile_cmd->add_option("--config", o.cfg, "architecture config JSON")->required();
  compile_cmd->add_option("--strategy", o.strategy, "mapping strategy")->check(strategies);
  compile_cmd->add_option("--out", o.out, "output directory")->required();

  auto* run_cmd = app.add_subcommand("run", "simulate a network or an assembly program");
  run_cmd->add_option("target", o.net, "network JSON or .asm program")->required();
  run_cmd->add_option("--config", o.cfg, "architecture config JSON")->required();
  run_cmd->add_option("--strategy", o.strategy, "mapping strategy")->check(strategies);
  run_cmd->add_option("--input", o.input, "raw int8 input tensor (CHW)");
  run_cmd->add_option("--rob-size", o.rob_size, "override core.rob_size")->check(CLI::PositiveNumber);
  run_cmd->add_option("--dispatch-width", o.dispatch_width, "override core.dispatch_width")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--net", o.net_for_asm, "network describing an .asm program's input/output");
  run_cmd->add_option("--trace", o.trace, "write the JSON-lines trace here");
  run_cmd->add_option("--dump", o.dump, "deadlock state dump path");
  run_cmd->add_flag("--check", o.check, "compare the output with the reference model");
  run_cmd->add_flag("--csv", o.csv, "print the report as CSV");

  auto* sweep_cmd = app.add_subcommand("sweep", "run a parameter sweep");
  sweep_cmd->add_option("network", o.net, "network JSON")->required();
  sweep_cmd->add_option("--config", o.cfg, "architecture config JSON")->required();
  sweep_cmd->add_option("--axis", o.axis, "rob=1,2,4,8,12,16 or strategy=both")
      ->required()
      ->check(CLI::Validator(
          [](std::string& v) -> std::string {
            try {
              parse_sweep_axis(v);
            } catch (const Error& e) {
              return e.what();
            }
            return {};
          },
          "AXIS"));
  sweep_cmd->add_option("--strategy", o.strategy, "mapping strategy for rob sweeps")->check(strategies);
  sweep_cmd->add_option("--out", o.out, "summary CSV path")->required();
  sweep_cmd->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "usage error: " << e.what() << "\n" << "run with --help for usage\n";
    return 2;
  }

  try {
    if (*compile_cmd) return cmd_compile(o, out);
    if (*run_cmd) return cmd_run(o, out, err);
    if (*sweep_cmd) return cmd_sweep(o, out);
  } catch (const DeadlockError& d) {
    write_file(o.dump, d.dump());
    err << d.what() << "\nstate dump: " << o.dump << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace pimsim
