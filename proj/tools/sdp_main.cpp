#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "sdp/cli.hpp"

namespace {

bool split_assignment(const std::string& s, std::string& name, double& value) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) return false;
  name = s.substr(0, eq);
  try {
    std::size_t used = 0;
    value = std::stod(s.substr(eq + 1), &used);
    return used == s.size() - eq - 1;
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certify selfdual split-signature metrics built from projective pairs"};
  app.set_version_flag("--version", std::string(sdp::kVersion));

  std::string command, scene, out;
  std::vector<std::string> tols, params;
  int samples = 0, threads = 1, order = 3;
  std::uint64_t seed = 0;
  bool no_time = false;

  app.add_option("command", command, "Pipeline to run")->required()->check(CLI::IsMember(sdp::command_names()));
  app.add_option("scene", scene, "Scene file (JSON)")->required();
  app.add_option("--out", out, "Write the report here instead of stdout");
  auto* samples_opt = app.add_option("--samples", samples, "Sample points per check")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "Sampling seed");
  app.add_option("--tol", tols, "Tolerance override name=value")->take_all();
  app.add_option("--order", order, "Jet order")->check(CLI::IsMember({2, 3}));
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--param", params, "Scene parameter override name=value")->take_all();
  app.add_flag("--no-wall-time", no_time, "Omit the wall-time field");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : sdp::kSceneError;
  }

  sdp::RunOptions opts;
  if (*samples_opt) opts.samples = samples;
  if (*seed_opt) opts.seed = seed;
  opts.order = order;
  opts.threads = threads;
  opts.wall_time = !no_time;
  for (const auto& [list, target] : {std::pair{&tols, &opts.tolerances}, std::pair{&params, &opts.params}}) {
    for (const auto& s : *list) {
      std::string name;
      double value = 0.0;
      if (!split_assignment(s, name, value)) {
        std::cerr << "expected name=value, got '" << s << "'\n";
        return sdp::kSceneError;
      }
      (*target)[name] = value;
    }
  }

  const sdp::RunResult r = sdp::run(command, scene, opts);
  const std::string text = sdp::render(r.report);
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!(f << text)) {
      std::cerr << "cannot write " << out << "\n";
      return sdp::kSceneError;
    }
  }
  if (r.report.contains("error")) std::cerr << r.report["error"]["message"].get<std::string>() << "\n";
  return r.exit_code;
}
