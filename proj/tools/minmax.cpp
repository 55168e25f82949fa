#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "minmax/bench.hpp"
#include "minmax/minmax.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kIo = 3, kNumeric = 4 };

// Applies "section.key=value" overrides; the key is everything after the
// last dot so section names may themselves contain dots.
void apply_overrides(minmax::Config& c, const std::vector<std::string>& sets) {
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    const auto dot = s.substr(0, eq).rfind('.');
    if (eq == std::string::npos || dot == std::string::npos) {
      throw minmax::ConfigError("--set expects section.key=value, got '" + s + "'");
    }
    c.set(s.substr(0, dot), s.substr(dot + 1, eq - dot - 1), s.substr(eq + 1));
  }
}

struct Common {
  std::string config;
  std::string output;
  std::vector<std::string> sets;
};

void add_common(CLI::App* sub, Common& c, bool config_required) {
  auto* opt = sub->add_option("config", c.config, "config file");
  if (config_required) opt->required();
  sub->add_option("-o,--output", c.output, "output CSV (default stdout)");
  sub->add_option("--set", c.sets, "override section.key=value")->take_all();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"min-max optimizer laboratory"};
  app.require_subcommand(1);

  Common run_opts, spectra_opts, flow_opts, lyap_opts, cost_opts;
  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  add_common(run, run_opts, true);

  auto* spectra = app.add_subcommand("spectra", "closed-form and numeric update-operator spectra");
  add_common(spectra, spectra_opts, false);
  std::string matrix, method;
  double eta = -1, beta = 0, alpha = 0;
  spectra->add_option("--matrix", matrix, "coupling matrix, rows separated by ';'");
  spectra->add_option("--eta", eta);
  spectra->add_option("--beta", beta);
  spectra->add_option("--alpha", alpha);
  spectra->add_option("--method", method, "lead or gda")->check(CLI::IsMember({"lead", "gda"}));

  auto* flow = app.add_subcommand("flow", "RK4 integration of the continuous dynamics");
  add_common(flow, flow_opts, false);
  auto* lyap = app.add_subcommand("lyapunov", "energy decay along a trajectory");
  add_common(lyap, lyap_opts, false);
  auto* cost = app.add_subcommand("cost", "oracle-call totals per method");
  add_common(cost, cost_opts, false);

  CLI11_PARSE(app, argc, argv);

  try {
    auto load = [](const Common& o, const char* kind) {
      minmax::Config c = o.config.empty() ? minmax::Config{} : minmax::Config::load(o.config);
      if (kind) c.set("experiment", "kind", kind);
      apply_overrides(c, o.sets);
      if (!o.output.empty()) c.set("experiment", "output", o.output);
      return c;
    };
    minmax::Config cfg;
    if (run->parsed()) {
      cfg = load(run_opts, nullptr);
    } else if (spectra->parsed()) {
      cfg = load(spectra_opts, "spectra");
      if (!matrix.empty()) cfg.set("game", "matrix", matrix);
      if (eta >= 0) cfg.set("params", "eta", minmax::format_double(eta));
      if (spectra->count("--beta")) cfg.set("params", "beta", minmax::format_double(beta));
      if (spectra->count("--alpha")) cfg.set("params", "alpha", minmax::format_double(alpha));
      if (!method.empty()) cfg.set("experiment", "method", method);
    } else if (flow->parsed()) {
      cfg = load(flow_opts, "flow");
    } else if (lyap->parsed()) {
      cfg = load(lyap_opts, "lyapunov_decay");
    } else {
      cfg = load(cost_opts, "cost_table");
    }
    minmax::bench::run_experiment(cfg, std::cout, std::cerr);
  } catch (const minmax::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const minmax::CapabilityError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const minmax::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const minmax::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumeric;
  }
  return kOk;
}
