#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "streamemu/streamemu.h"

namespace {

struct Option {
  const char* key;
  const char* help;
};

const Option kOptions[] = {
    {"fixture", "greedy-max, greedy-max-discrete, thm3-good-pool, thm6-chain, ex1-hypotheses"},
    {"emulator", "pool, wait, nowait, gen, utility-stream, first-q"},
    {"m", "pool size"},
    {"q", "selection budget"},
    {"trials", "number of trials"},
    {"seed", "root seed"},
    {"max-iter", "per-trial iteration cap"},
    {"threshold", "TV threshold for equiv-test"},
    {"threads", "worker threads (0 = all cores)"},
    {"t", "response law index for thm6-chain (0 = all zero)"},
    {"target", "target hypothesis for ex1-hypotheses"},
    {"T", "window width for ex1-hypotheses (0 = automatic)"},
    {"n-min", "secretary-table first horizon"},
    {"n-max", "secretary-table last horizon"},
    {"n-step", "secretary-table horizon step"},
    {"n-values", "secretary-table explicit comma list of horizons"},
    {"thm3-m", "lowerbound-demo pool sizes for the good-pool family"},
    {"thm6-m", "lowerbound-demo pool sizes for the chain family"},
};

int reportError(const char* what) {
  std::fprintf(stderr, "streamemu: %s: %s\n", what, se_last_error());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pool-to-stream emulation experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", se_version());

  std::string configPath;
  std::string outPath;
  std::map<std::string, std::string> overrides;
  app.add_option("--config", configPath, "key=value config file")->check(CLI::ExistingFile);
  app.add_option("--out", outPath, "write the CSV report here instead of stdout");
  for (const Option& o : kOptions) {
    app.add_option_function<std::string>(
        std::string("--") + o.key, [&overrides, key = o.key](const std::string& v) { overrides[key] = v; },
        o.help);
  }
  const std::pair<const char*, const char*> commands[] = {
      {"equiv-test", "exact vs empirical output distribution with TV distance"},
      {"iter-bench", "mean iteration and selection counts against their bounds"},
      {"secretary-table", "optimal secretary thresholds and success probabilities"},
      {"lowerbound-demo", "iteration growth on the good-pool and chain fixtures"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  se_config* config = se_config_create();
  if (!config) return reportError("config");
  if (!configPath.empty() && se_config_load_file(config, configPath.c_str()) != SE_OK) {
    se_config_free(config);
    return reportError("config");
  }
  for (const auto& [key, value] : overrides) {
    if (se_config_set(config, key.c_str(), value.c_str()) != SE_OK) {
      se_config_free(config);
      return reportError("option");
    }
  }

  se_report* report = nullptr;
  const se_status status = se_run(command.c_str(), config, &report);
  se_config_free(config);
  if (status != SE_OK) {
    std::fprintf(stderr, "streamemu: %s failed (%s): %s\n", command.c_str(),
                 se_status_name(status), se_last_error());
    return 1;
  }

  if (outPath.empty()) {
    std::fwrite(se_report_text(report), 1, se_report_length(report), stdout);
  } else {
    std::ofstream out(outPath, std::ios::binary);
    out.write(se_report_text(report), static_cast<std::streamsize>(se_report_length(report)));
    if (!out) {
      se_report_free(report);
      std::fprintf(stderr, "streamemu: cannot write '%s'\n", outPath.c_str());
      return 1;
    }
  }
  const int exitCode = se_report_failed(report) ? 2 : 0;
  se_report_free(report);
  return exitCode;
}
