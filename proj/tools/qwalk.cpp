// qwalk: batch front-end for walk simulation, optical compilation and
// localization ensembles.
//
//   qwalk run      --config c.json --out dist.csv
//   qwalk compile  --config c.json --out parts.json [--verify]
//   qwalk verify   --config c.json --out parts.json
//   qwalk localize --config c.json --seeds N --out ensemble.json
//
// Exit status: 0 ok, 1 I/O, 2 config, 3 lattice guard, 4 verification.

#include "qwalk/app.hpp"
#include "qwalk/errors.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

namespace {

enum ExitCode { kOk = 0, kIo = 1, kConfig = 2, kGuard = 3, kVerification = 4 };

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << content;
  if (!out) throw IoError("failed writing " + path);
}

void write_json(const std::string& path, const nlohmann::json& doc) {
  write_file(path, doc.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-time quantum walks and their J-plate optical realization"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  bool verify_flag = false;
  int seeds = 0;

  auto* run = app.add_subcommand("run", "evolve a walk and write t,x,P rows plus a summary");
  run->add_option("--config", config_path, "walk config (JSON)")->required();
  run->add_option("--out", out_path, "distribution CSV")->required();

  auto* compile = app.add_subcommand("compile", "write the optical parts list");
  compile->add_option("--config", config_path, "walk config (JSON)")->required();
  compile->add_option("--out", out_path, "parts list (JSON)")->required();
  compile->add_flag("--verify", verify_flag, "check the train against the walk operator");

  auto* verify = app.add_subcommand("verify", "compile with verification forced on");
  verify->add_option("--config", config_path, "walk config (JSON)")->required();
  verify->add_option("--out", out_path, "parts list (JSON)")->required();

  auto* localize = app.add_subcommand("localize", "random-coin ensemble vs ballistic baseline");
  localize->add_option("--config", config_path, "walk config (JSON)")->required();
  localize->add_option("--seeds", seeds, "ensemble size (overrides ensemble_size)")
      ->check(CLI::PositiveNumber);
  localize->add_option("--out", out_path, "ensemble summary (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    const qwalk::RunConfig config = qwalk::load_config(config_path);
    if (run->parsed()) {
      const auto result = qwalk::run(config);
      write_file(out_path, result.csv);
      write_json(config.summary_out.value_or(out_path + ".summary.json"), result.summary);
    } else if (compile->parsed() || verify->parsed()) {
      const bool check = verify->parsed() || verify_flag || config.verify;
      write_json(out_path, qwalk::compile(config, check));
    } else if (localize->parsed()) {
      write_json(out_path, qwalk::localize(config, seeds > 0 ? seeds : config.ensemble_size));
    }
  } catch (const qwalk::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const qwalk::GuardViolation& e) {
    std::cerr << "lattice guard: " << e.what() << " (minimal sufficient half_width: "
              << e.required_half_width() << ")\n";
    return kGuard;
  } catch (const qwalk::VerificationError& e) {
    std::cerr << "verification failed: " << e.what() << "\n";
    return kVerification;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
  return kOk;
}
