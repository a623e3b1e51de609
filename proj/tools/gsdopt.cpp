#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "app.hpp"

namespace {

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace gsdopt::app;
  Options o;
  CLI::App cli{"Group sequential designs with optimally timed interim analyses"};
  cli.require_subcommand(1);

  auto common = [&](CLI::App* c) {
    c->add_option("--out", o.out_dir, std::string("Output directory (default $") + kOutDirEnv + " or gsdopt-output)");
    c->add_option("--format", o.formats, "Comma-separated formats: csv,json,table")->capture_default_str();
    c->add_option("--precision", o.precision, "Decimal places for every printed value");
  };
  auto overrides = [&](CLI::App* c) {
    c->add_option("--beta", o.beta, "Override the type II error rate");
    c->add_option("--family", o.family, "Override the efficacy boundary: haybittle-peto, pocock, obrien-fleming");
    c->add_option("--futility", o.futility, "Futility bounds: none, binding, nonbinding");
    c->add_option("--futility-family", o.futility_family, "Beta-spending family for futility bounds");
  };

  auto* design = cli.add_subcommand("design", "Operating characteristics of a design document");
  design->add_option("--input", o.input, "Design document (JSON)")->required();
  common(design);
  overrides(design);

  auto* optimize = cli.add_subcommand("optimize", "Interim timing minimizing the expected sample size under H1");
  optimize->add_option("--input", o.input, "Design document (JSON)")->required();
  common(optimize);
  overrides(optimize);

  std::string families = "haybittle-peto,pocock,obrien-fleming";
  std::string betas = "0.1,0.2";
  auto* tables = cli.add_subcommand("tables", "Optimal information rates for up to --max-stages analyses");
  tables->add_option("--family", families, "Comma-separated boundary families")->capture_default_str();
  tables->add_option("--beta", betas, "Comma-separated type II error rates")->capture_default_str();
  tables->add_option("--max-stages", o.max_stages, "Largest number of analyses")->capture_default_str();
  tables->add_option("--futility", o.futility, "Futility bounds: none, binding, nonbinding");
  tables->add_option("--jobs", o.jobs, "Worker threads (default: hardware concurrency)");
  tables->add_flag("--quiet", o.quiet, "Suppress per-cell progress");
  common(tables);

  auto* cs = cli.add_subcommand("case-study", "Reproduce a bundled case study");
  cs->add_option("name", o.case_name, "hypress or adrenal")->required();
  cs->add_option("--variant", o.variant, "original, optimal or both")->capture_default_str();
  common(cs);
  overrides(cs);

  auto* verify = cli.add_subcommand("verify", "Check the quadrature against Monte Carlo simulation");
  verify->add_option("--input", o.input, "Design document (JSON)")->required();
  verify->add_option("--paths", o.paths, "Simulated trials per hypothesis")->capture_default_str();
  verify->add_option("--seed", o.seed, "Generator seed")->capture_default_str();
  common(verify);
  overrides(verify);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*tables) {
    o.families = split(families);
    o.betas.clear();
    for (const auto& b : split(betas)) {
      try {
        o.betas.push_back(std::stod(b));
      } catch (const std::exception&) {
        std::cerr << "error: field --beta: '" << b << "' is not a number\n";
        return kExitConfig;
      }
    }
    return run_tables(o, std::cout, std::cerr);
  }
  if (*design) return run_design(o, std::cout, std::cerr);
  if (*optimize) return run_optimize(o, std::cout, std::cerr);
  if (*cs) return run_case_study(o, std::cout, std::cerr);
  if (*verify) return run_verify(o, std::cout, std::cerr);
  return kExitConfig;
}
