#include "cli.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mlc/errors.hpp"
#include "mlc/maps.hpp"
#include "mlc/measures.hpp"
#include "mlc/oracles.hpp"
#include "mlc/parallel.hpp"
#include "mlc/rng.hpp"
#include "mlc/statespace.hpp"
#include "mlc/transforms.hpp"

namespace mlc::cli {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitParse = 2;
constexpr int kExitRange = 3;
constexpr int kExitNotResource = 4;
constexpr int kExitBound = 5;
constexpr int kExitIo = 6;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct Options {
  std::string state_path;
  std::string source_path;
  std::string target_path;
  std::string out_path;
  std::string which = "both";
  int level = 0;
  int dim = 0;
  int pairs = 0;
  bool oracle = false;
  bool has_p = false;
  double p = 1.0;
  std::uint64_t seed = 0;
  OracleBudget budget;
};

int cmd_measure(const Options& opt, std::ostream& out) {
  const PureState psi = load_state(opt.state_path);
  const CoherenceLevel level(opt.level);
  if (opt.which != "geometric") {
    const RobustnessResult r = robustness_k(psi, level);
    out << "robustness " << fmt(r.value) << "\n";
    if (opt.oracle) {
      const OracleValue ov = robustness_k_oracle(outer_product(psi), level, opt.budget);
      out << "robustness_oracle " << fmt(ov.value) << " deviation "
          << fmt(std::abs(ov.value - r.value));
      if (!ov.converged) out << " not_converged";
      out << "\n";
    }
  }
  if (opt.which != "robustness") {
    // The conversion bound pairs the robustness at level k with the geometric
    // measure one level up, so that is the level reported here.
    const CoherenceLevel next(opt.level + 1);
    const GeometricResult g = geometric_k(psi, next);
    out << "geometric(" << next.k << ") " << fmt(g.value) << "\n";
    if (opt.oracle) {
      const double ov = geometric_k_oracle(psi, next, opt.budget);
      out << "geometric_oracle(" << next.k << ") " << fmt(ov) << " deviation "
          << fmt(std::abs(ov - g.value)) << "\n";
    }
  }
  return kExitOk;
}

int cmd_convert(const Options& opt, std::ostream& out) {
  const PureState source = load_state(opt.source_path);
  const PureState target = load_state(opt.target_path);
  const CoherenceLevel level(opt.level);
  const double p_max = max_conversion_probability(source, target, level);
  const double g = geometric_k(source, CoherenceLevel(level.k + 1)).value;
  const double r = robustness_k(target, level).value;
  const double ratio = g / (r * (1.0 - g));
  const bool feasible = ratio >= 1.0 - 1e-12;
  std::optional<KCoherencePreservingMap> map;
  if (opt.has_p) {
    map = build_k_preserving(source, target, level, opt.p, opt.budget);
  } else if (feasible) {
    map = build_k_preserving(source, target, level, 1.0, opt.budget);
  }
  const ConversionReport report{source,  target, level,    g, r,
                                ratio,   p_max,  feasible, std::move(map)};
  out << report_to_json(report) << "\n";
  return kExitOk;
}

int cmd_sweep(const Options& opt) {
  if (opt.dim < 2) throw InvalidStateError("sweep requires --dim of at least 2");
  const CoherenceLevel level(opt.level);
  if (level.k < 2 || level.k >= opt.dim) {
    throw LevelOutOfRangeError("sweep requires 2 <= k < dim so both sampled states are resources");
  }
  if (opt.pairs < 1) throw InvalidConstraintError("sweep requires --pairs of at least 1");

  std::vector<std::string> rows(opt.pairs);
  parallel_for(opt.pairs, [&](int i) {
    const std::uint64_t source_seed = derive_seed(opt.seed, 2 * i);
    const std::uint64_t target_seed = derive_seed(opt.seed, 2 * i + 1);
    const PureState source = sample_pure(opt.dim, source_seed, level.k + 1);
    const PureState target = sample_pure(opt.dim, target_seed, level.k + 1);
    const double g = geometric_k(source, CoherenceLevel(level.k + 1)).value;
    const double r = robustness_k(target, level).value;
    const double p_max = max_conversion_probability(source, target, level);
    const bool feasible = p_max >= 1.0;
    bool verified = false;
    if (feasible) {
      try {
        const KCoherencePreservingMap map =
            build_k_preserving(source, target, level, 1.0, opt.budget);
        const Matrix got = apply(map.base, outer_product(source)).matrix();
        const Matrix want = outer_product(target).matrix();
        verified = (got - want).cwiseAbs().maxCoeff() <= 1e-10;
      } catch (const Error&) {
        verified = false;
      }
    }
    std::ostringstream row;
    row << opt.dim << ',' << level.k << ',' << source_seed << ','
        << target_seed << ',' << fmt(g) << ',' << fmt(r) << ',' << fmt(p_max)
        << ',' << (feasible ? "true" : "false") << ','
        << (verified ? "true" : "false");
    rows[i] = row.str();
  });

  std::ofstream file(opt.out_path, std::ios::binary);
  if (!file) throw IoError("cannot open output file: " + opt.out_path);
  file << "dim,k,source_seed,target_seed,g_source,r_target,p_max,feasible,verified\n";
  for (const auto& row : rows) file << row << "\n";
  file.flush();
  if (!file.good()) throw IoError("failed while writing: " + opt.out_path);
  return kExitOk;
}

int cmd_witness(const Options& opt, std::ostream& out) {
  const PureState target = load_state(opt.target_path);
  const CoherenceLevel level(opt.level);
  const auto [witness, map] = nonisolation_witness(target, level, opt.budget, opt.seed);
  const double r = robustness_k(target, level).value;
  nlohmann::json j;
  j["witness"] = nlohmann::json::parse(state_to_json(witness));
  j["g_witness"] = geometric_k(witness, CoherenceLevel(level.k + 1)).value;
  j["threshold"] = 1.0 - 1.0 / (r + 1.0);
  j["r_target"] = r;
  j["level"] = level.k;
  j["map"] = nlohmann::json::parse(map_to_json(map));
  out << j.dump() << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"multilevel coherence toolkit: measures, free-set certification, "
               "coherence preserving maps and conversion analysis",
               "mlc"};
  app.require_subcommand(1);

  const auto add_common = [&opt](CLI::App* cmd) {
    cmd->add_option("--seed", opt.seed, "seed for every randomized step");
    cmd->add_option("--budget-iters", opt.budget.max_iterations,
                    "iteration cap per oracle restart")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--budget-restarts", opt.budget.restarts,
                    "number of oracle restarts")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--tol", opt.budget.tolerance,
                    "certification residual tolerance")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* measure =
      app.add_subcommand("measure", "evaluate coherence measures of a pure state");
  measure->add_option("state", opt.state_path, "state JSON file")->required();
  measure->add_option("--k", opt.level, "coherence level")->required();
  measure->add_option("--which", opt.which, "robustness, geometric, or both")
      ->check(CLI::IsMember({"robustness", "geometric", "both"}));
  measure->add_flag("--oracle", opt.oracle,
                    "cross-check each value against its numerical oracle");
  add_common(measure);

  CLI::App* convert = app.add_subcommand(
      "convert", "analyze a pure state conversion and emit a report");
  convert->add_option("source", opt.source_path, "source state JSON file")->required();
  convert->add_option("target", opt.target_path, "target state JSON file")->required();
  convert->add_option("--k", opt.level, "coherence level")->required();
  convert->add_option("--p", opt.p,
                      "build the conversion map at this success probability")
      ->check(CLI::PositiveNumber);
  add_common(convert);

  CLI::App* sweep = app.add_subcommand(
      "sweep", "tabulate conversion data over random pairs into a CSV file");
  sweep->add_option("--dim", opt.dim, "state space dimension")->required();
  sweep->add_option("--k", opt.level, "coherence level")->required();
  sweep->add_option("--pairs", opt.pairs, "number of source/target pairs")->required();
  sweep->add_option("--out", opt.out_path, "output CSV path")->required();
  add_common(sweep);

  CLI::App* witness = app.add_subcommand(
      "witness", "find a distinct state that converts onto the target");
  witness->add_option("target", opt.target_path, "target state JSON file")->required();
  witness->add_option("--k", opt.level, "coherence level")->required();
  add_common(witness);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitParse;
  }

  opt.budget.seed = opt.seed;
  opt.has_p = convert->count("--p") > 0;

  try {
    if (measure->parsed()) return cmd_measure(opt, out);
    if (convert->parsed()) return cmd_convert(opt, out);
    if (sweep->parsed()) return cmd_sweep(opt);
    return cmd_witness(opt, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const InvalidStateError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const LevelOutOfRangeError& e) {
    err << "error: " << e.what() << "\n";
    return kExitRange;
  } catch (const InvalidConstraintError& e) {
    err << "error: " << e.what() << "\n";
    return kExitRange;
  } catch (const InvalidScaleError& e) {
    err << "error: " << e.what() << "\n";
    return kExitRange;
  } catch (const InvalidEffectError& e) {
    err << "error: " << e.what() << "\n";
    return kExitRange;
  } catch (const NotResourceStateError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNotResource;
  } catch (const BoundViolationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitBound;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace mlc::cli
