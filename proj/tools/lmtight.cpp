#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"

#include "lmtight/cli.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kInternal = 2 };

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace lmtight;

  CLI::App app{"Tightness analysis for autoregressive sequence models"};
  app.require_subcommand(1);

  std::string format = "text";
  std::string out_path;
  auto add_output = [&](CLI::App* cmd) {
    cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "machine"}));
    cmd->add_option("--out", out_path, "Write output to this file instead of stdout");
  };

  cli::AnalyzeOptions opt;
  std::string model_path;
  std::size_t samples = 0;

  auto* analyze = app.add_subcommand("analyze", "Decide tightness and report termination probabilities");
  analyze->add_option("model", model_path, "Model file or builtin:NAME")->required();
  analyze->add_option("--horizon", opt.horizon, "Series horizon T")->check(CLI::PositiveNumber);
  analyze->add_option("--budget", opt.budget, "Maximum number of enumerated prefixes");
  analyze->add_option("--samples", samples, "Monte Carlo runs (0 disables)");
  analyze->add_option("--max-len", opt.max_len, "Truncation length for sampled runs")->check(CLI::PositiveNumber);
  analyze->add_option("--seed", opt.seed, "Sampling seed");
  analyze->add_option("--workers", opt.workers, "Sampling threads")->check(CLI::PositiveNumber);
  std::string bound, upper;
  analyze->add_option("--bound", bound,
                      "Lower bound on EOS probability: constant:E, harmonic:C,D, logharmonic:C,D, "
                      "geometric:C,R or table:V1,V2,...");
  analyze->add_option("--upper-bound", upper, "Geometric upper bound geometric:C,R on p~eos(t)");
  add_output(analyze);

  std::string prob_string;
  auto* prob = app.add_subcommand("prob", "String and prefix probability");
  prob->add_option("model", model_path, "Model file or builtin:NAME")->required();
  prob->add_option("string", prob_string, "Whitespace-separated symbols")->required();
  add_output(prob);

  std::size_t sample_count = 10'000;
  std::size_t sample_len = kDefaultMaxLen;
  std::uint64_t sample_seed = 0;
  std::size_t sample_workers = 1;
  auto* sample = app.add_subcommand("sample", "Monte Carlo termination summary");
  sample->add_option("model", model_path, "Model file or builtin:NAME")->required();
  sample->add_option("--samples", sample_count, "Number of runs")->check(CLI::PositiveNumber);
  sample->add_option("--max-len", sample_len, "Truncation length")->check(CLI::PositiveNumber);
  sample->add_option("--seed", sample_seed, "Sampling seed");
  sample->add_option("--workers", sample_workers, "Sampling threads")->check(CLI::PositiveNumber);
  add_output(sample);

  std::string corpus_path, model_out;
  std::size_t order = 2;
  auto* ngram = app.add_subcommand("estimate-ngram", "Maximum-likelihood n-gram model from a corpus");
  ngram->add_option("corpus", corpus_path, "One whitespace-tokenized string per line")->required();
  ngram->add_option("-n,--order", order, "n-gram order")->check(CLI::PositiveNumber);
  ngram->add_option("--out", model_out, "Model file to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (analyze->parsed()) {
      if (analyze->count("--samples")) opt.samples = samples;
      if (!bound.empty()) opt.bound = bound;
      if (!upper.empty()) opt.upper_bound = upper;
      const auto report = cli::cmd_analyze(load_model(model_path), opt);
      emit(format == "machine" ? cli::render_machine(report) : cli::render_text(report), out_path);
    } else if (prob->parsed()) {
      const auto lm = load_model(model_path);
      const auto r = cli::cmd_prob(lm, prob_string);
      std::string text;
      if (format == "machine") {
        nlohmann::ordered_json j{{"model", lm.name},
                                 {"string", prob_string},
                                 {"string_probability", r.string_probability},
                                 {"prefix_probability", r.prefix_probability}};
        text = j.dump(2) + "\n";
      } else {
        std::ostringstream os;
        os.precision(15);
        os << "string probability: " << r.string_probability << "\n"
           << "prefix probability: " << r.prefix_probability << "\n";
        text = os.str();
      }
      emit(text, out_path);
    } else if (sample->parsed()) {
      const auto lm = load_model(model_path);
      const auto e = cli::cmd_sample(lm, sample_count, sample_len, sample_seed, sample_workers);
      std::string text;
      if (format == "machine") {
        auto j = cli::to_json(e);
        j["model"] = lm.name;
        j["digest"] = lm.digest;
        j["seed"] = sample_seed;
        j["max_len"] = sample_len;
        text = j.dump(2) + "\n";
      } else {
        text = "model: " + lm.name + "\n" + cli::render_text(e);
      }
      emit(text, out_path);
    } else if (ngram->parsed()) {
      const auto m = cli::cmd_estimate_ngram(corpus_path, order, model_out);
      std::cout << "wrote " << model_out << " (" << m.num_states() << " states)\n";
    }
    return kOk;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const BudgetExceeded& e) {
    std::cerr << "error: " << e.what()
              << "\nhint: lower --horizon or raise --budget; enumeration grows as |alphabet|^T\n";
    return kUsage;
  } catch (const std::logic_error& e) {
    // invalid_argument, domain_error and out_of_range are input errors
    if (dynamic_cast<const std::invalid_argument*>(&e) || dynamic_cast<const std::domain_error*>(&e) ||
        dynamic_cast<const std::out_of_range*>(&e)) {
      std::cerr << "error: " << e.what() << "\n";
      return kUsage;
    }
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
