#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "fastassoc/bench.hpp"
#include "fastassoc/fusion.hpp"
#include "fastassoc/kbest.hpp"
#include "fastassoc/matrix_io.hpp"
#include "fastassoc/oracle.hpp"

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitIo = 3;

using namespace fastassoc;

// Writes to the named file, or stdout when the name is empty.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw IoError("cannot open '" + path + "' for writing");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void close() {
    if (!file_) return;
    file_->close();
    if (!*file_) throw IoError("write failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

template <typename Rows>
void emit(const Rows& rows, const std::string& out) {
  Sink sink(out);
  write_csv(sink.stream(), rows);
  sink.close();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"K-best data association solver and experiment drivers"};
  app.require_subcommand(1);

  std::string input;
  std::string out;
  std::size_t k = 1;
  std::string config = "v3";
  Index gate = 0;

  auto* solve = app.add_subcommand("solve", "K best associations of a cost matrix");
  solve->add_option("--input", input, "matrix file")->required();
  solve->add_option("--k", k, "number of associations")->required();
  solve->add_option("--config", config, "v1, v2, v3 or v4")->check(CLI::IsMember({"v1", "v2", "v3", "v4"}));
  solve->add_option("--gate", gate, "keep the S cheapest pairs per row (0: no gating)");
  solve->add_option("--out", out, "CSV output (default stdout)");

  auto* oracle = app.add_subcommand("oracle", "brute-force enumeration of a small matrix");
  oracle->add_option("--input", input, "matrix file")->required();
  oracle->add_option("--k", k, "number of associations")->required();
  oracle->add_option("--out", out, "CSV output (default stdout)");

  BenchConfig bench_cfg;
  std::string experiment;
  auto* bench = app.add_subcommand("bench", "benchmark drivers");
  bench->add_option("experiment", experiment, "dense, mimo, gibbs or gate-sweep")
      ->required()
      ->check(CLI::IsMember({"dense", "mimo", "gibbs", "gate-sweep"}));
  bench->add_option("--sizes", bench_cfg.sizes, "matrix sizes")->delimiter(',');
  bench->add_option("--k", bench_cfg.k, "output associations");
  bench->add_option("--trials", bench_cfg.trials, "random instances per size");
  bench->add_option("--seed", bench_cfg.seed, "base seed");
  bench->add_option("--threads", bench_cfg.threads, "worker threads (1 for clean timing)");
  bench->add_option("--gate", bench_cfg.gate, "pairs kept per row for v4");
  bench->add_option("--versions", bench_cfg.versions, "versions to time")->delimiter(',');
  bench->add_option("--det-k", bench_cfg.det_k, "deterministic K values (gibbs table)")->delimiter(',');
  bench->add_option("--samples", bench_cfg.samples, "Gibbs sample counts (gibbs table)")->delimiter(',');
  bench->add_option("--out", out, "CSV output (default stdout)");

  std::vector<std::size_t> k_list{1, 10, 100, 1000};
  std::size_t trials = 25;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  auto* fusion = app.add_subcommand("fusion-sim", "three-sensor fusion simulation over a list of K");
  fusion->add_option("--k-list", k_list, "hypothesis counts")->delimiter(',');
  fusion->add_option("--trials", trials, "scenes per K");
  fusion->add_option("--seed", seed, "base seed");
  fusion->add_option("--threads", threads, "worker threads");
  fusion->add_option("--out", out, "CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (*solve || *oracle) {
      auto matrix = read_matrix_file(input);
      if (k == 0) throw InvalidInput("K must be at least 1");
      OutputSet result;
      if (*solve) {
        if (gate > 0) matrix = gate_matrix(matrix, gate);
        result = kbest_single(matrix, k, KBestConfig::parse(config));
      } else {
        result = kbest_bruteforce(matrix, k);
      }
      Sink sink(out);
      write_output_csv(sink.stream(), result);
      sink.close();
    } else if (*bench) {
      if (experiment == "dense") emit(run_dense_bench(bench_cfg), out);
      if (experiment == "mimo") emit(run_mimo_bench(bench_cfg), out);
      if (experiment == "gibbs") emit(run_gibbs_bench(bench_cfg), out);
      if (experiment == "gate-sweep") emit(run_gate_sweep(bench_cfg), out);
    } else if (*fusion) {
      auto rows = run_fusion_sweep(k_list, trials, seed, threads);
      Sink sink(out);
      sink.stream() << "k,mean_fnr,se_fnr,mean_fpr,se_fpr,mean_ms\n";
      for (const auto& r : rows) {
        sink.stream() << r.k << ',' << r.mean_fnr << ',' << r.se_fnr << ',' << r.mean_fpr << ',' << r.se_fpr << ','
                      << r.mean_ms << '\n';
      }
      sink.close();
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const TooLarge& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const Infeasible& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitInvalid;
  }
  return 0;
}
