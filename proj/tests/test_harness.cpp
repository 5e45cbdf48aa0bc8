#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "support/helpers.hpp"
#include "wgdf/checkpoint.hpp"
#include "wgdf/harness.hpp"
#include "wgdf/image_io.hpp"

using namespace wgdf;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Small, fast configuration shared by the integration tests.
RunConfig tiny_run(const fs::path& out) {
  RunConfig cfg;
  cfg.model.c_hf = 4;
  cfg.model.c_lf = 8;
  cfg.model.heads = 4;
  cfg.model.stages = 1;
  cfg.synth.size = 16;
  cfg.synth_count = 4;
  cfg.epochs = 2;
  cfg.batch_size = 8;
  cfg.seed = 3;
  cfg.output_dir = out.string();
  return cfg;
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_SUITE_BEGIN("harness");

TEST_CASE("config files parse, echo, and reject unknown keys") {
  TempDir dir("wgdf_cfg");
  {
    std::ofstream f(dir.path / "run.cfg");
    f << "# comment line\n"
      << "model.c_hf = 8\n"
      << "epochs = 7\n"
      << "data.synthetic.size = 32   # inline comment\n"
      << "precision = f64\n";
  }
  RunConfig cfg = RunConfig::from_file(dir.path / "run.cfg");
  CHECK(cfg.model.c_hf == 8);
  CHECK(cfg.epochs == 7);
  CHECK(cfg.synth.size == 32);
  CHECK(cfg.precision == Precision::kF64);

  // The echo re-parses to the same values.
  {
    std::ofstream f(dir.path / "echo.cfg");
    f << cfg.to_text();
  }
  RunConfig echoed = RunConfig::from_file(dir.path / "echo.cfg");
  CHECK(echoed.model.c_hf == 8);
  CHECK(echoed.epochs == 7);

  {
    std::ofstream f(dir.path / "bad.cfg");
    f << "model.c_hfff = 8\n";
  }
  CHECK_THROWS_WITH_AS(RunConfig::from_file(dir.path / "bad.cfg"),
                       doctest::Contains("unknown config key"), ConfigError);

  {
    std::ofstream f(dir.path / "both.cfg");
    f << "data.dataset_dir = /nowhere\n"
      << "data.synthetic.size = 32\n";
  }
  CHECK_THROWS_WITH_AS(RunConfig::from_file(dir.path / "both.cfg"),
                       doctest::Contains("one data source"), ConfigError);
}

TEST_CASE("train: bookkeeping of steps per epoch") {
  TempDir dir("wgdf_train_steps");
  RunConfig cfg = tiny_run(dir.path / "r1");
  cfg.epochs = 1;
  auto out = cmd_train(cfg);  // 4 samples, batch 8 -> 1 step
  REQUIRE(out.epochs.size() == 1);
  CHECK(out.epochs[0].steps == 1);

  cfg.output_dir = (dir.path / "r2").string();
  cfg.batch_size = 3;  // ceil(4/3) = 2 steps
  auto out2 = cmd_train(cfg);
  CHECK(out2.epochs[0].steps == 2);

  cfg.epochs = 0;
  CHECK_THROWS_AS(cmd_train(cfg), ConfigError);
}

TEST_CASE("train: identical config and seed give identical logs and checkpoints") {
  TempDir dir("wgdf_train_det");
  RunConfig cfg = tiny_run(dir.path / "a");
  cfg.epochs = 3;
  auto r1 = cmd_train(cfg);
  cfg.output_dir = (dir.path / "b").string();
  auto r2 = cmd_train(cfg);
  CHECK(slurp(r1.metrics_path) == slurp(r2.metrics_path));
  CHECK(slurp(r1.checkpoint_path) == slurp(r2.checkpoint_path));
  CHECK(slurp(r1.best_checkpoint_path) == slurp(r2.best_checkpoint_path));

  // The log has the documented header and one line per epoch.
  std::ifstream log(r1.metrics_path);
  std::string header;
  std::getline(log, header);
  CHECK(header == "epoch\tsteps\tmean_loss\tf1\tiou\tedge_miou");
  int lines = 0;
  std::string line;
  while (std::getline(log, line))
    if (!line.empty()) ++lines;
  CHECK(lines == 3);
}

TEST_CASE("train: augmentation keeps runs deterministic") {
  TempDir dir("wgdf_train_aug");
  RunConfig cfg = tiny_run(dir.path / "a");
  cfg.augment = true;
  auto r1 = cmd_train(cfg);
  cfg.output_dir = (dir.path / "b").string();
  auto r2 = cmd_train(cfg);
  CHECK(slurp(r1.metrics_path) == slurp(r2.metrics_path));
}

TEST_CASE("train: a diverging run aborts with epoch/step context") {
  TempDir dir("wgdf_train_nan");
  RunConfig cfg = tiny_run(dir.path / "r");
  cfg.opt.lr = 1e30;  // guaranteed blow-up
  cfg.epochs = 5;
  CHECK_THROWS_WITH_AS(cmd_train(cfg), doctest::Contains("epoch"), TrainError);
}

TEST_CASE("eval right after training reproduces the final logged metrics") {
  TempDir dir("wgdf_eval_match");
  RunConfig cfg = tiny_run(dir.path / "r");
  cfg.epochs = 4;
  auto out = cmd_train(cfg);

  EvalOptions eopt;
  eopt.checkpoint = out.checkpoint_path;
  eopt.synth = cfg.synth;
  eopt.synth_count = cfg.synth_count;
  eopt.seed = cfg.seed;
  eopt.threshold = cfg.model.classifier_threshold;
  std::ostringstream sink;
  MetricsReport rep = cmd_eval(eopt, sink);
  CHECK(rep.samples == 4);
  CHECK(std::fabs(rep.s.f1 - out.final_epoch().f1) < 1e-6);
  CHECK(std::fabs(rep.s.iou - out.final_epoch().iou) < 1e-6);
  CHECK(std::fabs(rep.edge_miou - out.final_epoch().edge_miou) < 1e-6);

  // The printed report is key<TAB>value structured text.
  CHECK(sink.str().find("f1\t") != std::string::npos);
  CHECK(sink.str().find("edge_miou\t") != std::string::npos);
}

TEST_CASE("eval: raising the threshold never adds positive pixels") {
  TempDir dir("wgdf_eval_thresh");
  RunConfig cfg = tiny_run(dir.path / "r");
  auto out = cmd_train(cfg);
  auto positives = [&](double th) {
    EvalOptions eopt;
    eopt.checkpoint = out.checkpoint_path;
    eopt.synth = cfg.synth;
    eopt.synth_count = cfg.synth_count;
    eopt.seed = cfg.seed;
    eopt.threshold = th;
    std::ostringstream sink;
    MetricsReport rep = cmd_eval(eopt, sink);
    return rep.counts.tp + rep.counts.fp;
  };
  CHECK(positives(0.99) <= positives(0.5));
}

TEST_CASE("eval: a perfect prediction double scores 1.0 on every ratio") {
  Rng rng(81);
  std::vector<Mask> gts;
  for (int i = 0; i < 3; ++i) {
    Mask m = testutil::random_mask(rng, 16, 16, 0.3);
    m.set(4, 4, 1);  // keep nonempty
    gts.push_back(m);
  }
  MetricsReport rep = aggregate_masks(gts, gts);
  CHECK(rep.s.oa == 1.0);
  CHECK(rep.s.precision == 1.0);
  CHECK(rep.s.recall == 1.0);
  CHECK(rep.s.f1 == 1.0);
  CHECK(rep.s.iou == 1.0);
  CHECK(rep.edge_miou == 1.0);
  CHECK(rep.counts.fp == 0);
  CHECK(rep.counts.fn == 0);
}

TEST_CASE("predict: fresh zero-bias model on identical images gives the mid gray map") {
  TempDir dir("wgdf_predict");
  // A fresh checkpoint without any training.
  ModelConfig mcfg;
  mcfg.c_hf = 4;
  mcfg.c_lf = 8;
  mcfg.stages = 1;
  mcfg.seed = 12;
  auto params = init_params<float>(mcfg);
  const fs::path ckpt = dir.path / "fresh.wgdf";
  checkpoint_save(ckpt, params, mcfg);

  ImageU8 img{16, 16, 3, std::vector<uint8_t>(16 * 16 * 3, 0)};
  Rng rng(13);
  for (auto& px : img.pixels) px = uint8_t(rng.uniform_int(0, 255));
  write_pnm(dir.path / "a.ppm", img);

  PredictOptions popt;
  popt.checkpoint = ckpt;
  popt.image_a = dir.path / "a.ppm";
  popt.image_b = dir.path / "a.ppm";
  popt.output_dir = (dir.path / "out").string();
  cmd_predict(popt);

  ImageU8 prob = read_pnm(dir.path / "out" / "probability.pgm");
  for (uint8_t v : prob.pixels) CHECK(int(v) == 128);  // round(0.5 * 255)
  ImageU8 mask = read_pnm(dir.path / "out" / "mask.pgm");
  for (uint8_t v : mask.pixels) CHECK(int(v) == 0);

  // Re-running writes bitwise identical files.
  auto prob_bytes = slurp(dir.path / "out" / "probability.pgm");
  popt.output_dir = (dir.path / "out2").string();
  cmd_predict(popt);
  CHECK(slurp(dir.path / "out2" / "probability.pgm") == prob_bytes);

  // Mask pixels are always 0/255.
  for (uint8_t v : mask.pixels) CHECK((v == 0 || v == 255));
}

TEST_CASE("predict rejects mismatched or odd-sized images") {
  TempDir dir("wgdf_predict_bad");
  ModelConfig mcfg;
  mcfg.c_hf = 4;
  mcfg.c_lf = 8;
  mcfg.stages = 1;
  auto params = init_params<float>(mcfg);
  const fs::path ckpt = dir.path / "fresh.wgdf";
  checkpoint_save(ckpt, params, mcfg);
  write_pnm(dir.path / "a.pgm", ImageU8{16, 16, 1, std::vector<uint8_t>(256, 7)});
  write_pnm(dir.path / "b.pgm", ImageU8{14, 16, 1, std::vector<uint8_t>(224, 7)});
  write_pnm(dir.path / "odd.pgm", ImageU8{15, 16, 1, std::vector<uint8_t>(240, 7)});

  PredictOptions popt;
  popt.checkpoint = ckpt;
  popt.image_a = dir.path / "a.pgm";
  popt.image_b = dir.path / "b.pgm";
  popt.output_dir = (dir.path / "out").string();
  CHECK_THROWS_AS(cmd_predict(popt), IoError);
  popt.image_b = dir.path / "odd.pgm";
  popt.image_a = dir.path / "odd.pgm";
  CHECK_THROWS_AS(cmd_predict(popt), IoError);
}

TEST_CASE("decompose: constant, random, and step-edge images") {
  TempDir dir("wgdf_decompose");
  SUBCASE("constant image puts all energy in LL") {
    write_pnm(dir.path / "const.pgm",
              ImageU8{16, 16, 1, std::vector<uint8_t>(256, 200)});
    auto sum = cmd_decompose({dir.path / "const.pgm", (dir.path / "o1").string()});
    CHECK(sum.energy_fraction[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sum.energy_fraction[1] == doctest::Approx(0.0));
    CHECK(sum.energy_fraction[2] == doctest::Approx(0.0));
    CHECK(sum.energy_fraction[3] == doctest::Approx(0.0));
    CHECK(fs::exists(dir.path / "o1" / "ll.pgm"));
    CHECK(fs::exists(dir.path / "o1" / "summary.txt"));
  }
  SUBCASE("energy fractions sum to 1 within 1e-4") {
    ImageU8 img{32, 32, 1, std::vector<uint8_t>(1024, 0)};
    Rng rng(17);
    for (auto& v : img.pixels) v = uint8_t(rng.uniform_int(0, 255));
    write_pnm(dir.path / "rand.pgm", img);
    auto sum = cmd_decompose({dir.path / "rand.pgm", (dir.path / "o2").string()});
    const double total = sum.energy_fraction[0] + sum.energy_fraction[1] +
                         sum.energy_fraction[2] + sum.energy_fraction[3];
    CHECK(std::fabs(total - 1.0) < 1e-4);
  }
  SUBCASE("a vertical step edge concentrates detail energy in HL") {
    // The step starts at an odd column so it cuts through the 2x2 blocks.
    ImageU8 img{16, 16, 1, std::vector<uint8_t>(256, 0)};
    for (int y = 0; y < 16; ++y)
      for (int x = 7; x < 16; ++x) img.pixels[size_t(y) * 16 + x] = 255;
    write_pnm(dir.path / "step.pgm", img);
    auto sum = cmd_decompose({dir.path / "step.pgm", (dir.path / "o3").string()});
    CHECK(sum.energy_fraction[2] > sum.energy_fraction[1]);
    CHECK(sum.energy_fraction[2] > sum.energy_fraction[3]);
  }
  SUBCASE("odd sizes are rejected") {
    write_pnm(dir.path / "odd.pgm",
              ImageU8{15, 16, 1, std::vector<uint8_t>(240, 1)});
    CHECK_THROWS_AS(cmd_decompose({dir.path / "odd.pgm", (dir.path / "o4").string()}),
                    IoError);
  }
}

TEST_CASE("gradcheck driver reports failures through the exit path") {
  std::ostringstream sink;
  CHECK(cmd_gradcheck(GradcheckScale::kOps, sink) == 0);
  CHECK(sink.str().find("pass\top.conv2d.k3") != std::string::npos);
}

TEST_CASE("CLI: error paths exit nonzero with the error prefix") {
  const std::string cli = WGDF_CLI_PATH;
  TempDir dir("wgdf_cli");
  auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " >" +
                            (dir.path / "out.txt").string() + " 2>" +
                            (dir.path / "err.txt").string();
    const int rc = std::system(cmd.c_str());
    std::ifstream err(dir.path / "err.txt");
    std::string first_line;
    std::getline(err, first_line);
    return std::pair<int, std::string>(rc, first_line);
  };

  auto [rc1, err1] = run("eval --checkpoint /nonexistent.wgdf");
  CHECK(rc1 != 0);
  CHECK(err1.rfind("error: io:", 0) == 0);

  auto [rc2, err2] = run("train --config /nonexistent.cfg");
  CHECK(rc2 != 0);
  CHECK(err2.rfind("error: io:", 0) == 0);

  auto [rc3, err3] = run("gradcheck --precision f32");
  CHECK(rc3 != 0);
  CHECK(err3.rfind("error: config:", 0) == 0);
}

TEST_SUITE_END();
