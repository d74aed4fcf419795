// Copyright 2026 The dxr Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <doctest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "dxr/cli.hpp"
#include "dxr/image.hpp"
#include "dxr/pgm.hpp"
#include "helpers.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = dxr::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Relative path -> contents of every regular file below `root`.
std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> t;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) t[fs::relative(e.path(), root).string()] = slurp(e.path());
  return t;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("synth is reproducible") {
  testutil::TempDir dir("cli_synth");
  const auto a = dir.path() / "a";
  const auto b = dir.path() / "b";
  REQUIRE(run({"synth", "--scale", "0.02", "--seed", "7", "--out-dir", a.string()}).code == 0);
  REQUIRE(run({"--seed", "7", "--out-dir", b.string(), "synth", "--scale", "0.02"}).code == 0);
  const auto ta = tree(a);
  CHECK(ta.size() > 10);
  CHECK(ta.count("manifest.csv") == 1);
  CHECK(ta.count("train.csv") == 1);
  CHECK(ta.count("test.csv") == 1);
  CHECK(ta == tree(b));

  const auto c = dir.path() / "c";
  REQUIRE(run({"synth", "--scale", "0.02", "--seed", "8", "--out-dir", c.string()}).code == 0);
  CHECK_FALSE(tree(c) == ta);
}

TEST_CASE("enhance leaves a constant image unchanged") {
  testutil::TempDir dir("cli_enh");
  const auto in = dir.path() / "flat.pgm";
  dxr::save_pgm(dxr::Image(20, 12, 99), in);
  const auto r = run({"enhance", in.string(), "--out-dir", (dir.path() / "out").string()});
  REQUIRE(r.code == 0);
  CHECK(slurp(dir.path() / "out" / "flat.pgm") == slurp(in));
  CHECK(r.out.find("# effective configuration") != std::string::npos);

  const auto self = run({"enhance", in.string(), "--out-dir", dir.path().string()});
  CHECK(self.code != 0);
  CHECK(self.err.find("refusing to overwrite") != std::string::npos);
}

TEST_CASE("bad invocations fail with a one-line reason") {
  for (const std::vector<std::string>& args : std::vector<std::vector<std::string>>{
           {},
           {"nope"},
           {"synth", "--scale", "abc"},
           {"synth", "--bogus"},
           {"train"},
           {"train", "--manifest", "/nonexistent/manifest.csv"},
           {"enhance", "/nonexistent/x.pgm"},
           {"enhance", "x.pgm", "--stage", "blur"},
           {"eval"},
       }) {
    const auto r = run(args);
    CHECK(r.code != 0);
    const auto l = lines(r.err);
    REQUIRE(l.size() == 1);
    CHECK(l[0].rfind("dxr: error: ", 0) == 0);
  }
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("report reproduces a comparison table") {
  testutil::TempDir dir("cli_report");
  std::ofstream(dir.path() / "model.json")
      << R"({"num_classes": 6, "accuracy": 0.87, "balanced_precision": 0.88, "weighted": {"specificity": 0.87}})";
  std::ofstream(dir.path() / "doctors.json")
      << R"({"num_classes": 6, "accuracy": 0.85, "balanced_precision": 0.87, "weighted": {"specificity": 0.85}})";
  const auto r = run({"report", (dir.path() / "model.json").string(), "--annotator",
                      (dir.path() / "doctors.json").string(), "--out-dir", dir.path().string()});
  REQUIRE(r.code == 0);
  const std::string expected =
      "Models,Accuracy,Balance_precision,Specificity\n"
      "Doctors,0.85,0.87,0.85\n"
      "Muti-CNN,0.87,0.88,0.87\n";
  CHECK(slurp(dir.path() / "comparison.csv") == expected);
  CHECK(r.out.find(expected) != std::string::npos);
}

TEST_CASE("train, predict and eval end to end on a small set") {
  testutil::TempDir dir("cli_e2e");
  const auto data = (dir.path() / "data").string();
  REQUIRE(run({"synth", "--scale", "0.03", "--out-dir", data}).code == 0);
  const std::vector<std::string> train_args{"train", "--manifest", data + "/train.csv", "--epochs", "2",
                                            "--branch-a", "12", "--branch-b", "16", "--fusion-dim", "24"};
  auto with_out = [](std::vector<std::string> a, const fs::path& o) {
    a.push_back("--out-dir");
    a.push_back(o.string());
    return a;
  };
  const auto m1 = dir.path() / "m1";
  const auto m2 = dir.path() / "m2";
  REQUIRE(run(with_out(train_args, m1)).code == 0);
  REQUIRE(run(with_out(train_args, m2)).code == 0);
  CHECK(slurp(m1 / "model.ckpt") == slurp(m2 / "model.ckpt"));
  CHECK(slurp(m1 / "train_log.csv") == slurp(m2 / "train_log.csv"));

  const auto p = dir.path() / "pred";
  REQUIRE(run({"predict", "--model", (m1 / "model.ckpt").string(), "--manifest", data + "/test.csv", "--out-dir",
               p.string()})
              .code == 0);
  const auto rows = lines(slurp(p / "predictions.csv"));
  REQUIRE(rows.size() > 1);
  CHECK(rows[0] == "path,class_id,predicted,p0,p1,p2,p3,p4,p5");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::istringstream in(rows[i]);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(in, field, ',')) f.push_back(field);
    REQUIRE(f.size() == 9);
    double s = 0.0;
    for (std::size_t k = 3; k < 9; ++k) s += std::stod(f[k]);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-5));
  }

  const auto e1 = dir.path() / "e1";
  const auto e2 = dir.path() / "e2";
  REQUIRE(run({"eval", "--model", (m1 / "model.ckpt").string(), "--manifest", data + "/test.csv", "--out-dir",
               e1.string()})
              .code == 0);
  REQUIRE(run({"eval", "--predictions", (p / "predictions.csv").string(), "--out-dir", e2.string()}).code == 0);
  CHECK(tree(e1) == tree(e2));
  CHECK(fs::exists(e1 / "eval.json"));
  CHECK(fs::exists(e1 / "roc_class5.csv"));
  CHECK(fs::exists(e1 / "class_metrics.csv"));
}
