/*
   Copyright 2026 The bilinsde Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include <doctest.h>

#include <filesystem>

#include "bilinsde/error.hpp"
#include "bilinsde/model_io.hpp"

using namespace bilinsde;

TEST_CASE("model text round trip is exact") {
  for (const auto& m : {make_triad({1, 1, -2}, 0.7, {1, 2}), make_galerkin_nse2d(2, 0.3, {{1, 0}, {1, 1}})}) {
    const auto text = model_to_text(*m);
    const auto back = model_from_text(text);
    CHECK(back->dim() == m->dim());
    CHECK(back->noise_dim() == m->noise_dim());
    CHECK(back->nu() == m->nu());
    CHECK(back->A() == m->A());
    CHECK(back->sigma() == m->sigma());
    CHECK(back->name() == m->name());
    const auto e1 = m->B().entries(), e2 = back->B().entries();
    REQUIRE(e1.size() == e2.size());
    for (std::size_t t = 0; t < e1.size(); ++t) {
      CHECK(e1[t].i == e2[t].i);
      CHECK(e1[t].value == e2[t].value);
    }
    CHECK(model_to_text(*back) == text);
  }
}

TEST_CASE("model file round trip") {
  const auto path = std::filesystem::temp_directory_path() / "bilinsde_io_test.json";
  const auto m = make_triad({1, 1, -2}, 1.0, {1});
  save_model(*m, path);
  const auto back = load_model(path);
  CHECK(back->B()(1, 2, 0) == m->B()(1, 2, 0));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_model(path), Error);
}

TEST_CASE("malformed model documents") {
  CHECK_THROWS_AS(model_from_text("{"), DataError);
  CHECK_THROWS_AS(model_from_text(R"({"format":"other/1"})"), DataError);
  // wrong A length
  CHECK_THROWS_AS(model_from_text(R"({"format":"bilinsde-model/1","dim":2,"noise_dim":1,"nu":1,
      "A":[1,0,0],"B":[],"sigma":[[1,0]]})"),
                  StructuralError);
  // index out of range
  CHECK_THROWS_AS(model_from_text(R"({"format":"bilinsde-model/1","dim":2,"noise_dim":1,"nu":1,
      "A":[1,0,0,1],"B":[[0,0,5,1.0]],"sigma":[[1,0]]})"),
                  StructuralError);
  const auto ok = model_from_text(R"({"format":"bilinsde-model/1","dim":2,"noise_dim":1,"nu":1,
      "A":[1,0,0,1],"B":[],"sigma":[[1,0]]})");
  CHECK(ok->dim() == 2);
}
