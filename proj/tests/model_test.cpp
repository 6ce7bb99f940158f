#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "tovd/errors.hpp"
#include "tovd/model.hpp"
#include "tovd/rng.hpp"

#include "support.hpp"

using namespace tovd;

namespace {

SparseVec random_input(CounterRng& rng, std::size_t dim, std::size_t nnz) {
  SparseVec x;
  x.dim = dim;
  std::set<std::uint32_t> idx;
  while (idx.size() < nnz)
    idx.insert(static_cast<std::uint32_t>(rng.next_below(dim)));
  for (std::uint32_t i : idx)
    x.entries.push_back({i, 2.0 * rng.next_unit() - 1.0});
  return x;
}

double l2_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    sum += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sum);
}

// flattens gradients for the finite-difference check
std::vector<double*> param_slots(MlpParams& p) {
  std::vector<double*> slots;
  for (auto* v : {&p.w1, &p.b1, &p.w2, &p.b2})
    for (double& x : *v) slots.push_back(&x);
  return slots;
}

std::vector<double> grad_slots(const Gradients& g) {
  std::vector<double> flat;
  for (const auto* v : {&g.w1, &g.b1, &g.w2, &g.b2})
    flat.insert(flat.end(), v->begin(), v->end());
  return flat;
}

}  // namespace

TEST_CASE("init_params is deterministic with zero biases") {
  const Dims dims{50, 8, 2};
  const MlpParams a = init_params(123, dims);
  const MlpParams b = init_params(123, dims);
  CHECK(a.w1 == b.w1);
  CHECK(a.w2 == b.w2);
  for (double v : a.b1) CHECK(v == 0.0);
  for (double v : a.b2) CHECK(v == 0.0);
  const MlpParams c = init_params(124, dims);
  CHECK(a.w1 != c.w1);

  // xavier bound
  const double limit = std::sqrt(6.0 / (50 + 8));
  for (double v : a.w1) {
    CHECK(v <= limit);
    CHECK(v >= -limit);
  }
}

TEST_CASE("init_params accepts the default large dims") {
  const Dims dims{std::size_t{1} << 18, 256, 2};
  const MlpParams p = init_params(1, dims);
  CHECK(p.w1.size() == dims.input * dims.hidden);
  CHECK(p.b1.size() == 256);
  CHECK(p.w2.size() == 512);
}

TEST_CASE("mask_for_instance") {
  const MaskSpec spec{0.5, 42, 16};
  const ExampleMask a = mask_for_instance(spec, 7);
  const ExampleMask b = mask_for_instance(spec, 7);
  CHECK(a.values == b.values);
  for (double v : a.values) CHECK((v == 0.0 || v == 2.0));

  // different instances get different masks (H = 64 fixture)
  const MaskSpec wide{0.5, 42, 64};
  int collisions = 0;
  const ExampleMask base = mask_for_instance(wide, 0);
  for (std::int64_t id = 1; id <= 50; ++id) {
    if (mask_for_instance(wide, id).values == base.values) ++collisions;
  }
  CHECK(collisions == 0);

  // zero fraction concentrates around p
  const MaskSpec big{0.5, 1, 100000};
  const ExampleMask m = mask_for_instance(big, 3);
  std::size_t zeros = 0;
  for (double v : m.values) zeros += v == 0.0;
  const double frac = static_cast<double>(zeros) / m.values.size();
  CHECK(frac == doctest::Approx(0.5).epsilon(0.02));
  CHECK(std::abs(frac - 0.5) < 0.01);

  CHECK_THROWS_AS(mask_for_instance({0.0, 1, 4}, 0), InputError);
  CHECK_THROWS_AS(mask_for_instance({0.5, 1, 0}, 0), ContractError);
}

TEST_CASE("flip_mask algebra") {
  const ExampleMask m{{2.0, 0.0, 2.0, 0.0}};
  const ExampleMask f = flip_mask(m, 0.5);
  CHECK(f.values == std::vector<double>{0.0, 2.0, 0.0, 2.0});

  // involution
  CHECK(flip_mask(f, 0.5).values == m.values);

  // complementarity: m + flip(m) = (1/p) * ones
  const MaskSpec spec{0.5, 9, 32};
  for (std::int64_t id = 0; id < 20; ++id) {
    const ExampleMask mask = mask_for_instance(spec, id);
    const ExampleMask flip = flip_mask(mask, spec.p);
    for (std::size_t j = 0; j < mask.values.size(); ++j)
      CHECK(mask.values[j] + flip.values[j] == 2.0);
  }
}

TEST_CASE("forward basics") {
  CounterRng rng(5, 0);
  const Dims dims{30, 8, 2};
  const MlpParams p = init_params(3, dims);
  const SparseVec x = random_input(rng, 30, 6);

  // no mask equals the all-ones mask
  const std::vector<double> ones(8, 1.0);
  CHECK(forward(p, x) == forward(p, x, ones));

  // zero input reduces to relu of biases
  SparseVec zero;
  zero.dim = 30;
  MlpParams biased = p;
  for (std::size_t j = 0; j < biased.b1.size(); ++j)
    biased.b1[j] = 0.3 * static_cast<double>(j) - 1.0;
  std::vector<double> want(biased.b2);
  for (std::size_t j = 0; j < 8; ++j) {
    const double h = std::max(0.0, biased.b1[j]);
    for (std::size_t c = 0; c < 2; ++c) want[c] += h * biased.w2[j * 2 + c];
  }
  const std::vector<double> got = forward(biased, zero);
  CHECK(got[0] == doctest::Approx(want[0]).epsilon(1e-12));
  CHECK(got[1] == doctest::Approx(want[1]).epsilon(1e-12));

  // shape errors
  SparseVec wrong;
  wrong.dim = 31;
  CHECK_THROWS_AS(forward(p, wrong), ContractError);
  const std::vector<double> short_mask(4, 1.0);
  CHECK_THROWS_AS(forward(p, x, short_mask), ContractError);

  // purity
  CHECK(forward(p, x) == forward(p, x));
}

TEST_CASE("complementary sub-networks sum to twice the full network") {
  CounterRng rng(8, 0);
  const Dims dims{64, 24, 2};
  const MlpParams p = init_params(21, dims);
  const MaskSpec spec{0.5, 77, 24};
  for (int trial = 0; trial < 200; ++trial) {
    const SparseVec x = random_input(rng, 64, 1 + rng.next_below(10));
    const std::int64_t id = static_cast<std::int64_t>(rng.next_below(1000));
    const ExampleMask m = mask_for_instance(spec, id);
    const ExampleMask f = flip_mask(m, spec.p);
    const auto lm = forward(p, x, m.values);
    const auto lf = forward(p, x, f.values);
    const auto full = forward(p, x);
    for (std::size_t c = 0; c < 2; ++c)
      CHECK(lm[c] + lf[c] == doctest::Approx(2.0 * full[c]).epsilon(1e-9));
  }
}

TEST_CASE("two-stage forward equals forward") {
  CounterRng rng(31, 0);
  const Dims dims{40, 12, 2};
  const MlpParams p = init_params(4, dims);
  const MaskSpec spec{0.5, 6, 12};
  for (int trial = 0; trial < 50; ++trial) {
    const SparseVec x = random_input(rng, 40, 5);
    const ExampleMask m = mask_for_instance(spec, trial);
    const auto h = hidden_activations(p, x);
    CHECK(logits_from_hidden(p, h, m.values) == forward(p, x, m.values));
    CHECK(logits_from_hidden(p, h) == forward(p, x));
  }
}

TEST_CASE("backward matches finite differences on a small fixture") {
  CounterRng rng(17, 0);
  const Dims dims{20, 8, 2};
  MlpParams p = init_params(11, dims);
  const SparseVec x = random_input(rng, 20, 7);
  const MaskSpec spec{0.5, 5, 8};
  const ExampleMask mask = mask_for_instance(spec, 3);

  for (const char* name : {"ce", "sce", "gce", "hinge"}) {
    const LossKind kind = parse_loss(name);
    for (const bool masked : {false, true}) {
      if (kind.variant == LossVariant::Hinge && masked) continue;
      const std::span<const double> mspan =
          masked ? std::span<const double>(mask.values)
                 : std::span<const double>();
      Gradients g = zero_gradients(dims);
      backward(p, x, 1, kind, mspan, g);
      const std::vector<double> analytic = grad_slots(g);

      const double h = 1e-5;
      std::vector<double*> slots = param_slots(p);
      double worst = 0.0;
      for (std::size_t s = 0; s < slots.size(); ++s) {
        const double keep = *slots[s];
        *slots[s] = keep + h;
        const double up = loss_from_logits(kind, forward(p, x, mspan), 1);
        *slots[s] = keep - h;
        const double down = loss_from_logits(kind, forward(p, x, mspan), 1);
        *slots[s] = keep;
        const double fd = (up - down) / (2.0 * h);
        worst = std::max(worst, tovd_test::rel_error(analytic[s], fd));
      }
      CHECK(worst < 1e-4);
    }
  }
}

TEST_CASE("masked-out units receive zero gradient") {
  CounterRng rng(23, 0);
  const Dims dims{16, 6, 2};
  const MlpParams p = init_params(2, dims);
  const SparseVec x = random_input(rng, 16, 5);
  std::vector<double> mask{2.0, 0.0, 2.0, 0.0, 2.0, 0.0};

  Gradients g = zero_gradients(dims);
  backward(p, x, 0, LossKind{}, mask, g);
  for (std::size_t j = 0; j < 6; ++j) {
    if (mask[j] != 0.0) continue;
    CHECK(g.b1[j] == 0.0);
    for (std::size_t i = 0; i < dims.input; ++i)
      CHECK(g.w1[i * dims.hidden + j] == 0.0);
  }
}

TEST_CASE("gradient vanishes at a saturated correct prediction") {
  const Dims dims{4, 3, 2};
  MlpParams p = init_params(6, dims);
  // blow up one output weight so the correct class saturates
  for (std::size_t j = 0; j < dims.hidden; ++j) {
    p.w2[j * 2 + 0] = 40.0;
    p.w2[j * 2 + 1] = -40.0;
    p.b1[j] = 1.0;
  }
  SparseVec x;
  x.dim = 4;
  x.entries = {{0, 1.0}};
  Gradients g = zero_gradients(dims);
  backward(p, x, 0, LossKind{}, {}, g);
  double norm = 0.0;
  for (double v : grad_slots(g)) norm += v * v;
  CHECK(std::sqrt(norm) < 1e-6);
}

TEST_CASE("linear model path (hidden = 0)") {
  const Dims dims{10, 0, 2};
  const MlpParams p = init_params(9, dims);
  CHECK(p.w1.empty());
  CHECK(p.w2.size() == 20);
  SparseVec x;
  x.dim = 10;
  x.entries = {{2, 1.0}, {7, -0.5}};
  const auto logits = forward(p, x);
  const double want0 = p.w2[2 * 2 + 0] - 0.5 * p.w2[7 * 2 + 0];
  CHECK(logits[0] == doctest::Approx(want0).epsilon(1e-12));

  const std::vector<double> mask{1.0};
  CHECK_THROWS_AS(forward(p, x, mask), ContractError);
}

TEST_CASE("params serialization round-trips bit-exactly") {
  const MlpParams p = init_params(77, {33, 5, 2});
  std::stringstream ss;
  write_params(ss, p);
  const MlpParams q = read_params(ss);
  CHECK(q.dims.input == 33);
  CHECK(q.w1 == p.w1);
  CHECK(q.b1 == p.b1);
  CHECK(q.w2 == p.w2);
  CHECK(q.b2 == p.b2);
  CHECK(fingerprint(q) == fingerprint(p));

  MlpParams r = q;
  r.w2[0] = std::nextafter(r.w2[0], 1e300);
  CHECK(fingerprint(r) != fingerprint(q));
}
