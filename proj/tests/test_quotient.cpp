#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "l2betti/complexes.hpp"
#include "l2betti/induce.hpp"
#include "l2betti/quotient.hpp"
#include "oracles.hpp"

using namespace l2betti;

TEST_CASE("close_group enumerates the generated subgroup") {
  Permutation swap2 = {1, 0};
  FiniteQuotient q2(swap2, swap2, "z2");
  CHECK(q2.order() == 2);
  CHECK(q2.elements()[0] == identity_permutation(2));

  FiniteQuotient s3(permutation_parse("2 1 3"), permutation_parse("2 3 1"), "s3");
  CHECK(s3.order() == 6);
  CHECK(s3.order() == oracle::closure_order(s3.image(1), s3.image(2)));

  FiniteQuotient trivial(identity_permutation(3), identity_permutation(3), "triv");
  CHECK(trivial.order() == 1);

  FiniteQuotient s4 = symmetric_quotient(4);
  CHECK(s4.order() == 24);
  CHECK(s4.order() == oracle::closure_order(s4.image(1), s4.image(2)));
}

TEST_CASE("canonical element order is breadth-first with lexicographic ties") {
  FiniteQuotient s3 = symmetric_quotient(3);
  REQUIRE(s3.order() == 6);
  CHECK(s3.elements()[0] == identity_permutation(3));
  // Distance-1 layer: the four generator images, sorted lexicographically,
  // deduplicated: (12), (123), (132).
  CHECK(s3.elements()[1] == permutation_parse("2 1 3"));
  CHECK(s3.index_of(s3.eval(FreeWord::generator(1))) == 1);
  for (std::size_t i = 0; i < 6; ++i)
    CHECK(s3.eval(s3.rep_word(i)) == s3.elements()[i]);  // rep words evaluate back
}

TEST_CASE("eval is a homomorphism") {
  FiniteQuotient s4 = symmetric_quotient(4);
  std::mt19937_64 rng(5);
  auto random_word = [&](int len) {
    std::vector<Letter> ls;
    for (int i = 0; i < len; ++i) {
      Letter l = static_cast<Letter>(1 + (rng() % 2));
      if (rng() & 1) l = static_cast<Letter>(-l);
      ls.push_back(l);
    }
    return FreeWord::reduced(ls);
  };
  for (int t = 0; t < 20; ++t) {
    FreeWord a = random_word(6), b = random_word(6);
    CHECK(s4.eval(a * b) == compose(s4.eval(a), s4.eval(b)));
  }
}

TEST_CASE("quotient_family grammar") {
  auto fam = quotient_family("sym:3..4", 0);
  REQUIRE(fam.size() == 2);
  CHECK(fam[0].q[0].order() == 6);
  CHECK(fam[1].q[0].order() == 24);
  CHECK(fam[0].dimension(0b111) == 216);
  CHECK(fam[1].dimension(0b111) == 13824);
  CHECK(fam[0].dimension(0b001) == 6);

  auto fam2 = quotient_family("sym:3..3", 1);
  REQUIRE(fam2.size() == 1);
  CHECK(fam2[0].q[0].order() == 6);

  auto mixed = quotient_family("sym:3,3,4", 0);
  REQUIRE(mixed.size() == 1);
  CHECK(mixed[0].dimension(0b111) == 6 * 6 * 24);
  CHECK(mixed[0].label == "sym3x3x4");

  auto joined = quotient_family("sym:2..3+sym:3,3,4", 0);
  CHECK(joined.size() == 3);

  auto r1 = quotient_family("random:5,3", 42);
  auto r2 = quotient_family("random:5,3", 42);
  REQUIRE(r1.size() == 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (int s = 1; s <= 3; ++s) {
      CHECK(r1[i].factor(s).image(1) == r2[i].factor(s).image(1));
      CHECK(r1[i].factor(s).image(2) == r2[i].factor(s).image(2));
    }
  auto r3 = quotient_family("random:5,3", 43);
  bool identical = true;
  for (std::size_t i = 0; i < 3; ++i)
    identical = identical && r1[i].factor(1).image(1) == r3[i].factor(1).image(1);
  CHECK_FALSE(identical);

  CHECK_THROWS_AS(quotient_family("sym:", 0), std::invalid_argument);
  CHECK_THROWS_AS(quotient_family("frobnicate:3", 0), std::invalid_argument);
  CHECK_THROWS_AS(quotient_family("random:5", 0), std::invalid_argument);
  CHECK_THROWS_AS(quotient_family("", 0), std::invalid_argument);
}

TEST_CASE("induction is a representation") {
  QuotientTriple t = quotient_family("sym:3", 0)[0];
  std::mt19937_64 rng(9);
  auto random_element = [&](int terms) {
    GroupRingElement x;
    for (int i = 0; i < terms; ++i) {
      ProductWord w;
      for (int s = 1; s <= 3; ++s) {
        std::vector<Letter> ls;
        int l = static_cast<int>(rng() % 3);
        for (int j = 0; j < l; ++j) {
          Letter g = static_cast<Letter>(1 + (rng() % 2));
          if (rng() & 1) g = static_cast<Letter>(-g);
          ls.push_back(g);
        }
        w.factor(s) = FreeWord::reduced(ls);
      }
      x.add_term(w, Rational(1 + static_cast<long>(rng() % 3)));
    }
    return x;
  };
  // induce(1) = I, induce(a-1) under the trivial triple = 0.
  GroupRingMatrix one(1, 1);
  one.at(0, 0) = GroupRingElement::one();
  auto id = induce_rational(one, t, 0b111);
  CHECK(id.rows == 216);
  CHECK(id.nnz() == 216);
  for (std::size_t c = 0; c < id.cols; ++c) {
    CHECK(id.rowidx[id.colptr[c]] == c);
    CHECK(id.values[id.colptr[c]] == 1);
  }
  QuotientTriple triv;
  triv.label = "trivial";
  for (int s = 0; s < 3; ++s)
    triv.q[s] = FiniteQuotient(identity_permutation(2), identity_permutation(2), "triv");
  GroupRingMatrix am(1, 1);
  am.at(0, 0) = GroupRingElement::generator(1, 1) - GroupRingElement::one();
  CHECK(induce_rational(am, triv, 0b111).nnz() == 0);

  // induce(x) * induce(y) == induce(x*y) over exact rationals (sym:2 scale),
  // and induce(x^*) is the transpose.
  QuotientTriple t2 = quotient_family("sym:2", 0)[0];
  for (int trial = 0; trial < 8; ++trial) {
    GroupRingElement x = random_element(3), y = random_element(3);
    GroupRingMatrix mx(1, 1), my(1, 1), mxy(1, 1), mxs(1, 1);
    mx.at(0, 0) = x;
    my.at(0, 0) = y;
    mxy.at(0, 0) = x * y;
    mxs.at(0, 0) = x.involution();
    auto dx = oracle::from_csc_rational(induce_rational(mx, t2, 0b111));
    auto dy = oracle::from_csc_rational(induce_rational(my, t2, 0b111));
    auto dxy = oracle::from_csc_rational(induce_rational(mxy, t2, 0b111));
    auto dxs = oracle::from_csc_rational(induce_rational(mxs, t2, 0b111));
    auto prod = oracle::multiply(dx, dy);
    CHECK(prod == dxy);
    for (std::size_t i = 0; i < dx.size(); ++i)
      for (std::size_t j = 0; j < dx[i].size(); ++j) CHECK(dxs[i][j] == dx[j][i]);
  }
}

TEST_CASE("induction rejects words outside the factor mask") {
  QuotientTriple t = quotient_family("sym:2", 0)[0];
  GroupRingMatrix m(1, 1);
  m.at(0, 0) = GroupRingElement::generator(3, 1);  // factor 3 word
  CHECK_THROWS_AS(induce_rational(m, t, 0b011), std::invalid_argument);
  CHECK_THROWS_AS(induced_identity_column(GroupRingElement::generator(2, 1), t, 0b001),
                  std::invalid_argument);
}

TEST_CASE("induced boundaries keep d^2 = 0 exactly and shapes are D-blocked") {
  ChainComplex x = build_X();
  QuotientTriple t = quotient_family("sym:2", 0)[0];
  const std::size_t d = t.dimension(x.factor_mask);
  CHECK(d == 8);
  auto d1 = induce_rational(x.boundary(1), t, x.factor_mask);
  auto d2 = induce_rational(x.boundary(2), t, x.factor_mask);
  CHECK(d1.rows == 1 * d);
  CHECK(d1.cols == 6 * d);
  CHECK(d2.rows == 6 * d);
  CHECK(d2.cols == 12 * d);
  auto prod = oracle::multiply(oracle::from_csc_rational(d1), oracle::from_csc_rational(d2));
  for (const auto& row : prod)
    for (const auto& v : row) CHECK(v == 0);
}
