#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "l2betti/words.hpp"

using namespace l2betti;

namespace {

// Independent stack-reduction oracle for free words.
std::vector<Letter> brute_reduce(const std::vector<Letter>& in) {
  std::vector<Letter> st;
  for (Letter l : in) {
    if (!st.empty() && st.back() == static_cast<Letter>(-l))
      st.pop_back();
    else
      st.push_back(l);
  }
  return st;
}

}  // namespace

TEST_CASE("free reduction basics") {
  // a1 a1^-1 -> e
  CHECK(FreeWord::reduced({1, -1}).is_identity());
  // a1 a2 a2^-1 a1 -> a1 a1
  FreeWord w = FreeWord::reduced({1, 2, -2, 1});
  CHECK(w.length() == 2);
  CHECK(w.to_string() == "a1 a1");
  CHECK_THROWS_AS(FreeWord::reduced({3}), std::invalid_argument);
}

TEST_CASE("word times formal inverse reduces to identity") {
  std::mt19937_64 rng(12345);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Letter> letters;
    for (int i = 0; i < 20; ++i) {
      Letter l = static_cast<Letter>(1 + (rng() % 2));
      if (rng() & 1) l = static_cast<Letter>(-l);
      letters.push_back(l);
    }
    std::vector<Letter> with_inverse = letters;
    for (auto it = letters.rbegin(); it != letters.rend(); ++it)
      with_inverse.push_back(static_cast<Letter>(-*it));
    CHECK(FreeWord::reduced(with_inverse).is_identity());
    // Cross-check the class against the stack oracle on the raw word.
    FreeWord ours = FreeWord::reduced(letters);
    std::vector<Letter> oracle = brute_reduce(letters);
    REQUIRE(ours.length() == oracle.size());
    for (std::size_t k = 0; k < oracle.size(); ++k) CHECK(ours.letters()[k] == oracle[k]);
  }
}

TEST_CASE("group laws and inverse") {
  std::mt19937_64 rng(99);
  auto random_word = [&](int len) {
    std::vector<Letter> ls;
    for (int i = 0; i < len; ++i) {
      Letter l = static_cast<Letter>(1 + (rng() % 2));
      if (rng() & 1) l = static_cast<Letter>(-l);
      ls.push_back(l);
    }
    return FreeWord::reduced(ls);
  };
  for (int t = 0; t < 30; ++t) {
    FreeWord a = random_word(8), b = random_word(8), c = random_word(8);
    CHECK((a * b) * c == a * (b * c));
    CHECK((a * a.inverse()).is_identity());
    CHECK((a * b).inverse() == b.inverse() * a.inverse());
  }
}

TEST_CASE("shortlex order") {
  FreeWord e;
  FreeWord a1 = FreeWord::generator(1);
  FreeWord A1 = FreeWord::generator(1, -1);
  FreeWord a2 = FreeWord::generator(2);
  CHECK(FreeWord::compare(e, a1) < 0);
  CHECK(FreeWord::compare(a1, A1) < 0);
  CHECK(FreeWord::compare(A1, a2) < 0);
  CHECK(FreeWord::compare(a1 * a1, a2) > 0);  // longer loses
}

TEST_CASE("product words multiply componentwise and commute across factors") {
  ProductWord x = ProductWord::generator(1, 1);
  ProductWord y = ProductWord::generator(2, 1);
  CHECK(x * y == y * x);
  ProductWord z = x * x;
  CHECK(z.factor(1).length() == 2);
  CHECK(z.total_length() == 2);
  CHECK((x * x.inverse()).is_identity());
}

TEST_CASE("word text round-trip") {
  std::mt19937_64 rng(7);
  auto random_word = [&](int len) {
    std::vector<Letter> ls;
    for (int i = 0; i < len; ++i) {
      Letter l = static_cast<Letter>(1 + (rng() % 2));
      if (rng() & 1) l = static_cast<Letter>(-l);
      ls.push_back(l);
    }
    return FreeWord::reduced(ls);
  };
  for (int t = 0; t < 40; ++t) {
    ProductWord w(random_word(5), random_word(3), random_word(4));
    CHECK(ProductWord::parse(w.to_string()) == w);
  }
  CHECK(ProductWord::parse("[a1 A2|e|a1]").factor(1).to_string() == "a1 A2");
  CHECK(ProductWord::parse("[e|e|e]").is_identity());
}
