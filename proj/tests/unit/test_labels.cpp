#include <doctest.h>

#include <histovote/labels.hpp>

using namespace histovote;

TEST_SUITE("labels") {

TEST_CASE("class indices follow the export convention") {
  CHECK(index_of(ClassLabel::Normal) == 0);
  CHECK(index_of(ClassLabel::Benign) == 1);
  CHECK(index_of(ClassLabel::InSitu) == 2);
  CHECK(index_of(ClassLabel::Invasive) == 3);
}

TEST_CASE("precedence is a strict total order, most dangerous first") {
  CHECK(kPrecedenceOrder[0] == ClassLabel::Invasive);
  CHECK(kPrecedenceOrder[3] == ClassLabel::Normal);
  for (ClassLabel a : kAllLabels) {
    CHECK_FALSE(outranks(a, a));
    for (ClassLabel b : kAllLabels) {
      if (a != b) CHECK(outranks(a, b) != outranks(b, a));
      for (ClassLabel c : kAllLabels)
        if (outranks(a, b) && outranks(b, c)) CHECK(outranks(a, c));
    }
  }
  CHECK(outranks(ClassLabel::Benign, ClassLabel::Normal));
  CHECK(outranks(ClassLabel::InSitu, ClassLabel::Benign));
}

TEST_CASE("names round-trip and common spellings parse") {
  for (ClassLabel l : kAllLabels) CHECK(parse_label(label_name(l)) == l);
  CHECK(parse_label("in situ") == ClassLabel::InSitu);
  CHECK(parse_label("In_Situ") == ClassLabel::InSitu);
  CHECK(parse_label("INVASIVE") == ClassLabel::Invasive);
  CHECK_FALSE(parse_label("unknown").has_value());
  CHECK_FALSE(parse_label("").has_value());
}

TEST_CASE("binary mapping") {
  CHECK(to_binary(ClassLabel::Normal) == BinaryLabel::NonCarcinoma);
  CHECK(to_binary(ClassLabel::Benign) == BinaryLabel::NonCarcinoma);
  CHECK(to_binary(ClassLabel::InSitu) == BinaryLabel::Carcinoma);
  CHECK(to_binary(ClassLabel::Invasive) == BinaryLabel::Carcinoma);
  CHECK(binary_label_name(BinaryLabel::Carcinoma) == "Carcinoma");
}

}
