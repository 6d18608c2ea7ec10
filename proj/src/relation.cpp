#include "wornet/relation.hpp"

#include "wornet/tensor.hpp"

namespace wornet {

std::string predicate_name(Predicate p) { return p == Predicate::worn ? "worn" : "unworn"; }

Predicate parse_predicate(const std::string& name) {
  if (name == "worn") return Predicate::worn;
  if (name == "unworn") return Predicate::unworn;
  fail("unknown predicate \"" + name + "\", expected worn or unworn");
}

namespace {
double checked_prob(double p, const char* what) {
  check(p >= 0.0 && p <= 1.0, std::string(what) + " must lie in [0, 1]");
  return p;
}
}  // namespace

double compose_chain(double p_s, double p_po_given_s) {
  return checked_prob(p_s, "p_s") * checked_prob(p_po_given_s, "p_po_given_s");
}

TripletConfidence compose_triplet(double p_s, double p_o, double p_p) {
  TripletConfidence c;
  c.p_s = checked_prob(p_s, "p_s");
  c.p_o = checked_prob(p_o, "p_o");
  c.p_p = checked_prob(p_p, "p_p");
  c.p_joint = c.p_s * c.p_o * c.p_p;
  return c;
}

}  // namespace wornet
