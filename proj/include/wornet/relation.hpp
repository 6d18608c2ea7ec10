#pragma once

#include <string>

namespace wornet {

enum class Predicate { worn, unworn };

std::string predicate_name(Predicate p);
Predicate parse_predicate(const std::string& name);

/// A detected entity inside one image: what it is plus which mask outlines it.
struct EntityRef {
  std::string label;
  std::string mask_id;
};

/// ⟨subject, predicate, object⟩ statement about one image. The subject is the
/// person, the object a clothing item; both masks belong to image `image_id`.
struct Triplet {
  EntityRef subject;
  Predicate predicate = Predicate::unworn;
  EntityRef object;
  std::string image_id;
};

struct TripletConfidence {
  double p_s = 0.0;      // p(S|I)
  double p_o = 0.0;      // p(O|I)
  double p_p = 0.0;      // p(P|S,O,I)
  double p_joint = 0.0;  // p(S,P,O|I)
};

/// Chain-rule composition p(S,P,O|I) = p(S|I) · p(P,O|S,I).
double compose_chain(double p_s, double p_po_given_s);

/// Independence factorization p(S,P,O|I) = p(S|I) · p(O|I) · p(P|S,O,I).
TripletConfidence compose_triplet(double p_s, double p_o, double p_p);

}  // namespace wornet
