#include "ixe/types.hpp"

#include "ixe/errors.hpp"

namespace ixe {

const char* to_string(ObjectClass c) {
  switch (c) {
    case ObjectClass::pedestrian: return "pedestrian";
    case ObjectClass::vehicle: return "vehicle";
    case ObjectClass::bicycle: return "bicycle";
    case ObjectClass::other: return "other";
  }
  return "other";
}

ObjectClass object_class_from_string(const std::string& s) {
  if (s == "pedestrian") return ObjectClass::pedestrian;
  if (s == "vehicle") return ObjectClass::vehicle;
  if (s == "bicycle") return ObjectClass::bicycle;
  if (s == "other") return ObjectClass::other;
  throw Error("unknown object class: " + s);
}

}  // namespace ixe
