#ifndef PIEKIT_SERIALIZE_HPP
#define PIEKIT_SERIALIZE_HPP

#include <string>

#include "piekit/pie_system.hpp"

namespace piekit {

// JSON (de)serialization. Doubles survive a round trip bit-exactly.

std::string to_json_string(const PolyMatrix& p);
std::string to_json_string(const PIOperator& op);
std::string to_json_string(const PIESystem& sys);
std::string to_json_string(const ObserverGain& g);

PolyMatrix polymatrix_from_json(const std::string& text);
PIOperator pioperator_from_json(const std::string& text);
PIESystem piesystem_from_json(const std::string& text);
ObserverGain observergain_from_json(const std::string& text);

void save_file(const std::string& path, const std::string& text);
std::string load_file(const std::string& path);

}  // namespace piekit

#endif
