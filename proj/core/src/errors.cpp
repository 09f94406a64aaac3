#include "xlel/errors.hpp"

namespace xlel {

void throw_config(const std::string& what) { throw ConfigError(what); }
void throw_data(const std::string& what) { throw DataError(what); }

}  // namespace xlel
