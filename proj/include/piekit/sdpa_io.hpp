#ifndef PIEKIT_SDPA_IO_HPP
#define PIEKIT_SDPA_IO_HPP

#include <string>

#include "piekit/sdp.hpp"

namespace piekit {

/// Renders the problem in SDPA sparse format (.dat-s). Free variables are
/// split into a difference of nonnegatives in a trailing diagonal block.
std::string to_sdpa_sparse(const SDProblem& prob);

void write_sdpa_sparse(const std::string& path, const SDProblem& prob);

}  // namespace piekit

#endif
