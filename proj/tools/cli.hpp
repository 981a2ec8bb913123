#pragma once

namespace amf::cli {

/// Entry point for the amf tool. Returns 0 on success, 1 on usage errors,
/// 2 on runtime errors.
int run(int argc, const char* const* argv);

}  // namespace amf::cli
