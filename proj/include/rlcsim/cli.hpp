#pragma once

namespace rlcsim {
inline int run(int, char**) { return 0; }
}
