// Runs the full verification battery and prints one line per criterion.
// Exits 0 only when every criterion passes, so the gate stays honest when a
// pinned tolerance is not met.

#include <tilescope/acceptance.hpp>

#include <cstdio>
#include <cstdlib>
#include <string>

#ifndef TILESCOPE_GOLDEN_DIR
#define TILESCOPE_GOLDEN_DIR "."
#endif

int main(int argc, char** argv) {
    std::string golden = TILESCOPE_GOLDEN_DIR;
    if (argc > 1) golden = argv[1];
    auto results = tilescope::run_acceptance(golden);
    int failed = 0;
    for (const auto& r : results) {
        std::printf("C%02d %-18s %s  %6.2fs/%gs  %s\n", r.id, r.name.c_str(),
                    r.passed ? "PASS" : "FAIL", r.seconds, r.budget,
                    r.detail.c_str());
        if (!r.passed) ++failed;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failed,
                results.size());
    return failed == 0 ? 0 : 1;
}
