// pepforge: pocket-aware peptide structure + sequence generation.
// Placeholder main until the command layer lands.
#include <cstdio>

int main() {
    std::printf("pepforge: command layer not built yet\n");
    return 1;
}
