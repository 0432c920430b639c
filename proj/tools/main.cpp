#include <cstdio>

int main() {
    std::puts("logsob: subcommands not wired yet");
    return 0;
}
