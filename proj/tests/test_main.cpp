#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

int main(int argc, char** argv) {
#if defined(__GLIBC__)
    // large tensor blocks churn through mmap otherwise
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
    return doctest::Context(argc, argv).run();
}
