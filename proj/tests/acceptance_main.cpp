#include <iostream>

#include "delaystab/selftest.hpp"

int main() {
    const int failures = delaystab::run_acceptance(std::cout);
    return failures == 0 ? 0 : 1;
}
