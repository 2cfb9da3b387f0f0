#include "mixrank/mixrank.hpp"
int main() { return 0; }
