// Acceptance suite placeholder; filled in after the unit suite is green.
int main() { return 0; }
