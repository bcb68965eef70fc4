// placeholder main while the library is scaffolded
int main() { return 0; }
