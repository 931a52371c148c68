// placeholder until the CLI integration suite lands
int main() { return 1; }
