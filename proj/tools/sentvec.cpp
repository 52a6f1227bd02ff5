int main() { return 0; }  // placeholder; real CLI below
