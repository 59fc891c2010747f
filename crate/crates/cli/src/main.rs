// CLI entry point; filled in after the core library.
fn main() {}
