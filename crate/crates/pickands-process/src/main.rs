fn main() {
    pickands_process::cli::main();
}
