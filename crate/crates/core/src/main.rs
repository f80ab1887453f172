fn main() -> std::process::ExitCode {
    treeperc::runner::main_from_args()
}
