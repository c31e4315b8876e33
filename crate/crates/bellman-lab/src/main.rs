use std::process::ExitCode;

fn main() -> ExitCode {
    bellman_lab::cli::main_entry()
}
