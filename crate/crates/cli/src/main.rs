fn main() {
    let code = ftqlab_cli::app::main_with_args(std::env::args_os().collect());
    std::process::exit(code);
}
