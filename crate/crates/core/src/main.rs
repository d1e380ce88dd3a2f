fn main() {
    std::process::exit(ssta::pipeline::run(std::env::args_os()));
}
