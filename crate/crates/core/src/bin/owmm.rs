fn main() {
    std::process::exit(owmm_bench::cli::run(std::env::args_os()));
}
