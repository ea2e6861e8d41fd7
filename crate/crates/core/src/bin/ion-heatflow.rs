fn main() {
    std::process::exit(ion_heatflow::cli::run(std::env::args_os()));
}
