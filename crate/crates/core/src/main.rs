fn main() {
    let code = lasso_equiv::cli::run(std::env::args_os());
    std::process::exit(code);
}
